use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected} values, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("vacuum state (rho = {rho:e}){}", cell_suffix(*.cell))]
    Vacuum { rho: f64, cell: Option<usize> },

    #[error("non-physical temperature T = {temperature:e}{}", cell_suffix(*.cell))]
    NonPhysicalTemperature {
        temperature: f64,
        cell: Option<usize>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported velocity dimension {0} for this operator")]
    UnsupportedDimension(usize),

    #[error("unsupported collision kernel: {0}")]
    UnsupportedKernel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("solution blew up at t = {time} during {stage}")]
    BlowUp { stage: String, time: f64 },

    #[error("Poisson source is incompatible with periodicity (mean residual {residual:e})")]
    Solvability { residual: f64 },

    #[error("step failed at t = {time}: {source}")]
    Step {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error{}: {message}", config_location(*.line, .key))]
    Config {
        line: Option<usize>,
        key: Option<String>,
        message: String,
    },

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("i/o error: {0}")]
    Io(String),
}

fn cell_suffix(cell: Option<usize>) -> String {
    cell.map(|c| format!(" at cell {c}")).unwrap_or_default()
}

fn config_location(line: Option<usize>, key: &Option<String>) -> String {
    match (line, key) {
        (Some(l), Some(k)) => format!(" (line {l}, key `{k}`)"),
        (Some(l), None) => format!(" (line {l})"),
        (None, Some(k)) => format!(" (key `{k}`)"),
        (None, None) => String::new(),
    }
}

impl Error {
    /// Attach a station index to state-admissibility errors.
    pub fn at_cell(self, index: usize) -> Self {
        match self {
            Error::Vacuum { rho, .. } => Error::Vacuum {
                rho,
                cell: Some(index),
            },
            Error::NonPhysicalTemperature { temperature, .. } => Error::NonPhysicalTemperature {
                temperature,
                cell: Some(index),
            },
            other => other,
        }
    }

    pub fn at_time(self, time: f64) -> Self {
        match self {
            e @ (Error::Step { .. } | Error::BlowUp { .. }) => e,
            other => Error::Step {
                time,
                source: Box::new(other),
            },
        }
    }

    pub fn config(line: Option<usize>, key: Option<&str>, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            key: key.map(str::to_owned),
            message: message.into(),
        }
    }

    /// Coarse category used for CLI exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config { .. } | Error::InvalidParameter(_) | Error::UnsupportedKernel(_) => {
                ErrorCategory::Config
            }
            Error::UnsupportedDimension(_) => ErrorCategory::Config,
            Error::Io(_) => ErrorCategory::Io,
            Error::Mismatch(_) | Error::Shape { .. } => ErrorCategory::Mismatch,
            Error::Step { source, .. } => source.category(),
            _ => ErrorCategory::Numerical,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numerical,
    Io,
    Mismatch,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Numerical => 3,
            ErrorCategory::Io => 4,
            ErrorCategory::Mismatch => 5,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
