//! Scenario files, built-in presets, the run driver and run comparison.
//!
//! A scenario is flat `key = value` text grouped under `[section]` headers.
//! Every key has a default except `equation`; unknown keys are rejected.

mod compare;
mod presets;
mod run;

pub use compare::{compare_dirs, compare_profiles, CompareReport, FieldDiff};
pub use presets::{preset, preset_names, preset_text};
pub use run::{run, write_outputs, DiagnosticsRecord, Profile, RunOutput};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::collision::{PenaltyChoice, PenaltyParams};
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Primitives};
use crate::transport::Order;
use crate::vlasov::{FieldLaw, MomentFlux};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    Boltzmann,
    Landau,
    Bgk,
    VlasovAmpere,
    Vab,
}

impl Equation {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "boltzmann" => Equation::Boltzmann,
            "landau" => Equation::Landau,
            "bgk" => Equation::Bgk,
            "vlasov-ampere" => Equation::VlasovAmpere,
            "vab" => Equation::Vab,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Equation::Boltzmann => "boltzmann",
            Equation::Landau => "landau",
            Equation::Bgk => "bgk",
            Equation::VlasovAmpere => "vlasov-ampere",
            Equation::Vab => "vab",
        }
    }

    pub fn is_plasma(self) -> bool {
        matches!(self, Equation::VlasovAmpere | Equation::Vab)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    MicroMacro,
    FilbetJin,
    JinYan,
    Direct,
    Euler,
}

impl SolverKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "MM" => SolverKind::MicroMacro,
            "FJ" => SolverKind::FilbetJin,
            "JY" => SolverKind::JinYan,
            "DS" => SolverKind::Direct,
            "EULER" => SolverKind::Euler,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::MicroMacro => "MM",
            SolverKind::FilbetJin => "FJ",
            SolverKind::JinYan => "JY",
            SolverKind::Direct => "DS",
            SolverKind::Euler => "EULER",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Knudsen {
    Constant(f64),
    /// `ε_min + (tanh(25-20x) + tanh(-5+20x))/2` for `x <= 0.65`, `ε_min` beyond.
    Tanh {
        eps_min: f64,
    },
}

impl Knudsen {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Knudsen::Constant(e) => e,
            Knudsen::Tanh { eps_min } => {
                if x <= 0.65 {
                    eps_min + 0.5 * ((25.0 - 20.0 * x).tanh() + (-5.0 + 20.0 * x).tanh())
                } else {
                    eps_min
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial {
    /// `ρ = (2 + sin ωx)/3`, `T = (3 + cos ωx)/4`, two Maxwellians centered at `±(u1, 0)`.
    DoublePeak { omega: f64, u1: f64 },
    /// Maxwellian with the left state for `x < x0` and the right state otherwise.
    Riemann {
        left: Primitives,
        right: Primitives,
        x0: f64,
    },
    /// The same Maxwellian everywhere.
    Uniform(Primitives),
    /// `(1 + a cos kx)` times the unit Maxwellian at rest.
    Plasma { amplitude: f64, wavenumber: f64 },
}

impl Initial {
    pub fn name(&self) -> &'static str {
        match self {
            Initial::DoublePeak { .. } => "double-peak",
            Initial::Riemann { .. } => "riemann",
            Initial::Uniform(_) => "uniform",
            Initial::Plasma { .. } => "plasma",
        }
    }

    /// Whether `f⁰` is a local Maxwellian everywhere.
    pub fn is_equilibrium(&self) -> bool {
        !matches!(self, Initial::DoublePeak { .. })
    }
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub equation: Equation,
    /// `None` for the plasma equations, which have a single scheme.
    pub solver: Option<SolverKind>,
    pub nx: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub bc: BoundaryCondition,
    pub dim: usize,
    pub lv: f64,
    pub nv: usize,
    /// `Δt = dt_factor · Δx`.
    pub dt_factor: f64,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    /// Diagnostics are written every this many steps, and at every snapshot.
    pub diag_every: usize,
    pub knudsen: Knudsen,
    pub initial: Initial,
    pub order: Order,
    pub penalty: PenaltyParams,
    pub landau_predictor: bool,
    pub angles: usize,
    pub radius: Option<f64>,
    pub gamma: f64,
    pub tau: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    pub field: FieldLaw,
    pub moment_flux: MomentFlux,
    pub background: f64,
}

const KEYS: &[&str] = &[
    "scenario.name",
    "scenario.equation",
    "scenario.solver",
    "grid.nx",
    "grid.x_min",
    "grid.x_max",
    "grid.bc",
    "grid.dim",
    "grid.lv",
    "grid.nv",
    "time.dt_factor",
    "time.t_end",
    "time.snapshots",
    "time.diag_every",
    "knudsen.profile",
    "knudsen.eps",
    "initial.kind",
    "initial.omega",
    "initial.u1",
    "initial.x0",
    "initial.rho_l",
    "initial.u_l",
    "initial.t_l",
    "initial.rho_r",
    "initial.u_r",
    "initial.t_r",
    "initial.rho",
    "initial.t",
    "initial.amplitude",
    "initial.wavenumber",
    "scheme.order",
    "scheme.penalty",
    "scheme.beta0",
    "scheme.delta",
    "scheme.landau_predictor",
    "scheme.cg_tol",
    "scheme.cg_max_iter",
    "collision.angles",
    "collision.radius",
    "collision.gamma",
    "collision.tau",
    "plasma.field",
    "plasma.moment_flux",
    "plasma.background",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut section = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| {
                    Error::config(Some(line_no), None, "unterminated section header")
                })?;
                section = name.trim().to_owned();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(Some(line_no), None, "expected `key = value`"))?;
            let key = key.trim();
            let full = if section.is_empty() {
                key.to_owned()
            } else {
                format!("{section}.{key}")
            };
            if !KEYS.contains(&full.as_str()) {
                return Err(Error::config(Some(line_no), Some(&full), "unknown key"));
            }
            if map
                .insert(full.clone(), (line_no, value.trim().to_owned()))
                .is_some()
            {
                return Err(Error::config(Some(line_no), Some(&full), "duplicate key"));
            }
        }
        Ok(Self { map })
    }

    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some((line, v)) => v
                .parse()
                .map_err(|_| Error::config(Some(line), Some(key), format!("cannot parse `{v}`"))),
        }
    }

    fn bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some((_, "true")) => Ok(true),
            Some((_, "false")) => Ok(false),
            Some((line, v)) => Err(Error::config(
                Some(line),
                Some(key),
                format!("expected true or false, got `{v}`"),
            )),
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.raw(key).map(|(l, _)| l)
    }
}

impl Entries {
    fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::config(Some(line), Some(key), format!("cannot parse `{v}`"))),
        }
    }
}

impl Scenario {
    /// Parse scenario text and apply defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let e = Entries::parse(text)?;
        let eq_text: String = e.opt("scenario.equation")?.ok_or_else(|| {
            Error::config(None, Some("scenario.equation"), "missing required key")
        })?;
        let equation = Equation::parse(&eq_text).ok_or_else(|| {
            Error::config(
                e.line("scenario.equation"),
                Some("scenario.equation"),
                format!("unknown equation `{eq_text}`"),
            )
        })?;
        let solver = match e.opt::<String>("scenario.solver")? {
            None if equation.is_plasma() => None,
            None => Some(SolverKind::MicroMacro),
            Some(s) => Some(SolverKind::parse(&s).ok_or_else(|| {
                Error::config(
                    e.line("scenario.solver"),
                    Some("scenario.solver"),
                    format!("unknown solver `{s}`"),
                )
            })?),
        };
        let bc = match e.get("grid.bc", "periodic".to_owned())?.as_str() {
            "periodic" => BoundaryCondition::Periodic,
            "free-flow" => BoundaryCondition::FreeFlow,
            other => {
                return Err(Error::config(
                    e.line("grid.bc"),
                    Some("grid.bc"),
                    format!("unknown boundary condition `{other}`"),
                ))
            }
        };
        let knudsen = match e.get("knudsen.profile", "constant".to_owned())?.as_str() {
            "constant" => Knudsen::Constant(e.get("knudsen.eps", 1.0)?),
            "tanh" => Knudsen::Tanh {
                eps_min: e.get("knudsen.eps", 1e-2)?,
            },
            other => {
                return Err(Error::config(
                    e.line("knudsen.profile"),
                    Some("knudsen.profile"),
                    format!("unknown Knudsen profile `{other}`"),
                ))
            }
        };
        let kind = e.get(
            "initial.kind",
            if equation.is_plasma() {
                "plasma"
            } else {
                "double-peak"
            }
            .to_owned(),
        )?;
        let initial = match kind.as_str() {
            "double-peak" => Initial::DoublePeak {
                omega: e.get("initial.omega", 2.0 * std::f64::consts::PI)?,
                u1: e.get("initial.u1", 0.2)?,
            },
            "riemann" => Initial::Riemann {
                left: Primitives::new(
                    e.get("initial.rho_l", 1.0)?,
                    [e.get("initial.u_l", 0.0)?, 0.0],
                    e.get("initial.t_l", 1.0)?,
                ),
                right: Primitives::new(
                    e.get("initial.rho_r", 0.125)?,
                    [e.get("initial.u_r", 0.0)?, 0.0],
                    e.get("initial.t_r", 0.25)?,
                ),
                x0: e.get("initial.x0", 0.5)?,
            },
            "uniform" => Initial::Uniform(Primitives::new(
                e.get("initial.rho", 1.0)?,
                [e.get("initial.u1", 0.0)?, 0.0],
                e.get("initial.t", 1.0)?,
            )),
            "plasma" => Initial::Plasma {
                amplitude: e.get("initial.amplitude", 1.0)?,
                wavenumber: e.get("initial.wavenumber", 2.0)?,
            },
            other => {
                return Err(Error::config(
                    e.line("initial.kind"),
                    Some("initial.kind"),
                    format!("unknown initial condition `{other}`"),
                ))
            }
        };
        let order = Order::from_usize(e.get("scheme.order", 2usize)?).map_err(|err| {
            Error::config(
                e.line("scheme.order"),
                Some("scheme.order"),
                err.to_string(),
            )
        })?;
        let penalty_choice = match e
            .get("scheme.penalty", default_penalty(equation).to_owned())?
            .as_str()
        {
            "choice1" => PenaltyChoice::Choice1,
            "choice2" => PenaltyChoice::Choice2,
            "spectral-radius" => PenaltyChoice::LandauSpectralRadius,
            other => {
                return Err(Error::config(
                    e.line("scheme.penalty"),
                    Some("scheme.penalty"),
                    format!("unknown penalty `{other}`"),
                ))
            }
        };
        let snapshots = match e.raw("time.snapshots") {
            None => Vec::new(),
            Some((line, v)) => parse_list(v).ok_or_else(|| {
                Error::config(
                    Some(line),
                    Some("time.snapshots"),
                    format!("expected a comma separated list of times, got `{v}`"),
                )
            })?,
        };
        let field = match e.get("plasma.field", "ampere".to_owned())?.as_str() {
            "ampere" => FieldLaw::Ampere,
            "poisson" => FieldLaw::Poisson,
            other => {
                return Err(Error::config(
                    e.line("plasma.field"),
                    Some("plasma.field"),
                    format!("unknown field law `{other}`"),
                ))
            }
        };
        let moment_flux = match e.get("plasma.moment_flux", "upwind".to_owned())?.as_str() {
            "upwind" => MomentFlux::Upwind,
            "centered" => MomentFlux::Centered,
            other => {
                return Err(Error::config(
                    e.line("plasma.moment_flux"),
                    Some("plasma.moment_flux"),
                    format!("unknown moment flux `{other}`"),
                ))
            }
        };
        let t_end: f64 = e.get("time.t_end", 0.2)?;
        let s = Scenario {
            name: e.get("scenario.name", "custom".to_owned())?,
            equation,
            solver,
            nx: e.get("grid.nx", 100)?,
            x_min: e.get("grid.x_min", 0.0)?,
            x_max: e.get("grid.x_max", 1.0)?,
            bc,
            dim: e.get(
                "grid.dim",
                if equation == Equation::VlasovAmpere {
                    1
                } else {
                    2
                },
            )?,
            lv: e.get("grid.lv", 8.4)?,
            nv: e.get("grid.nv", 32)?,
            dt_factor: e.get("time.dt_factor", 0.05)?,
            t_end,
            snapshots: if snapshots.is_empty() {
                vec![t_end]
            } else {
                snapshots
            },
            diag_every: e.get("time.diag_every", 1)?,
            knudsen,
            initial,
            order,
            penalty: PenaltyParams {
                choice: penalty_choice,
                beta0: e.get("scheme.beta0", 1.0)?,
                delta_rel: e.get("scheme.delta", 1e-8)?,
            },
            landau_predictor: e.bool("scheme.landau_predictor", false)?,
            angles: e.get("collision.angles", 8)?,
            radius: e.opt("collision.radius")?,
            gamma: e.get("collision.gamma", 0.0)?,
            tau: e.get("collision.tau", 1.0)?,
            cg_tol: e.get("scheme.cg_tol", 1e-10)?,
            cg_max_iter: e.get("scheme.cg_max_iter", 500)?,
            field,
            moment_flux,
            background: e.get("plasma.background", 1.0)?,
        };
        s.validate()?;
        Ok(s)
    }

    /// Reject inconsistent parameter combinations.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: String| Err(Error::config(None, Some(key), msg));
        if self.nx < 4 {
            return bad("grid.nx", format!("need at least 4 cells, got {}", self.nx));
        }
        if !(self.x_max > self.x_min) {
            return bad("grid.x_max", "x_max must exceed x_min".into());
        }
        if self.dim != 1 && self.dim != 2 {
            return bad(
                "grid.dim",
                format!("velocity dimension must be 1 or 2, got {}", self.dim),
            );
        }
        if self.nv < 2 || self.nv % 2 != 0 {
            return bad(
                "grid.nv",
                format!("velocity nodes must be even and >= 2, got {}", self.nv),
            );
        }
        if !(self.lv > 0.0) {
            return bad("grid.lv", "velocity extent must be positive".into());
        }
        if !(self.dt_factor > 0.0 && self.dt_factor.is_finite()) {
            return bad("time.dt_factor", "time step must be positive".into());
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("time.t_end", "end time must be positive".into());
        }
        if self
            .snapshots
            .iter()
            .any(|&s| !(s > 0.0 && s <= self.t_end * (1.0 + 1e-12)))
        {
            return bad(
                "time.snapshots",
                "snapshot times must lie in (0, t_end]".into(),
            );
        }
        if self.diag_every == 0 {
            return bad(
                "time.diag_every",
                "diagnostic cadence must be positive".into(),
            );
        }
        let eps_ok = match self.knudsen {
            Knudsen::Constant(e) => e > 0.0 && e.is_finite(),
            Knudsen::Tanh { eps_min } => eps_min > 0.0 && eps_min.is_finite(),
        };
        if !eps_ok {
            return bad("knudsen.eps", "Knudsen number must be positive".into());
        }
        if !(self.tau > 0.0) {
            return bad("collision.tau", "relaxation time must be positive".into());
        }
        if let Some(r) = self.radius {
            if !(r > 0.0) {
                return bad(
                    "collision.radius",
                    "truncation radius must be positive".into(),
                );
            }
        }
        self.penalty
            .validate()
            .map_err(|e| Error::config(None, Some("scheme.beta0"), e.to_string()))?;
        let needs_2d = matches!(
            self.equation,
            Equation::Boltzmann | Equation::Landau | Equation::Vab
        );
        if needs_2d && self.dim != 2 {
            return bad(
                "grid.dim",
                format!(
                    "{} needs a two-dimensional velocity grid",
                    self.equation.name()
                ),
            );
        }
        if self.equation.is_plasma() {
            if let Some(s) = self.solver {
                return bad(
                    "scenario.solver",
                    format!(
                        "solver {} does not apply to {}",
                        s.name(),
                        self.equation.name()
                    ),
                );
            }
            if self.bc != BoundaryCondition::Periodic {
                return bad("grid.bc", "plasma runs need periodic boundaries".into());
            }
            if !matches!(self.initial, Initial::Plasma { .. } | Initial::Uniform(_)) {
                return bad(
                    "initial.kind",
                    "plasma runs take plasma or uniform initial data".into(),
                );
            }
            if matches!(self.knudsen, Knudsen::Tanh { .. }) {
                return bad(
                    "knudsen.profile",
                    "plasma runs take a constant Knudsen number".into(),
                );
            }
        } else {
            let solver = self.solver.unwrap_or(SolverKind::MicroMacro);
            match (solver, self.equation) {
                (SolverKind::JinYan, e) if e != Equation::Landau => {
                    return bad(
                        "scenario.solver",
                        format!("JY is the Landau penalty scheme, not for {}", e.name()),
                    )
                }
                (SolverKind::FilbetJin, Equation::Landau) => {
                    return bad(
                        "scenario.solver",
                        "FJ is not defined for landau; use JY".into(),
                    )
                }
                _ => {}
            }
            if matches!(self.initial, Initial::Plasma { .. }) {
                return bad(
                    "initial.kind",
                    "plasma initial data needs a plasma equation".into(),
                );
            }
            match (self.equation, self.penalty.choice) {
                (Equation::Landau, PenaltyChoice::Choice1 | PenaltyChoice::Choice2) => {
                    return bad(
                        "scheme.penalty",
                        "landau takes the spectral-radius penalty".into(),
                    )
                }
                (Equation::Boltzmann | Equation::Bgk, PenaltyChoice::LandauSpectralRadius) => {
                    return bad(
                        "scheme.penalty",
                        "the spectral-radius penalty is for landau".into(),
                    )
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.nx as f64
    }

    pub fn base_dt(&self) -> f64 {
        self.dt_factor * self.dx()
    }

    /// The scenario as config text; parsing it gives back the same scenario.
    pub fn to_config(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[scenario]");
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "equation = {}", self.equation.name());
        if let Some(k) = self.solver {
            let _ = writeln!(s, "solver = {}", k.name());
        }
        let _ = writeln!(s, "\n[grid]");
        let _ = writeln!(s, "nx = {}", self.nx);
        let _ = writeln!(s, "x_min = {:?}", self.x_min);
        let _ = writeln!(s, "x_max = {:?}", self.x_max);
        let bc = match self.bc {
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::FreeFlow => "free-flow",
        };
        let _ = writeln!(s, "bc = {bc}");
        let _ = writeln!(s, "dim = {}", self.dim);
        let _ = writeln!(s, "lv = {:?}", self.lv);
        let _ = writeln!(s, "nv = {}", self.nv);
        let _ = writeln!(s, "\n[time]");
        let _ = writeln!(s, "dt_factor = {:?}", self.dt_factor);
        let _ = writeln!(s, "t_end = {:?}", self.t_end);
        let snaps: Vec<String> = self.snapshots.iter().map(|t| format!("{t:?}")).collect();
        let _ = writeln!(s, "snapshots = {}", snaps.join(", "));
        let _ = writeln!(s, "diag_every = {}", self.diag_every);
        let _ = writeln!(s, "\n[knudsen]");
        match self.knudsen {
            Knudsen::Constant(e) => {
                let _ = writeln!(s, "profile = constant\neps = {e:?}");
            }
            Knudsen::Tanh { eps_min } => {
                let _ = writeln!(s, "profile = tanh\neps = {eps_min:?}");
            }
        }
        let _ = writeln!(s, "\n[initial]");
        let _ = writeln!(s, "kind = {}", self.initial.name());
        match self.initial {
            Initial::DoublePeak { omega, u1 } => {
                let _ = writeln!(s, "omega = {omega:?}\nu1 = {u1:?}");
            }
            Initial::Riemann { left, right, x0 } => {
                let _ = writeln!(s, "x0 = {x0:?}");
                let _ = writeln!(
                    s,
                    "rho_l = {:?}\nu_l = {:?}\nt_l = {:?}",
                    left.rho, left.u[0], left.t
                );
                let _ = writeln!(
                    s,
                    "rho_r = {:?}\nu_r = {:?}\nt_r = {:?}",
                    right.rho, right.u[0], right.t
                );
            }
            Initial::Uniform(p) => {
                let _ = writeln!(s, "rho = {:?}\nu1 = {:?}\nt = {:?}", p.rho, p.u[0], p.t);
            }
            Initial::Plasma {
                amplitude,
                wavenumber,
            } => {
                let _ = writeln!(s, "amplitude = {amplitude:?}\nwavenumber = {wavenumber:?}");
            }
        }
        let _ = writeln!(s, "\n[scheme]");
        let _ = writeln!(s, "order = {}", self.order.as_usize());
        let p = match self.penalty.choice {
            PenaltyChoice::Choice1 => "choice1",
            PenaltyChoice::Choice2 => "choice2",
            PenaltyChoice::LandauSpectralRadius => "spectral-radius",
        };
        let _ = writeln!(s, "penalty = {p}");
        let _ = writeln!(s, "beta0 = {:?}", self.penalty.beta0);
        let _ = writeln!(s, "delta = {:?}", self.penalty.delta_rel);
        let _ = writeln!(s, "landau_predictor = {}", self.landau_predictor);
        let _ = writeln!(s, "cg_tol = {:?}", self.cg_tol);
        let _ = writeln!(s, "cg_max_iter = {}", self.cg_max_iter);
        let _ = writeln!(s, "\n[collision]");
        let _ = writeln!(s, "angles = {}", self.angles);
        if let Some(r) = self.radius {
            let _ = writeln!(s, "radius = {r:?}");
        }
        let _ = writeln!(s, "gamma = {:?}", self.gamma);
        let _ = writeln!(s, "tau = {:?}", self.tau);
        let _ = writeln!(s, "\n[plasma]");
        let field = match self.field {
            FieldLaw::Ampere => "ampere",
            FieldLaw::Poisson => "poisson",
        };
        let _ = writeln!(s, "field = {field}");
        let flux = match self.moment_flux {
            MomentFlux::Upwind => "upwind",
            MomentFlux::Centered => "centered",
        };
        let _ = writeln!(s, "moment_flux = {flux}");
        let _ = writeln!(s, "background = {:?}", self.background);
        s
    }
}

fn default_penalty(eq: Equation) -> &'static str {
    if eq == Equation::Landau {
        "spectral-radius"
    } else {
        "choice1"
    }
}

fn parse_list(v: &str) -> Option<Vec<f64>> {
    let mut out: Vec<f64> = v
        .split(',')
        .map(|t| t.trim().parse().ok())
        .collect::<Option<_>>()?;
    out.sort_by(f64::total_cmp);
    out.dedup();
    Some(out)
}

/// Command line overrides applied on top of a scenario.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub solver: Option<SolverKind>,
    pub eps: Option<f64>,
    pub order: Option<Order>,
    pub beta_choice: Option<PenaltyChoice>,
}

impl Scenario {
    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(s) = o.solver {
            if self.equation.is_plasma() {
                return Err(Error::config(
                    None,
                    Some("scenario.solver"),
                    format!(
                        "solver {} does not apply to {}",
                        s.name(),
                        self.equation.name()
                    ),
                ));
            }
            self.solver = Some(s);
        }
        if let Some(e) = o.eps {
            self.knudsen = Knudsen::Constant(e);
        }
        if let Some(k) = o.order {
            self.order = k;
        }
        if let Some(c) = o.beta_choice {
            self.penalty.choice = c;
        }
        self.validate()?;
        Ok(self)
    }
}
