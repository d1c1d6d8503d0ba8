use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kinap::collision::PenaltyChoice;
use kinap::harness::{self, Overrides, Scenario, SolverKind};
use kinap::transport::Order;
use kinap::Error;

#[derive(Parser)]
#[command(
    name = "kinap",
    version,
    about = "Micro-macro and penalty solvers for kinetic equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in preset.
    Run {
        /// Scenario file.
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// MM, FJ, JY, DS or EULER.
        #[arg(long)]
        solver: Option<String>,
        /// Constant Knudsen number.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: Option<u8>,
        #[arg(long = "beta-choice", value_parser = clap::value_parser!(u8).range(1..=2))]
        beta_choice: Option<u8>,
    },
    /// Compare the profile snapshots of two run directories.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also write the report as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List the built-in presets, or print one as a scenario file.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

fn load(config: Option<PathBuf>, preset: Option<String>) -> kinap::Result<Scenario> {
    match (config, preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            Scenario::parse(&text)
        }
        (None, Some(name)) => harness::preset(&name),
        _ => Err(Error::config(
            None,
            None,
            "give a scenario file or --preset NAME",
        )),
    }
}

fn execute(cli: Cli) -> kinap::Result<()> {
    match cli.command {
        Command::Run {
            config,
            preset,
            out,
            solver,
            eps,
            order,
            beta_choice,
        } => {
            let solver = solver
                .map(|s| {
                    SolverKind::parse(&s).ok_or_else(|| {
                        Error::config(None, Some("solver"), format!("unknown solver `{s}`"))
                    })
                })
                .transpose()?;
            let overrides = Overrides {
                solver,
                eps,
                order: order.map(|k| Order::from_usize(k as usize)).transpose()?,
                beta_choice: beta_choice.map(|k| {
                    if k == 1 {
                        PenaltyChoice::Choice1
                    } else {
                        PenaltyChoice::Choice2
                    }
                }),
            };
            let scenario = load(config, preset)?.apply(&overrides)?;
            log::info!("running {} into {}", scenario.name, out.display());
            match harness::run(&scenario) {
                Ok(result) => {
                    harness::write_outputs(&result, &out)?;
                    println!(
                        "{}: {} steps, outputs in {}",
                        scenario.name,
                        result.steps,
                        out.display()
                    );
                    Ok(())
                }
                Err((err, partial)) => {
                    if let Some(p) = partial {
                        harness::write_outputs(&p, &out)?;
                        eprintln!("partial outputs written to {}", out.display());
                    }
                    Err(err)
                }
            }
        }
        Command::Compare { a, b, csv } => {
            let report = harness::compare_dirs(&a, &b)?;
            print!("{report}");
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv()?)?;
            }
            Ok(())
        }
        Command::Presets { show } => {
            match show {
                Some(name) => print!("{}", harness::preset_text(&name)?),
                None => {
                    for name in harness::preset_names() {
                        let s = harness::preset(name)?;
                        let solver = s.solver.map_or("-", |k| k.name());
                        println!(
                            "{name:<10} {:<14} {solver:<5} t_end = {}",
                            s.equation.name(),
                            s.t_end
                        );
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let cat = e.category();
            eprintln!("kinap: {e} [{cat:?}]");
            ExitCode::from(cat.exit_code() as u8)
        }
    }
}
