use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Equation, Initial, Scenario, SolverKind};
use crate::cg::CgOptions;
use crate::collision::{
    BoltzmannKernel, BoltzmannOperator, Collision, LandauKernel, LandauOperator,
};
use crate::error::{Error, Result};
use crate::grid::{ConservedMoments, DistributionField, Primitives, SpatialGrid, VelocityGrid};
use crate::micromacro::{KnudsenField, MicroMacroConfig, MicroMacroSolver, MicroMacroState};
use crate::reference::{euler_step, KineticConfig, KineticSolver, KineticState};
use crate::vlasov::{PlasmaSolver, PlasmaState};

/// Macroscopic fields at the cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub t: f64,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub temp: Vec<f64>,
    pub e_field: Option<Vec<f64>>,
}

impl Profile {
    fn from_moments(
        t: f64,
        x: Vec<f64>,
        u: &[ConservedMoments],
        dim: usize,
        e: Option<Vec<f64>>,
    ) -> Result<Self> {
        let prims = u
            .iter()
            .enumerate()
            .map(|(i, u)| u.primitives(dim).map_err(|e| e.at_cell(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            t,
            x,
            rho: prims.iter().map(|p| p.rho).collect(),
            u1: prims.iter().map(|p| p.u[0]).collect(),
            u2: prims.iter().map(|p| p.u[1]).collect(),
            temp: prims.iter().map(|p| p.t).collect(),
            e_field: e,
        })
    }

    /// `(name, values)` of every column after `x`.
    pub fn fields(&self) -> Vec<(&'static str, &[f64])> {
        let mut out = vec![
            ("rho", self.rho.as_slice()),
            ("u1", self.u1.as_slice()),
            ("u2", self.u2.as_slice()),
            ("T", self.temp.as_slice()),
        ];
        if let Some(e) = &self.e_field {
            out.push(("E_field", e.as_slice()));
        }
        out
    }
}

/// Totals `Σ_i U_i Δx` along the moment path and from `f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub me: ConservedMoments,
    pub mf: ConservedMoments,
    /// `(ME-Amp, Mf-Amp, Mf-Poiss)` total energies of plasma runs.
    pub plasma_energy: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub scenario: Scenario,
    pub profiles: Vec<Profile>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub steps: usize,
}

enum Runner {
    MicroMacro(MicroMacroSolver, MicroMacroState),
    Kinetic(KineticSolver, KineticState, SolverKind),
    Euler {
        space: SpatialGrid,
        vel: VelocityGrid,
        u: Vec<ConservedMoments>,
        t: f64,
    },
    Plasma(PlasmaSolver, PlasmaState, bool),
}

fn collision(s: &Scenario, vel: &VelocityGrid) -> Result<Collision> {
    Ok(match s.equation {
        Equation::Boltzmann | Equation::Vab => Collision::Boltzmann(BoltzmannOperator::new(
            vel,
            BoltzmannKernel {
                lambda: 0.0,
                radius: s.radius,
                angles: s.angles,
            },
        )?),
        Equation::Landau => {
            Collision::Landau(LandauOperator::new(vel, LandauKernel { gamma: s.gamma })?)
        }
        Equation::Bgk | Equation::VlasovAmpere => Collision::Bgk {
            grid: vel.clone(),
            tau: s.tau,
        },
    })
}

/// `f⁰(x)` on the velocity grid.
pub(crate) fn initial_distribution(init: &Initial, vel: &VelocityGrid, x: f64) -> Result<Vec<f64>> {
    match *init {
        Initial::DoublePeak { omega, u1 } => {
            let rho = (2.0 + (omega * x).sin()) / 3.0;
            let t = (3.0 + (omega * x).cos()) / 4.0;
            let a = vel.maxwellian(&Primitives::new(0.5 * rho, [u1, 0.0], t))?;
            let b = vel.maxwellian(&Primitives::new(0.5 * rho, [-u1, 0.0], t))?;
            Ok(a.iter().zip(&b).map(|(a, b)| a + b).collect())
        }
        Initial::Riemann { left, right, x0 } => vel.maxwellian(if x < x0 { &left } else { &right }),
        Initial::Uniform(p) => vel.maxwellian(&p),
        Initial::Plasma {
            amplitude,
            wavenumber,
        } => {
            let m = vel.maxwellian(&Primitives::new(1.0, [0.0, 0.0], 1.0))?;
            let a = 1.0 + amplitude * (wavenumber * x).cos();
            Ok(m.into_iter().map(|m| a * m).collect())
        }
    }
}

fn initial_primitives(init: &Initial, x: f64) -> Primitives {
    match *init {
        Initial::Riemann { left, right, x0 } => {
            if x < x0 {
                left
            } else {
                right
            }
        }
        Initial::Uniform(p) => p,
        _ => unreachable!("only equilibrium data has primitives"),
    }
}

fn sample(init: &Initial, vel: &VelocityGrid, x: f64) -> Vec<f64> {
    initial_distribution(init, vel, x).expect("initial data checked at every center and face")
}

impl Runner {
    fn new(s: &Scenario) -> Result<Self> {
        let space = SpatialGrid::new(s.nx, s.x_min, s.x_max, s.bc)?;
        let vel = VelocityGrid::new(s.dim, s.lv, s.nv)?;
        let cg = CgOptions {
            tol: s.cg_tol,
            max_iter: s.cg_max_iter,
        };
        let eps = KnudsenField::from_fn(&space, |x| s.knudsen.at(x))?;
        for x in space.centers().into_iter().chain(space.faces()) {
            initial_distribution(&s.initial, &vel, x)?;
        }
        if s.equation.is_plasma() {
            let coll = if s.equation == Equation::Vab {
                let e = match s.knudsen {
                    super::Knudsen::Constant(e) => e,
                    super::Knudsen::Tanh { .. } => unreachable!("rejected by validation"),
                };
                Some((collision(s, &vel)?, e))
            } else {
                None
            };
            let state = PlasmaState::new(
                &space,
                &vel,
                |x| sample(&s.initial, &vel, x),
                |_| s.background,
            )?;
            let solver = PlasmaSolver::new(space, vel, coll, s.field, s.order)?
                .with_moment_flux(s.moment_flux);
            return Ok(Runner::Plasma(solver, state, false));
        }
        let solver = s.solver.unwrap_or(SolverKind::MicroMacro);
        Ok(match solver {
            SolverKind::MicroMacro => {
                let state = if s.initial.is_equilibrium() {
                    MicroMacroState::equilibrium(
                        &space,
                        &vel,
                        |x| initial_primitives(&s.initial, x),
                        eps,
                    )?
                } else {
                    MicroMacroState::from_distribution(
                        &space,
                        &vel,
                        |x| sample(&s.initial, &vel, x),
                        eps,
                    )?
                };
                let config = MicroMacroConfig {
                    macro_order: s.order,
                    micro_order: s.order,
                    penalty: s.penalty,
                    cg,
                    landau_predictor: s.landau_predictor,
                };
                let solver = MicroMacroSolver::new(space, collision(s, &vel)?, config)?;
                solver.check_state(&state)?;
                Runner::MicroMacro(solver, state)
            }
            SolverKind::Euler => {
                let u = space
                    .centers()
                    .into_iter()
                    .map(|x| vel.moments(&sample(&s.initial, &vel, x)))
                    .collect::<Result<Vec<_>>>()?;
                Runner::Euler {
                    space,
                    vel,
                    u,
                    t: 0.0,
                }
            }
            kind => {
                let state =
                    KineticState::from_fn(&space, &vel, |x| sample(&s.initial, &vel, x), eps)?;
                let config = KineticConfig {
                    order: s.order,
                    penalty: s.penalty,
                    cg,
                };
                Runner::Kinetic(
                    KineticSolver::new(space, collision(s, &vel)?, config)?,
                    state,
                    kind,
                )
            }
        })
    }

    fn time(&self) -> f64 {
        match self {
            Runner::MicroMacro(_, st) => st.t,
            Runner::Kinetic(_, st, _) => st.t,
            Runner::Euler { t, .. } => *t,
            Runner::Plasma(_, st, _) => st.t,
        }
    }

    fn set_time(&mut self, t: f64) {
        match self {
            Runner::MicroMacro(_, st) => st.t = t,
            Runner::Kinetic(_, st, _) => st.t = t,
            Runner::Euler { t: tt, .. } => *tt = t,
            Runner::Plasma(_, st, _) => st.t = t,
        }
    }

    /// Largest admissible step no larger than `base`.
    fn step_size(&self, base: f64) -> Result<f64> {
        match self {
            Runner::Kinetic(solver, st, SolverKind::Direct) => solver.ds_time_step(st, base),
            _ => Ok(base),
        }
    }

    fn step(&mut self, dt: f64, order: crate::transport::Order) -> Result<()> {
        match self {
            Runner::MicroMacro(solver, st) => solver.step(st, dt).map(|_| ()),
            Runner::Kinetic(solver, st, kind) => match kind {
                SolverKind::Direct => solver.ds_step(st, dt),
                SolverKind::FilbetJin => solver.fj_step(st, dt),
                SolverKind::JinYan => solver.jy_step(st, dt),
                _ => unreachable!("kinetic runner holds a kinetic solver"),
            },
            Runner::Euler { space, vel, u, t } => {
                *u = euler_step(space, vel, u, dt, order).map_err(|e| e.at_time(*t))?;
                *t += dt;
                Ok(())
            }
            Runner::Plasma(solver, st, warned) => {
                solver.step(st, dt)?;
                solver.warn_on_tail(st, warned);
                Ok(())
            }
        }
    }

    fn profile(&self) -> Result<Profile> {
        let t = self.time();
        match self {
            Runner::MicroMacro(solver, st) => Profile::from_moments(
                t,
                solver.space().centers(),
                &st.u,
                solver.velocity().dim(),
                None,
            ),
            Runner::Kinetic(solver, st, _) => Profile::from_moments(
                t,
                solver.space().centers(),
                &st.moments(solver.velocity())?,
                solver.velocity().dim(),
                None,
            ),
            Runner::Euler { space, vel, u, .. } => {
                Profile::from_moments(t, space.centers(), u, vel.dim(), None)
            }
            Runner::Plasma(solver, st, _) => Profile::from_moments(
                t,
                solver.space().centers(),
                &st.moments,
                solver.velocity().dim(),
                Some(solver.current_field(st)?),
            ),
        }
    }

    fn diagnostics(&self) -> Result<DiagnosticsRecord> {
        let t = self.time();
        let sum =
            |dx: f64, f: &DistributionField, vel: &VelocityGrid| -> Result<ConservedMoments> {
                Ok(dx
                    * f.moments(vel)?
                        .into_iter()
                        .fold(ConservedMoments::zero(), |a, b| a + b))
            };
        Ok(match self {
            Runner::MicroMacro(solver, st) => {
                let dx = solver.space().dx();
                let f = st.reconstruct_f(solver.velocity())?;
                DiagnosticsRecord {
                    t,
                    me: dx * st.total(),
                    mf: sum(dx, &f, solver.velocity())?,
                    plasma_energy: None,
                }
            }
            Runner::Kinetic(solver, st, _) => {
                let m = sum(solver.space().dx(), &st.f, solver.velocity())?;
                DiagnosticsRecord {
                    t,
                    me: m,
                    mf: m,
                    plasma_energy: None,
                }
            }
            Runner::Euler { space, u, .. } => {
                let m = space.dx() * u.iter().fold(ConservedMoments::zero(), |a, b| a + *b);
                DiagnosticsRecord {
                    t,
                    me: m,
                    mf: m,
                    plasma_energy: None,
                }
            }
            Runner::Plasma(solver, st, _) => {
                let d = solver.diagnostics(st)?;
                DiagnosticsRecord {
                    t,
                    me: d.me,
                    mf: d.mf,
                    plasma_energy: Some([d.etotal_me_amp, d.etotal_mf_amp, d.etotal_mf_poiss]),
                }
            }
        })
    }
}

/// Relative tolerance for landing on a target time.
const TIME_TOL: f64 = 1e-10;

/// March the scenario to its end time, recording profiles at the snapshot times
/// and diagnostics every `diag_every` steps.
///
/// On failure the outputs gathered so far are returned alongside the error.
pub fn run(s: &Scenario) -> std::result::Result<RunOutput, (Error, Option<RunOutput>)> {
    let mut runner = Runner::new(s).map_err(|e| (e, None))?;
    let mut out = RunOutput {
        scenario: s.clone(),
        profiles: Vec::new(),
        diagnostics: Vec::new(),
        steps: 0,
    };
    macro_rules! attempt {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(e) => return Err((e, Some(out))),
            }
        };
    }
    out.diagnostics.push(attempt!(runner.diagnostics()));
    let base = s.base_dt();
    let mut targets = s.snapshots.clone();
    if targets
        .last()
        .map_or(true, |&t| t < s.t_end * (1.0 - TIME_TOL))
    {
        targets.push(s.t_end);
    }
    let snapshot = |t: f64| {
        s.snapshots
            .iter()
            .any(|&x| (x - t).abs() <= TIME_TOL * x.max(1.0))
    };
    for target in targets {
        loop {
            let t = runner.time();
            let remaining = target - t;
            if remaining <= TIME_TOL * target.max(1.0) {
                break;
            }
            let mut dt = attempt!(runner.step_size(base));
            let landing = dt >= remaining * (1.0 - 1e-9);
            if landing {
                dt = remaining;
            }
            attempt!(runner.step(dt, s.order));
            if landing {
                runner.set_time(target);
            }
            out.steps += 1;
            if out.steps % s.diag_every == 0 && !landing {
                out.diagnostics.push(attempt!(runner.diagnostics()));
            }
        }
        out.diagnostics.push(attempt!(runner.diagnostics()));
        if snapshot(target) {
            out.profiles.push(attempt!(runner.profile()));
        }
        log::info!("reached t = {target} after {} steps", out.steps);
    }
    Ok(out)
}

fn time_label(t: f64) -> String {
    format!("{t}")
}

/// Write `profiles_<t>.csv`, `diagnostics.csv` and `run.meta` into `dir`.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    for p in &out.profiles {
        let mut w = csv::Writer::from_path(dir.join(format!("profiles_{}.csv", time_label(p.t))))?;
        let fields = p.fields();
        let mut header = vec!["x"];
        header.extend(fields.iter().map(|(n, _)| *n));
        w.write_record(&header)?;
        for i in 0..p.x.len() {
            let mut row = vec![format!("{:e}", p.x[i])];
            row.extend(fields.iter().map(|(_, v)| format!("{:e}", v[i])));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    let plasma = out
        .diagnostics
        .first()
        .is_some_and(|d| d.plasma_energy.is_some());
    let mut w = csv::Writer::from_path(dir.join("diagnostics.csv"))?;
    let mut header = vec![
        "t",
        "mass_me",
        "mom1_me",
        "energy_me",
        "mass_mf",
        "mom1_mf",
        "energy_mf",
    ];
    if plasma {
        header.extend(["etotal_me_amp", "etotal_mf_amp", "etotal_mf_poiss"]);
    }
    w.write_record(&header)?;
    for d in &out.diagnostics {
        let mut row: Vec<f64> = vec![
            d.t,
            d.me.rho,
            d.me.mom[0],
            d.me.energy,
            d.mf.rho,
            d.mf.mom[0],
            d.mf.energy,
        ];
        if let Some(e) = d.plasma_energy {
            row.extend(e);
        }
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    let mut meta = fs::File::create(dir.join("run.meta"))?;
    meta.write_all(out.scenario.to_config().as_bytes())?;
    writeln!(meta, "\n# steps = {}", out.steps)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(text: &str) -> Scenario {
        Scenario::parse(text).unwrap()
    }

    #[test]
    fn euler_run_lands_on_snapshots() {
        let s = small(
            "[scenario]\nequation = bgk\nsolver = EULER\n[grid]\nnx = 16\ndim = 1\nnv = 16\n[time]\nt_end = 0.05\nsnapshots = 0.02, 0.05\ndiag_every = 3\n",
        );
        let out = run(&s).unwrap();
        assert_eq!(out.profiles.len(), 2);
        assert!((out.profiles[0].t - 0.02).abs() < 1e-15);
        assert_eq!(out.diagnostics.first().unwrap().t, 0.0);
        assert!(out.diagnostics.windows(2).all(|w| w[1].t > w[0].t));
        let (a, b) = (out.diagnostics[0].me, out.diagnostics.last().unwrap().me);
        assert!((a - b).max_abs() < 1e-13);
    }

    #[test]
    fn bgk_micro_macro_run_is_deterministic() {
        let s = small("[scenario]\nequation = bgk\n[grid]\nnx = 12\ndim = 1\nnv = 16\n[time]\nt_end = 0.01\n[knudsen]\neps = 0.1\n");
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn outputs_are_written() {
        let s = small("[scenario]\nequation = vlasov-ampere\n[grid]\nnx = 16\nx_max = 3.141592653589793\nnv = 16\nlv = 6.283185307179586\n[time]\nt_end = 0.01\n");
        let out = run(&s).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_outputs(&out, dir.path()).unwrap();
        let diag = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
        assert!(diag.starts_with("t,mass_me,mom1_me,energy_me,mass_mf,mom1_mf,energy_mf,etotal_me_amp,etotal_mf_amp,etotal_mf_poiss"));
        let prof = fs::read_to_string(dir.path().join("profiles_0.01.csv")).unwrap();
        assert!(prof.starts_with("x,rho,u1,u2,T,E_field"));
        let meta = fs::read_to_string(dir.path().join("run.meta")).unwrap();
        assert!(meta.contains("equation = vlasov-ampere"));
    }
}
