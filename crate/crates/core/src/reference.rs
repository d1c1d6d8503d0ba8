//! Reference solvers on the full distribution: explicit RK4 (DS), penalized AP
//! schemes (FJ with a BGK penalty, JY with a Fokker-Planck penalty) and the
//! kinetic-flux Euler scheme.

use rayon::prelude::*;

use crate::cg::CgOptions;
use crate::collision::{penalty, Collision, FpStencil, PenaltyParams};
use crate::error::{Error, Result};
use crate::grid::{ConservedMoments, DistributionField, SpatialGrid, Stations, VelocityGrid};
use crate::micromacro::{macro_fluxes, KnudsenField};
use crate::transport::{upwind_flux, Order};

/// The distribution at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub f: DistributionField,
    pub t: f64,
    pub eps: KnudsenField,
}

impl KineticState {
    pub fn from_fn(
        space: &SpatialGrid,
        vel: &VelocityGrid,
        f: impl Fn(f64) -> Vec<f64>,
        eps: KnudsenField,
    ) -> Result<Self> {
        let rows: Vec<Vec<f64>> = space.centers().into_iter().map(f).collect();
        for r in &rows {
            vel.check(r)?;
        }
        Ok(Self {
            f: DistributionField::from_stations(Stations::Centers, rows)?,
            t: 0.0,
            eps,
        })
    }

    pub fn moments(&self, vel: &VelocityGrid) -> Result<Vec<ConservedMoments>> {
        self.f.moments(vel)
    }

    /// `Σ_i <m f_i>`.
    pub fn total(&self, vel: &VelocityGrid) -> Result<ConservedMoments> {
        Ok(self
            .moments(vel)?
            .into_iter()
            .fold(ConservedMoments::zero(), |a, b| a + b))
    }
}

/// `-v1 ∂x f` by conservative upwind differences of cell values.
pub fn transport_rhs(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    f: &DistributionField,
    order: Order,
) -> DistributionField {
    let n = space.n() as isize;
    let at = |i: isize| f.station(space.cell_index(i));
    let fluxes: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|j| {
            let mut out = vec![0.0; vel.len()];
            upwind_flux(
                vel.v1(),
                [at(j - 2), at(j - 1), at(j), at(j + 1)],
                order,
                &mut out,
            );
            out
        })
        .collect();
    let inv = 1.0 / space.dx();
    let rows = (0..space.n())
        .map(|i| {
            fluxes[i]
                .iter()
                .zip(&fluxes[i + 1])
                .map(|(l, r)| -(r - l) * inv)
                .collect()
        })
        .collect();
    DistributionField::from_stations(Stations::Centers, rows).expect("rows share one length")
}

/// Solver options shared by the reference schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticConfig {
    pub order: Order,
    pub penalty: PenaltyParams,
    pub cg: CgOptions,
}

impl Default for KineticConfig {
    fn default() -> Self {
        Self {
            order: Order::Second,
            penalty: PenaltyParams::default(),
            cg: CgOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KineticSolver {
    space: SpatialGrid,
    collision: Collision,
    config: KineticConfig,
}

impl KineticSolver {
    pub fn new(space: SpatialGrid, collision: Collision, config: KineticConfig) -> Result<Self> {
        config.penalty.validate()?;
        Ok(Self {
            space,
            collision,
            config,
        })
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    pub fn velocity(&self) -> &VelocityGrid {
        self.collision.grid()
    }

    pub fn collision(&self) -> &Collision {
        &self.collision
    }

    /// `-v1 ∂x f + Q(f,f)/ε` per cell.
    pub fn kinetic_rhs(
        &self,
        f: &DistributionField,
        eps: &KnudsenField,
    ) -> Result<DistributionField> {
        let mut rhs = transport_rhs(&self.space, self.velocity(), f, self.config.order);
        let q = (0..self.space.n())
            .into_par_iter()
            .map(|i| self.collision.full(f.station(i)).map_err(|e| e.at_cell(i)))
            .collect::<Result<Vec<_>>>()?;
        for (i, q) in q.iter().enumerate() {
            let inv = 1.0 / eps.center(i);
            rhs.station_mut(i)
                .iter_mut()
                .zip(q)
                .for_each(|(r, q)| *r += q * inv);
        }
        Ok(rhs)
    }

    /// Largest collision stiffness `max_i λ_i / ε_i` of the current state; for the
    /// Landau operator `λ` is the spectral radius of `D(f)` times the largest
    /// eigenvalue of the spectral Laplacian.
    pub fn stiffness(&self, state: &KineticState) -> Result<f64> {
        let vel = self.velocity();
        let lap = vel.dim() as f64 * (std::f64::consts::PI / vel.dv()).powi(2);
        (0..self.space.n())
            .into_par_iter()
            .map(|i| {
                let (_, s) = self.collision.full_with_stiffness(state.f.station(i))?;
                let s = if self.collision.is_landau() {
                    s * lap
                } else {
                    s
                };
                Ok(s / state.eps.center(i))
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    }

    /// A resolving step for DS: the smaller of `base`, `min ε / 4` and a margin
    /// inside the RK4 stability interval of the collision term.
    pub fn ds_time_step(&self, state: &KineticState, base: f64) -> Result<f64> {
        let stiff = self.stiffness(state)?;
        let mut dt = base.min(0.25 * state.eps.min());
        if stiff > 0.0 {
            dt = dt.min(1.4 / stiff);
        }
        Ok(dt)
    }

    /// Classical RK4.
    pub fn ds_step(&self, state: &mut KineticState, dt: f64) -> Result<()> {
        let t = state.t;
        let stage = |f: &DistributionField, name: &str| -> Result<DistributionField> {
            let k = self.kinetic_rhs(f, &state.eps).map_err(|e| e.at_time(t))?;
            if !k.is_finite() {
                return Err(Error::BlowUp {
                    stage: format!("RK4 {name}"),
                    time: t,
                });
            }
            Ok(k)
        };
        let axpy = |a: f64, k: &DistributionField| {
            let mut out = state.f.clone();
            out.as_mut_slice()
                .iter_mut()
                .zip(k.as_slice())
                .for_each(|(o, k)| *o += a * k);
            out
        };
        let k1 = stage(&state.f, "stage 1")?;
        let k2 = stage(&axpy(0.5 * dt, &k1), "stage 2")?;
        let k3 = stage(&axpy(0.5 * dt, &k2), "stage 3")?;
        let k4 = stage(&axpy(dt, &k3), "stage 4")?;
        let c = dt / 6.0;
        let f = state.f.as_mut_slice();
        for i in 0..f.len() {
            f[i] += c
                * (k1.as_slice()[i]
                    + 2.0 * k2.as_slice()[i]
                    + 2.0 * k3.as_slice()[i]
                    + k4.as_slice()[i]);
        }
        if !state.f.is_finite() {
            return Err(Error::BlowUp {
                stage: "RK4 combination".into(),
                time: t,
            });
        }
        state.t += dt;
        Ok(())
    }

    /// Explicitly transported cells `f - Δt v1 ∂x f` and their Maxwellians.
    fn transported(
        &self,
        state: &KineticState,
        dt: f64,
    ) -> Result<(DistributionField, Vec<Vec<f64>>)> {
        let vel = self.velocity();
        let tr = transport_rhs(&self.space, vel, &state.f, self.config.order);
        let mut star = state.f.clone();
        star.as_mut_slice()
            .iter_mut()
            .zip(tr.as_slice())
            .for_each(|(s, t)| *s += dt * t);
        let m_next = (0..self.space.n())
            .into_par_iter()
            .map(|i| {
                let u = vel.moments(star.station(i))?;
                vel.maxwellian(&u.primitives(vel.dim())?)
                    .map_err(|e| e.at_cell(i))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.at_time(state.t))?;
        Ok((star, m_next))
    }

    /// Filbet-Jin step with the BGK penalty `β(M - f)`; `β` is the largest loss
    /// frequency of `f^n` over all cells (`1/τ` for BGK).
    pub fn fj_step(&self, state: &mut KineticState, dt: f64) -> Result<()> {
        if self.collision.is_landau() {
            return Err(Error::InvalidParameter(
                "BGK-penalized scheme needs a Boltzmann or BGK operator".into(),
            ));
        }
        let vel = self.velocity();
        let (star, m_next) = self.transported(state, dt)?;
        let local = (0..self.space.n())
            .into_par_iter()
            .map(|i| {
                let f = state.f.station(i);
                let (q, stiff) = self.collision.full_with_stiffness(f)?;
                let m_now = vel.maxwellian(&vel.moments(f)?.primitives(vel.dim())?)?;
                Ok((q, stiff, m_now))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e: Error| e.at_time(state.t))?;
        let beta = local.iter().map(|l| l.1).fold(0.0, f64::max);
        let rows = local
            .into_par_iter()
            .enumerate()
            .map(|(i, (q, _, m_now))| {
                fj_cell_update(
                    star.station(i),
                    state.f.station(i),
                    &q,
                    &m_now,
                    &m_next[i],
                    beta,
                    state.eps.center(i),
                    dt,
                )
            })
            .collect();
        self.finish(state, rows, dt, "penalized update")
    }

    /// Jin-Yan step with the Fokker-Planck penalty; `β = β₀ max λ(D(f^n))` per cell.
    pub fn jy_step(&self, state: &mut KineticState, dt: f64) -> Result<()> {
        let Collision::Landau(op) = &self.collision else {
            return Err(Error::InvalidParameter(
                "Fokker-Planck penalized scheme needs the Landau operator".into(),
            ));
        };
        let vel = self.velocity();
        let (star, m_next) = self.transported(state, dt)?;
        let rows = (0..self.space.n())
            .into_par_iter()
            .map(|i| {
                let f = state.f.station(i);
                let (q, coef) = op.quadratic_with_coefficients(f)?;
                let beta =
                    penalty::floor_beta(self.config.penalty.beta0 * coef.max_spectral_radius());
                let m_now = vel.maxwellian(&vel.moments(f)?.primitives(vel.dim())?)?;
                jy_cell_update(
                    vel,
                    star.station(i),
                    f,
                    &q,
                    &m_now,
                    &m_next[i],
                    beta,
                    state.eps.center(i),
                    dt,
                    self.config.cg,
                )
                .map_err(|e| e.at_cell(i))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.at_time(state.t))?;
        self.finish(state, rows, dt, "penalized update")
    }

    fn finish(
        &self,
        state: &mut KineticState,
        rows: Vec<Vec<f64>>,
        dt: f64,
        stage: &str,
    ) -> Result<()> {
        let f = DistributionField::from_stations(Stations::Centers, rows)?;
        if !f.is_finite() {
            return Err(Error::BlowUp {
                stage: stage.into(),
                time: state.t,
            });
        }
        state.f = f;
        state.t += dt;
        Ok(())
    }
}

/// `f^{n+1} = ε/(ε+βΔt) f* + Δt (Q(f) - β(M^n - f))/(ε+βΔt) + βΔt/(ε+βΔt) M^{n+1}`,
/// where `f*` already contains the explicit transport.
#[allow(clippy::too_many_arguments)]
pub fn fj_cell_update(
    f_star: &[f64],
    f: &[f64],
    q: &[f64],
    m_now: &[f64],
    m_next: &[f64],
    beta: f64,
    eps: f64,
    dt: f64,
) -> Vec<f64> {
    let denom = eps + beta * dt;
    (0..f.len())
        .map(|k| {
            let p = beta * (m_now[k] - f[k]);
            (eps * f_star[k] + dt * (q[k] - p) + beta * dt * m_next[k]) / denom
        })
        .collect()
}

/// Solve `(I - (βΔt/ε) P^{n+1}) f^{n+1} = f* + (Δt/ε)(Q(f) - β P^n f)` for the
/// Fokker-Planck penalty, writing `f^{n+1} = M^{n+1} + √M^{n+1} x`.
#[allow(clippy::too_many_arguments)]
pub fn jy_cell_update(
    vel: &VelocityGrid,
    f_star: &[f64],
    f: &[f64],
    q: &[f64],
    m_now: &[f64],
    m_next: &[f64],
    beta: f64,
    eps: f64,
    dt: f64,
    cg: CgOptions,
) -> Result<Vec<f64>> {
    let c = dt / eps;
    let pf = penalty::fp_penalty(vel, f, m_now)?;
    let next = FpStencil::new(vel, m_next)?;
    let b: Vec<f64> = (0..f.len())
        .map(|k| (f_star[k] + c * (q[k] - beta * pf[k]) - m_next[k]) / next.sqrt_m()[k])
        .collect();
    let sol = next.solve_shifted(c * beta, &b, cg)?;
    Ok((0..f.len())
        .map(|k| m_next[k] + next.sqrt_m()[k] * sol.x[k])
        .collect())
}

/// `U^{n+1} = U^n - Δt (F_{i+1/2} - F_{i-1/2}) / Δx` with the kinetic split flux.
pub fn euler_step(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    u: &[ConservedMoments],
    dt: f64,
    order: Order,
) -> Result<Vec<ConservedMoments>> {
    if u.len() != space.n() {
        return Err(Error::Shape {
            expected: space.n(),
            found: u.len(),
        });
    }
    let flux = macro_fluxes(space, vel, u, order)?;
    let r = dt / space.dx();
    u.iter()
        .enumerate()
        .map(|(i, u)| {
            let next = *u + (-r) * (flux[i + 1] - flux[i]);
            next.primitives(vel.dim()).map_err(|e| e.at_cell(i))?;
            Ok(next)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryCondition, Primitives};

    #[test]
    fn transport_of_constant_vanishes() {
        let vel = VelocityGrid::new(1, 4.0, 8).unwrap();
        let space = SpatialGrid::new(6, 0.0, 1.0, BoundaryCondition::Periodic).unwrap();
        let f = DistributionField::from_stations(Stations::Centers, vec![vec![0.3; 9]; 6]).unwrap();
        let r = transport_rhs(&space, &vel, &f, Order::Second);
        assert!(r.as_slice().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn uniform_euler_state_is_unchanged() {
        let vel = VelocityGrid::new(2, 6.0, 16).unwrap();
        let space = SpatialGrid::new(8, 0.0, 1.0, BoundaryCondition::FreeFlow).unwrap();
        let u = vec![Primitives::new(1.0, [0.2, 0.0], 1.0).to_conserved(2); 8];
        let next = euler_step(&space, &vel, &u, 1e-3, Order::Second).unwrap();
        assert_eq!(next, u);
    }

    #[test]
    fn fj_reduces_to_explicit_for_large_eps() {
        let f = [1.0, 2.0];
        let star = [1.1, 1.9];
        let q = [0.5, -0.5];
        let m = [1.5, 1.5];
        let out = fj_cell_update(&star, &f, &q, &m, &m, 0.0, 1.0, 0.1);
        assert!((out[0] - (1.1 + 0.05)).abs() < 1e-15);
        assert!((out[1] - (1.9 - 0.05)).abs() < 1e-15);
    }
}
