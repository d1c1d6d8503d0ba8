//! Vlasov-Ampère and Vlasov-Ampère-Boltzmann schemes with an exactly conservative
//! moment system.
//!
//! The field acts on `v1` only. The kinetic step is
//! `f^{n+1} = f^n - Δt v1 ∂x f^n + Δt E^n ∂v1 f^n`, the field follows
//! `E^{n+1} = E^n + Δt (ρu)^n` and the moments are advanced with the same face
//! fluxes as `f`, so that mass and `Σ (E_kin + E²/2)` are conserved exactly.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::collision::{penalty, Collision};
use crate::error::{Error, Result};
use crate::grid::{
    BoundaryCondition, ConservedMoments, DistributionField, SpatialGrid, Stations, VelocityGrid,
};
use crate::micromacro::combine_split_fluxes;
use crate::reference::fj_cell_update;
use crate::spectral::Derivative1d;
use crate::transport::{upwind_flux, Order};

/// Relative tolerance on `mean(c - ρ)` accepted by the periodic Poisson solve.
pub const SOLVABILITY_TOL: f64 = 1e-8;

/// Tail mass at the velocity boundary above which a warning is logged.
pub const TAIL_WARN: f64 = 1e-6;

/// Solve `-φ'' = c - ρ` on the periodic grid with the 3-point stencil, gauge
/// `mean φ = 0` shifted so that `φ(x_L) = 0`, and `E = -φ'` by centered differences.
pub fn poisson_init(space: &SpatialGrid, rho: &[f64], c: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = space.n();
    if rho.len() != n || c.len() != n {
        return Err(Error::Shape {
            expected: n,
            found: rho.len().min(c.len()),
        });
    }
    if space.bc() != BoundaryCondition::Periodic {
        return Err(Error::InvalidParameter(
            "the Poisson solver needs a periodic grid".into(),
        ));
    }
    let mean = c.iter().zip(rho).map(|(c, r)| c - r).sum::<f64>() / n as f64;
    let scale = c.iter().chain(rho).map(|x| x.abs()).sum::<f64>() / n as f64;
    if mean.abs() > SOLVABILITY_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Solvability { residual: mean });
    }
    Ok(poisson_zero_mean(space, rho, c))
}

/// The Poisson solve with the mean of the source removed.
pub fn poisson_zero_mean(space: &SpatialGrid, rho: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = space.n();
    let dx = space.dx();
    let mean = c.iter().zip(rho).map(|(c, r)| c - r).sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = c
        .iter()
        .zip(rho)
        .map(|(c, r)| Complex64::new(c - r - mean, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, b) in buf.iter_mut().enumerate() {
        if k == 0 {
            *b = Complex64::new(0.0, 0.0);
        } else {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let lambda = (2.0 - 2.0 * theta.cos()) / (dx * dx);
            *b /= lambda * n as f64;
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let mut phi: Vec<f64> = buf.iter().map(|b| b.re).collect();
    let left = 0.5 * (phi[0] + phi[n - 1]);
    phi.iter_mut().for_each(|p| *p -= left);
    let e = (0..n)
        .map(|i| -(phi[(i + 1) % n] - phi[(i + n - 1) % n]) / (2.0 * dx))
        .collect();
    (phi, e)
}

/// Spectral `∂/∂v1` on the periodic extension of the velocity box.
#[derive(Debug, Clone)]
pub struct VelocityDerivative {
    vel: VelocityGrid,
    d: Derivative1d,
}

impl VelocityDerivative {
    pub fn new(vel: &VelocityGrid) -> Self {
        Self {
            vel: vel.clone(),
            d: Derivative1d::new(vel.n(), vel.extent()),
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let n = self.vel.n();
        let m = n + 1;
        let mut out = vec![0.0; f.len()];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        if self.vel.dim() == 1 {
            buf.iter_mut()
                .zip(f)
                .for_each(|(b, f)| *b = Complex64::new(*f, 0.0));
            self.d.apply(&mut buf);
            out.iter_mut().zip(&buf).for_each(|(o, b)| *o = b.re);
            out[n] = out[0];
            return out;
        }
        // two columns of constant v2 per transform
        let mut j2 = 0;
        while j2 < m {
            let k2 = (j2 + 1 < m).then_some(j2 + 1);
            for j1 in 0..n {
                let b = k2.map_or(0.0, |k| f[j1 * m + k]);
                buf[j1] = Complex64::new(f[j1 * m + j2], b);
            }
            self.d.apply(&mut buf);
            for j1 in 0..n {
                out[j1 * m + j2] = buf[j1].re;
                if let Some(k) = k2 {
                    out[j1 * m + k] = buf[j1].im;
                }
            }
            out[n * m + j2] = out[j2];
            if let Some(k) = k2 {
                out[n * m + k] = out[k];
            }
            j2 += 2;
        }
        out
    }
}

/// Face fluxes `v1 f` at faces `0 ..= n` of a periodic cell field.
fn face_fluxes(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    f: &DistributionField,
    order: Order,
) -> Vec<Vec<f64>> {
    let at = |i: isize| f.station(space.cell_index(i));
    (0..=space.n() as isize)
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
        .collect()
}

/// `f - Δt v1 ∂x f + Δt E ∂v1 f`.
pub fn vlasov_transport(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    deriv: &VelocityDerivative,
    f: &DistributionField,
    e: &[f64],
    dt: f64,
    order: Order,
) -> Result<DistributionField> {
    if e.len() != space.n() || f.count() != space.n() {
        return Err(Error::Shape {
            expected: space.n(),
            found: e.len(),
        });
    }
    let flux = face_fluxes(space, vel, f, order);
    let r = dt / space.dx();
    let rows = (0..space.n())
        .into_par_iter()
        .map(|i| {
            let fi = f.station(i);
            let dv = deriv.apply(fi);
            (0..fi.len())
                .map(|k| fi[k] - r * (flux[i + 1][k] - flux[i][k]) + dt * e[i] * dv[k])
                .collect()
        })
        .collect();
    DistributionField::from_stations(Stations::Centers, rows)
}

/// `E^{n+1} = E^n + Δt (ρu)^n`.
pub fn ampere_step(e: &[f64], mom: &[f64], dt: f64) -> Vec<f64> {
    e.iter().zip(mom).map(|(e, j)| e + dt * j).collect()
}

/// Face flux of the moment fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentFlux {
    /// Kinetic splitting `<v1^± m f>` with minmod slopes on the split fluxes.
    Upwind,
    /// Average of the neighbouring `<v1 m f>`.
    Centered,
}

fn split_kinetic_flux(vel: &VelocityGrid, f: &[f64]) -> (ConservedMoments, ConservedMoments) {
    let (v1, v2, w) = (vel.v1(), vel.v2(), vel.weights());
    let mut plus = ConservedMoments::zero();
    let mut minus = ConservedMoments::zero();
    for j in 0..f.len() {
        let a = v1[j];
        let c = w[j] * f[j] * a;
        let acc = if a > 0.0 { &mut plus } else { &mut minus };
        acc.rho += c;
        acc.mom[0] += a * c;
        acc.mom[1] += v2[j] * c;
        acc.energy += 0.5 * (a * a + v2[j] * v2[j]) * c;
    }
    (plus, minus)
}

/// Moment fluxes `<v1 m f>` at faces `0 ..= n`.
pub fn moment_fluxes(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    f: &DistributionField,
    order: Order,
    scheme: MomentFlux,
) -> Vec<ConservedMoments> {
    let n = space.n();
    let split: Vec<_> = (0..n)
        .map(|i| split_kinetic_flux(vel, f.station(i)))
        .collect();
    let at = |i: isize| split[space.cell_index(i)];
    (0..=n as isize)
        .map(|j| match scheme {
            MomentFlux::Centered => {
                let (a, b) = (at(j - 1), at(j));
                0.5 * ((a.0 + a.1) + (b.0 + b.1))
            }
            MomentFlux::Upwind => {
                let w = [at(j - 2), at(j - 1), at(j), at(j + 1)];
                combine_split_fluxes(w.map(|s| s.0), w.map(|s| s.1), order)
            }
        })
        .collect()
}

/// Advance `(ρ, ρu, E_kin)` with the moment fluxes of `f^n` and the field sources
/// `E^n ρ^n` and `(E^n + E^{n+1})/2 (ρu)^n`.
#[allow(clippy::too_many_arguments)]
pub fn moment_system_step(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    moments: &[ConservedMoments],
    f: &DistributionField,
    e: &[f64],
    e_next: &[f64],
    dt: f64,
    order: Order,
    scheme: MomentFlux,
) -> Result<Vec<ConservedMoments>> {
    let n = space.n();
    if moments.len() != n || e.len() != n || e_next.len() != n || f.count() != n {
        return Err(Error::Shape {
            expected: n,
            found: moments.len(),
        });
    }
    let fm = moment_fluxes(space, vel, f, order, scheme);
    let r = dt / space.dx();
    Ok((0..n)
        .map(|i| {
            let u = moments[i];
            let mut next = u + (-r) * (fm[i + 1] - fm[i]);
            next.mom[0] -= dt * e[i] * u.rho;
            next.energy -= dt * 0.5 * (e[i] + e_next[i]) * u.mom[0];
            next
        })
        .collect())
}

/// Penalized collisional kinetic step with the BGK penalty and `M^{n+1}` built
/// from the advanced moment fields.
#[allow(clippy::too_many_arguments)]
pub fn vab_collision_step(
    space: &SpatialGrid,
    collision: &Collision,
    deriv: &VelocityDerivative,
    f: &DistributionField,
    e: &[f64],
    moments_next: &[ConservedMoments],
    eps: f64,
    dt: f64,
    order: Order,
) -> Result<DistributionField> {
    let vel = collision.grid();
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Knudsen number must be positive, got {eps}"
        )));
    }
    let star = vlasov_transport(space, vel, deriv, f, e, dt, order)?;
    let rows = (0..space.n())
        .into_par_iter()
        .map(|i| {
            let fi = f.station(i);
            let (q, stiff) = collision.full_with_stiffness(fi)?;
            let m_now = vel.maxwellian(&vel.moments(fi)?.primitives(vel.dim())?)?;
            let m_next = vel.maxwellian(&moments_next[i].primitives(vel.dim())?)?;
            Ok(fj_cell_update(
                star.station(i),
                fi,
                &q,
                &m_now,
                &m_next,
                penalty::floor_beta(stiff),
                eps,
                dt,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    DistributionField::from_stations(Stations::Centers, rows)
}

/// `Σ_i (E_kin,i + E_i²/2) Δx`.
pub fn total_energy(space: &SpatialGrid, kinetic: impl IntoIterator<Item = f64>, e: &[f64]) -> f64 {
    kinetic
        .into_iter()
        .zip(e)
        .map(|(k, e)| k + 0.5 * e * e)
        .sum::<f64>()
        * space.dx()
}

pub fn total_energy_moments(space: &SpatialGrid, moments: &[ConservedMoments], e: &[f64]) -> f64 {
    total_energy(space, moments.iter().map(|m| m.energy), e)
}

pub fn total_energy_f(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    f: &DistributionField,
    e: &[f64],
) -> Result<f64> {
    let m = f.moments(vel)?;
    Ok(total_energy(space, m.iter().map(|m| m.energy), e))
}

/// How the field driving `f` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldLaw {
    Ampere,
    Poisson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlasmaState {
    pub f: DistributionField,
    pub e: Vec<f64>,
    /// Moment fields evolved by the moment system.
    pub moments: Vec<ConservedMoments>,
    pub background: Vec<f64>,
    pub t: f64,
}

impl PlasmaState {
    /// Sample `f` and `c`, take the moment fields from `f` and the initial field from Poisson.
    pub fn new(
        space: &SpatialGrid,
        vel: &VelocityGrid,
        f: impl Fn(f64) -> Vec<f64>,
        background: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let rows: Vec<Vec<f64>> = space.centers().into_iter().map(f).collect();
        for r in &rows {
            vel.check(r)?;
        }
        let f = DistributionField::from_stations(Stations::Centers, rows)?;
        let moments = f.moments(vel)?;
        let background: Vec<f64> = space.centers().into_iter().map(background).collect();
        let rho: Vec<f64> = moments.iter().map(|m| m.rho).collect();
        let (_, e) = poisson_init(space, &rho, &background)?;
        Ok(Self {
            f,
            e,
            moments,
            background,
            t: 0.0,
        })
    }
}

/// Totals of one plasma state along the three accounting paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlasmaDiagnostics {
    pub t: f64,
    pub me: ConservedMoments,
    pub mf: ConservedMoments,
    pub etotal_me_amp: f64,
    pub etotal_mf_amp: f64,
    pub etotal_mf_poiss: f64,
}

#[derive(Debug, Clone)]
pub struct PlasmaSolver {
    space: SpatialGrid,
    vel: VelocityGrid,
    deriv: VelocityDerivative,
    collision: Option<(Collision, f64)>,
    law: FieldLaw,
    order: Order,
    moment_flux: MomentFlux,
}

impl PlasmaSolver {
    /// Collisionless when `collision` is `None`; otherwise `(operator, ε)`.
    pub fn new(
        space: SpatialGrid,
        vel: VelocityGrid,
        collision: Option<(Collision, f64)>,
        law: FieldLaw,
        order: Order,
    ) -> Result<Self> {
        if space.bc() != BoundaryCondition::Periodic {
            return Err(Error::InvalidParameter(
                "plasma runs need periodic boundaries".into(),
            ));
        }
        if let Some((c, eps)) = &collision {
            if c.grid() != &vel {
                return Err(Error::Mismatch(
                    "collision operator and plasma velocity grids differ".into(),
                ));
            }
            if !(*eps > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "Knudsen number must be positive, got {eps}"
                )));
            }
        }
        Ok(Self {
            deriv: VelocityDerivative::new(&vel),
            space,
            vel,
            collision,
            law,
            order,
            moment_flux: MomentFlux::Upwind,
        })
    }

    pub fn with_moment_flux(mut self, scheme: MomentFlux) -> Self {
        self.moment_flux = scheme;
        self
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    pub fn velocity(&self) -> &VelocityGrid {
        &self.vel
    }

    pub fn step(&self, state: &mut PlasmaState, dt: f64) -> Result<()> {
        let t = state.t;
        let e_drive = match self.law {
            FieldLaw::Ampere => state.e.clone(),
            FieldLaw::Poisson => {
                let rho: Vec<f64> = state.f.moments(&self.vel)?.iter().map(|m| m.rho).collect();
                poisson_zero_mean(&self.space, &rho, &state.background).1
            }
        };
        let mom1: Vec<f64> = state.moments.iter().map(|m| m.mom[0]).collect();
        let e_next = ampere_step(&state.e, &mom1, dt);
        let moments_next = moment_system_step(
            &self.space,
            &self.vel,
            &state.moments,
            &state.f,
            &e_drive,
            &e_next,
            dt,
            self.order,
            self.moment_flux,
        )?;
        let f_next = match &self.collision {
            None => vlasov_transport(
                &self.space,
                &self.vel,
                &self.deriv,
                &state.f,
                &e_drive,
                dt,
                self.order,
            )?,
            Some((c, eps)) => vab_collision_step(
                &self.space,
                c,
                &self.deriv,
                &state.f,
                &e_drive,
                &moments_next,
                *eps,
                dt,
                self.order,
            )
            .map_err(|e| e.at_time(t))?,
        };
        if !f_next.is_finite() {
            return Err(Error::BlowUp {
                stage: "kinetic update".into(),
                time: t,
            });
        }
        state.f = f_next;
        state.moments = moments_next;
        state.e = match self.law {
            FieldLaw::Ampere => e_next,
            FieldLaw::Poisson => e_drive,
        };
        state.t += dt;
        Ok(())
    }

    /// Field consistent with the law after a step; under Poisson this re-solves from `ρ(f)`.
    pub fn current_field(&self, state: &PlasmaState) -> Result<Vec<f64>> {
        Ok(match self.law {
            FieldLaw::Ampere => state.e.clone(),
            FieldLaw::Poisson => {
                let rho: Vec<f64> = state.f.moments(&self.vel)?.iter().map(|m| m.rho).collect();
                poisson_zero_mean(&self.space, &rho, &state.background).1
            }
        })
    }

    pub fn diagnostics(&self, state: &PlasmaState) -> Result<PlasmaDiagnostics> {
        let mf_cells = state.f.moments(&self.vel)?;
        let dx = self.space.dx();
        let sum =
            |v: &[ConservedMoments]| dx * v.iter().fold(ConservedMoments::zero(), |a, b| a + *b);
        let rho_f: Vec<f64> = mf_cells.iter().map(|m| m.rho).collect();
        let (_, e_poiss) = poisson_zero_mean(&self.space, &rho_f, &state.background);
        let e = self.current_field(state)?;
        Ok(PlasmaDiagnostics {
            t: state.t,
            me: sum(&state.moments),
            mf: sum(&mf_cells),
            etotal_me_amp: total_energy_moments(&self.space, &state.moments, &e),
            etotal_mf_amp: total_energy(&self.space, mf_cells.iter().map(|m| m.energy), &e),
            etotal_mf_poiss: total_energy(&self.space, mf_cells.iter().map(|m| m.energy), &e_poiss),
        })
    }

    /// Largest fraction of a cell's mass sitting on the velocity boundary nodes.
    pub fn boundary_mass_fraction(&self, state: &PlasmaState) -> f64 {
        let n = self.vel.n();
        let m = n + 1;
        let w = self.vel.weights();
        let on_edge = |k: usize| {
            if self.vel.dim() == 1 {
                k == 0 || k == n
            } else {
                let (a, b) = (k / m, k % m);
                a == 0 || a == n || b == 0 || b == n
            }
        };
        state
            .f
            .iter_stations()
            .map(|f| {
                let total: f64 = f.iter().zip(w).map(|(f, w)| f.abs() * w).sum();
                let edge: f64 = (0..f.len())
                    .filter(|&k| on_edge(k))
                    .map(|k| f[k].abs() * w[k])
                    .sum();
                if total > 0.0 {
                    edge / total
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }

    /// Log a warning once if the support reaches the velocity boundary.
    pub fn warn_on_tail(&self, state: &PlasmaState, warned: &mut bool) {
        if !*warned {
            let frac = self.boundary_mass_fraction(state);
            if frac > TAIL_WARN {
                log::warn!("distribution reaches the velocity boundary (edge mass fraction {frac:e}) at t = {}", state.t);
                *warned = true;
            }
        }
    }
}
