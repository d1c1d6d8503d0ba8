//! Micro-macro asymptotic-preserving scheme on a staggered grid.
//!
//! The macroscopic moments live at the `n` cell centers and the micro part `g`
//! at the `n + 1` faces. Face `j` separates cells `j - 1` and `j`. Under periodic
//! boundary conditions face `n` is the same interface as face `0` and is kept
//! as a copy of it.

use rayon::prelude::*;

use crate::cg::CgOptions;
use crate::collision::{Collision, FpStencil, PenaltyParams};
use crate::error::{Error, Result};
use crate::grid::{
    BoundaryCondition, ConservedMoments, DistributionField, Primitives, SpatialGrid, Stations,
    VelocityGrid,
};
use crate::transport::{minmod, upwind_flux, Order};

/// Knudsen number sampled at cell centers and faces.
#[derive(Debug, Clone, PartialEq)]
pub struct KnudsenField {
    centers: Vec<f64>,
    faces: Vec<f64>,
}

impl KnudsenField {
    pub fn new(centers: Vec<f64>, faces: Vec<f64>) -> Result<Self> {
        if faces.len() != centers.len() + 1 {
            return Err(Error::Shape {
                expected: centers.len() + 1,
                found: faces.len(),
            });
        }
        if let Some(bad) = centers
            .iter()
            .chain(&faces)
            .find(|e| !(**e > 0.0) || !e.is_finite())
        {
            return Err(Error::InvalidParameter(format!(
                "Knudsen number must be positive and finite, got {bad}"
            )));
        }
        Ok(Self { centers, faces })
    }

    pub fn constant(space: &SpatialGrid, eps: f64) -> Result<Self> {
        Self::new(vec![eps; space.n()], vec![eps; space.n() + 1])
    }

    /// Sample `eps(x)`; with periodic boundaries the last face reuses the value of the first.
    pub fn from_fn(space: &SpatialGrid, eps: impl Fn(f64) -> f64) -> Result<Self> {
        let centers = space.centers().into_iter().map(&eps).collect();
        let mut faces: Vec<f64> = space.faces().into_iter().map(&eps).collect();
        if space.bc() == BoundaryCondition::Periodic {
            faces[space.n()] = faces[0];
        }
        Self::new(centers, faces)
    }

    pub fn center(&self, i: usize) -> f64 {
        self.centers[i]
    }

    pub fn face(&self, j: usize) -> f64 {
        self.faces[j]
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn faces(&self) -> &[f64] {
        &self.faces
    }

    pub fn is_uniform(&self) -> bool {
        let e = self.faces[0];
        self.faces.iter().all(|&x| x == e)
    }

    pub fn min(&self) -> f64 {
        self.centers
            .iter()
            .chain(&self.faces)
            .fold(f64::INFINITY, |m, &e| m.min(e))
    }
}

/// The orthogonal projection onto `span{M, vM, |v|^2 M}` in `L^2(M^{-1})` for a fixed
/// state, with the Gram matrix of the polynomial basis taken from the same quadrature
/// as the moments. `Π` is then idempotent and moment preserving to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    prim: Primitives,
    maxwellian: Vec<f64>,
    /// Inverse Gram matrix of `(1, v1 - u1, v2 - u2, |v-u|^2/(2T) - d/2)` (row-major, `k x k`).
    gram_inv: Vec<f64>,
    k: usize,
}

impl Projection {
    pub fn new(vel: &VelocityGrid, u: &ConservedMoments) -> Result<Self> {
        let prim = u.primitives(vel.dim())?;
        let maxwellian = vel.maxwellian(&prim)?;
        let k = vel.dim() + 2;
        let mut gram = vec![0.0; k * k];
        let mut p = [0.0; 4];
        for j in 0..maxwellian.len() {
            basis(vel, &prim, j, &mut p);
            let wm = vel.weights()[j] * maxwellian[j];
            for a in 0..k {
                for b in 0..k {
                    gram[a * k + b] += p[a] * p[b] * wm;
                }
            }
        }
        let gram_inv = invert(&gram, k).ok_or_else(|| {
            Error::Domain(format!(
                "projection Gram matrix is singular for rho = {}, T = {}",
                prim.rho, prim.t
            ))
        })?;
        Ok(Self {
            prim,
            maxwellian,
            gram_inv,
            k,
        })
    }

    pub fn primitives(&self) -> &Primitives {
        &self.prim
    }

    pub fn maxwellian(&self) -> &[f64] {
        &self.maxwellian
    }

    /// Replace `phi` by `(I - Π) phi`.
    pub fn complement_in_place(&self, vel: &VelocityGrid, phi: &mut [f64]) {
        let pi = self.apply(vel, phi);
        phi.iter_mut().zip(&pi).for_each(|(p, q)| *p -= q);
    }

    pub fn apply(&self, vel: &VelocityGrid, phi: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut b = [0.0; 4];
        let mut p = [0.0; 4];
        for j in 0..phi.len() {
            basis(vel, &self.prim, j, &mut p);
            let wp = vel.weights()[j] * phi[j];
            for a in 0..k {
                b[a] += p[a] * wp;
            }
        }
        let mut c = [0.0; 4];
        for a in 0..k {
            c[a] = (0..k).map(|l| self.gram_inv[a * k + l] * b[l]).sum();
        }
        (0..phi.len())
            .map(|j| {
                basis(vel, &self.prim, j, &mut p);
                (0..k).map(|a| c[a] * p[a]).sum::<f64>() * self.maxwellian[j]
            })
            .collect()
    }
}

fn basis(vel: &VelocityGrid, prim: &Primitives, j: usize, out: &mut [f64; 4]) {
    let d = vel.dim();
    let a = vel.v1()[j] - prim.u[0];
    let b = vel.v2()[j] - prim.u[1];
    let e = (a * a + b * b) / (2.0 * prim.t) - 0.5 * d as f64;
    out[0] = 1.0;
    out[1] = a;
    if d == 1 {
        out[2] = e;
    } else {
        out[2] = b;
        out[3] = e;
    }
}

/// Gauss-Jordan inverse with partial pivoting of a small dense matrix.
fn invert(m: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv: Vec<f64> = (0..k * k)
        .map(|i| if i / k == i % k { 1.0 } else { 0.0 })
        .collect();
    for col in 0..k {
        let piv =
            (col..k).max_by(|&x, &y| a[x * k + col].abs().total_cmp(&a[y * k + col].abs()))?;
        if !(a[piv * k + col].abs() > 0.0) {
            return None;
        }
        for c in 0..k {
            a.swap(col * k + c, piv * k + c);
            inv.swap(col * k + c, piv * k + c);
        }
        let s = 1.0 / a[col * k + col];
        for c in 0..k {
            a[col * k + c] *= s;
            inv[col * k + c] *= s;
        }
        for r in 0..k {
            if r != col {
                let f = a[r * k + col];
                for c in 0..k {
                    a[r * k + c] -= f * a[col * k + c];
                    inv[r * k + c] -= f * inv[col * k + c];
                }
            }
        }
    }
    Some(inv)
}

/// `Π_M(φ)` for the Maxwellian of `u`.
pub fn project(phi: &[f64], u: &ConservedMoments, vel: &VelocityGrid) -> Result<Vec<f64>> {
    vel.check(phi)?;
    Ok(Projection::new(vel, u)?.apply(vel, phi))
}

/// Data attached to one face: the projection built from the averaged state and
/// the interface Maxwellian `(M_l + M_r) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceContext {
    pub state: ConservedMoments,
    pub projection: Projection,
    pub maxwellian: Vec<f64>,
}

impl InterfaceContext {
    pub fn from_parts(
        vel: &VelocityGrid,
        u_left: &ConservedMoments,
        u_right: &ConservedMoments,
        m_left: &[f64],
        m_right: &[f64],
    ) -> Result<Self> {
        let state = 0.5 * (*u_left + *u_right);
        let projection = Projection::new(vel, &state)?;
        let maxwellian = m_left
            .iter()
            .zip(m_right)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        Ok(Self {
            state,
            projection,
            maxwellian,
        })
    }
}

pub fn pi_interface(
    vel: &VelocityGrid,
    u_left: &ConservedMoments,
    u_right: &ConservedMoments,
) -> Result<InterfaceContext> {
    let ml = vel.maxwellian(&u_left.primitives(vel.dim())?)?;
    let mr = vel.maxwellian(&u_right.primitives(vel.dim())?)?;
    InterfaceContext::from_parts(vel, u_left, u_right, &ml, &mr)
}

/// Storage index of a possibly ghost face.
pub fn face_index(space: &SpatialGrid, j: isize) -> usize {
    let n = space.n() as isize;
    match space.bc() {
        BoundaryCondition::Periodic => j.rem_euclid(n) as usize,
        BoundaryCondition::FreeFlow => j.clamp(0, n) as usize,
    }
}

/// Faces advanced by the micro step; the rest are boundary copies.
pub fn active_faces(space: &SpatialGrid) -> usize {
    match space.bc() {
        BoundaryCondition::Periodic => space.n(),
        BoundaryCondition::FreeFlow => space.n() + 1,
    }
}

/// Staggered unknowns of the micro-macro scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroMacroState {
    pub u: Vec<ConservedMoments>,
    pub g: DistributionField,
    pub t: f64,
    pub eps: KnudsenField,
}

impl MicroMacroState {
    /// Local equilibrium data: `g = 0`.
    pub fn equilibrium(
        space: &SpatialGrid,
        vel: &VelocityGrid,
        prim: impl Fn(f64) -> Primitives,
        eps: KnudsenField,
    ) -> Result<Self> {
        let u = space
            .centers()
            .into_iter()
            .map(|x| prim(x).to_conserved(vel.dim()))
            .collect();
        Ok(Self {
            u,
            g: DistributionField::zeros(Stations::Interfaces, space.n() + 1, vel.len()),
            t: 0.0,
            eps,
        })
    }

    /// Decompose `f(x)` as `U = <m f>` at centers and `g = (I - Π) f / ε` at faces.
    pub fn from_distribution(
        space: &SpatialGrid,
        vel: &VelocityGrid,
        f: impl Fn(f64) -> Vec<f64>,
        eps: KnudsenField,
    ) -> Result<Self> {
        let u = space
            .centers()
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                vel.moments(&f(x))
                    .and_then(|m| m.primitives(vel.dim()).map(|_| m))
                    .map_err(|e| e.at_cell(i))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut g = DistributionField::zeros(Stations::Interfaces, space.n() + 1, vel.len());
        for j in 0..active_faces(space) {
            let left = &u[space.cell_index(j as isize - 1)];
            let right = &u[space.cell_index(j as isize)];
            let proj = Projection::new(vel, &(0.5 * (*left + *right)))?;
            let mut fj = f(space.face(j));
            vel.check(&fj)?;
            proj.complement_in_place(vel, &mut fj);
            let e = eps.face(j);
            g.station_mut(j)
                .iter_mut()
                .zip(&fj)
                .for_each(|(g, f)| *g = f / e);
        }
        let mut state = Self { u, g, t: 0.0, eps };
        state.sync_periodic_face(space);
        Ok(state)
    }

    fn sync_periodic_face(&mut self, space: &SpatialGrid) {
        if space.bc() == BoundaryCondition::Periodic {
            let first = self.g.station(0).to_vec();
            self.g.station_mut(space.n()).copy_from_slice(&first);
        }
    }

    /// `Σ_i U_i`.
    pub fn total(&self) -> ConservedMoments {
        self.u.iter().fold(ConservedMoments::zero(), |a, b| a + *b)
    }

    /// Cell values of `f = M + ε g`, with `ε g` averaged from the two faces.
    pub fn reconstruct_f(&self, vel: &VelocityGrid) -> Result<DistributionField> {
        let mut f = DistributionField::zeros(Stations::Centers, self.u.len(), vel.len());
        for (i, u) in self.u.iter().enumerate() {
            let (el, er) = (self.eps.face(i), self.eps.face(i + 1));
            let (gl, gr) = (self.g.station(i), self.g.station(i + 1));
            let out = f.station_mut(i);
            vel.maxwellian_into(&u.primitives(vel.dim()).map_err(|e| e.at_cell(i))?, out)?;
            for k in 0..out.len() {
                out[k] += 0.5 * (el * gl[k] + er * gr[k]);
            }
        }
        Ok(f)
    }
}

/// Copies of the state extended by two ghost cells and two ghost faces on each side.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostedState {
    /// Cells `-2 ..= n + 1`.
    pub u: Vec<ConservedMoments>,
    /// Faces `-2 ..= n + 2`.
    pub g: DistributionField,
}

impl GhostedState {
    pub fn cell(&self, i: isize) -> &ConservedMoments {
        &self.u[(i + 2) as usize]
    }

    pub fn face(&self, j: isize) -> &[f64] {
        self.g.station((j + 2) as usize)
    }
}

pub fn apply_bc(space: &SpatialGrid, state: &MicroMacroState) -> GhostedState {
    let n = space.n() as isize;
    let u = (-2..=n + 1).map(|i| state.u[space.cell_index(i)]).collect();
    let rows = (-2..=n + 2)
        .map(|j| state.g.station(face_index(space, j)).to_vec())
        .collect();
    GhostedState {
        u,
        g: DistributionField::from_stations(Stations::Interfaces, rows)
            .expect("rows share one length"),
    }
}

/// `(I - Π)(v1 ∂x g)` at every active face, first-order upwind or MUSCL.
pub fn transport_micro(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    g: &DistributionField,
    contexts: &[InterfaceContext],
    order: Order,
) -> Result<DistributionField> {
    if g.count() != space.n() + 1 || g.nv() != vel.len() {
        return Err(Error::Shape {
            expected: (space.n() + 1) * vel.len(),
            found: g.as_slice().len(),
        });
    }
    let rows = contexts
        .par_iter()
        .enumerate()
        .map(|(j, ctx)| transport_at(space, vel, g, ctx, j, order))
        .collect::<Vec<_>>();
    DistributionField::from_stations(Stations::Interfaces, rows)
}

fn transport_at(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    g: &DistributionField,
    ctx: &InterfaceContext,
    j: usize,
    order: Order,
) -> Vec<f64> {
    let at = |k: isize| g.station(face_index(space, j as isize + k));
    let v = vel.v1();
    let mut right = vec![0.0; v.len()];
    let mut left = vec![0.0; v.len()];
    upwind_flux(v, [at(-1), at(0), at(1), at(2)], order, &mut right);
    upwind_flux(v, [at(-2), at(-1), at(0), at(1)], order, &mut left);
    let inv = 1.0 / space.dx();
    let mut out: Vec<f64> = right
        .iter()
        .zip(&left)
        .map(|(r, l)| (r - l) * inv)
        .collect();
    ctx.projection.complement_in_place(vel, &mut out);
    out
}

/// Half-range fluxes `F±(U) = <v1± m M(U)>` by quadrature on the grid Maxwellian.
pub fn split_flux(
    vel: &VelocityGrid,
    u: &ConservedMoments,
) -> Result<(ConservedMoments, ConservedMoments)> {
    let m = vel.maxwellian(&u.primitives(vel.dim())?)?;
    let (v1, v2, w) = (vel.v1(), vel.v2(), vel.weights());
    let mut plus = ConservedMoments::zero();
    let mut minus = ConservedMoments::zero();
    for j in 0..m.len() {
        let a = v1[j];
        let c = w[j] * m[j] * a;
        let add = |acc: &mut ConservedMoments| {
            acc.rho += c;
            acc.mom[0] += a * c;
            acc.mom[1] += v2[j] * c;
            acc.energy += 0.5 * (a * a + v2[j] * v2[j]) * c;
        };
        if a > 0.0 {
            add(&mut plus);
        } else if a < 0.0 {
            add(&mut minus);
        }
    }
    Ok((plus, minus))
}

fn minmod_moments(a: ConservedMoments, b: ConservedMoments) -> ConservedMoments {
    let (a, b) = (a.to_array(), b.to_array());
    ConservedMoments::from_array(std::array::from_fn(|k| minmod(a[k], b[k])))
}

/// Split flux between `window[1]` and `window[2]` from the half-range fluxes of four
/// consecutive cells (only the middle two are used at first order).
pub fn combine_split_fluxes(
    plus: [ConservedMoments; 4],
    minus: [ConservedMoments; 4],
    order: Order,
) -> ConservedMoments {
    let mut f = plus[1] + minus[2];
    if order == Order::Second {
        f += 0.5 * minmod_moments(plus[2] - plus[1], plus[1] - plus[0]);
        f += -0.5 * minmod_moments(minus[3] - minus[2], minus[2] - minus[1]);
    }
    f
}

/// Numerical flux between the middle two states of a window of four cells.
pub fn macro_flux(
    vel: &VelocityGrid,
    window: &[ConservedMoments; 4],
    order: Order,
) -> Result<ConservedMoments> {
    let mut plus = [ConservedMoments::zero(); 4];
    let mut minus = [ConservedMoments::zero(); 4];
    for (k, u) in window.iter().enumerate() {
        if order == Order::First && (k == 0 || k == 3) {
            continue;
        }
        (plus[k], minus[k]) = split_flux(vel, u)?;
    }
    Ok(combine_split_fluxes(plus, minus, order))
}

/// Fluxes at faces `0 ..= n`.
pub fn macro_fluxes(
    space: &SpatialGrid,
    vel: &VelocityGrid,
    u: &[ConservedMoments],
    order: Order,
) -> Result<Vec<ConservedMoments>> {
    let split = u
        .par_iter()
        .enumerate()
        .map(|(i, u)| split_flux(vel, u).map_err(|e| e.at_cell(i)))
        .collect::<Result<Vec<_>>>()?;
    let n = space.n() as isize;
    Ok((0..=n)
        .map(|j| {
            let idx = |k: isize| space.cell_index(j + k);
            let plus = [-2, -1, 0, 1].map(|k| split[idx(k)].0);
            let minus = [-2, -1, 0, 1].map(|k| split[idx(k)].1);
            combine_split_fluxes(plus, minus, order)
        })
        .collect())
}

/// Scheme options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroMacroConfig {
    pub macro_order: Order,
    pub micro_order: Order,
    pub penalty: PenaltyParams,
    pub cg: CgOptions,
    /// Landau only: build `M^{n+1}` for the implicit penalty from a provisional macro step.
    pub landau_predictor: bool,
}

impl Default for MicroMacroConfig {
    fn default() -> Self {
        Self {
            macro_order: Order::Second,
            micro_order: Order::Second,
            penalty: PenaltyParams::default(),
            cg: CgOptions::default(),
            landau_predictor: false,
        }
    }
}

/// Work counters of one micro step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MicroStats {
    pub linear_solves: usize,
    pub cg_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct MicroMacroSolver {
    space: SpatialGrid,
    collision: Collision,
    config: MicroMacroConfig,
}

impl MicroMacroSolver {
    pub fn new(space: SpatialGrid, collision: Collision, config: MicroMacroConfig) -> Result<Self> {
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

    pub fn config(&self) -> &MicroMacroConfig {
        &self.config
    }

    pub fn check_state(&self, state: &MicroMacroState) -> Result<()> {
        let n = self.space.n();
        if state.u.len() != n {
            return Err(Error::Shape {
                expected: n,
                found: state.u.len(),
            });
        }
        if state.g.count() != n + 1 || state.g.nv() != self.velocity().len() {
            return Err(Error::Shape {
                expected: (n + 1) * self.velocity().len(),
                found: state.g.as_slice().len(),
            });
        }
        if state.eps.centers().len() != n {
            return Err(Error::Shape {
                expected: n,
                found: state.eps.centers().len(),
            });
        }
        Ok(())
    }

    pub fn cell_maxwellians(&self, u: &[ConservedMoments]) -> Result<Vec<Vec<f64>>> {
        let vel = self.velocity();
        u.par_iter()
            .enumerate()
            .map(|(i, u)| {
                u.primitives(vel.dim())
                    .and_then(|p| vel.maxwellian(&p))
                    .map_err(|e| e.at_cell(i))
            })
            .collect()
    }

    pub fn contexts(
        &self,
        u: &[ConservedMoments],
        cell_m: &[Vec<f64>],
    ) -> Result<Vec<InterfaceContext>> {
        let vel = self.velocity();
        (0..active_faces(&self.space))
            .into_par_iter()
            .map(|j| {
                let l = self.space.cell_index(j as isize - 1);
                let r = self.space.cell_index(j as isize);
                InterfaceContext::from_parts(vel, &u[l], &u[r], &cell_m[l], &cell_m[r])
                    .map_err(|e| e.at_cell(j))
            })
            .collect()
    }

    /// `(I - Π_j)(v1 (M_j - M_{j-1}) / Δx)`.
    fn maxwellian_gradient(
        &self,
        ctx: &InterfaceContext,
        cell_m: &[Vec<f64>],
        j: usize,
    ) -> Vec<f64> {
        let vel = self.velocity();
        let l = &cell_m[self.space.cell_index(j as isize - 1)];
        let r = &cell_m[self.space.cell_index(j as isize)];
        let inv = 1.0 / self.space.dx();
        let mut out: Vec<f64> = (0..l.len())
            .map(|k| vel.v1()[k] * (r[k] - l[k]) * inv)
            .collect();
        ctx.projection.complement_in_place(vel, &mut out);
        out
    }

    /// `(I - Π) v ∂x g`, taken as `ε⁻¹ (I - Π) v ∂x (ε g)` when ε varies so that the
    /// transported quantity `f - M` stays continuous across jumps of ε.
    fn micro_transport(
        &self,
        state: &MicroMacroState,
        ctx: &[InterfaceContext],
    ) -> Result<DistributionField> {
        let (vel, order) = (self.velocity(), self.config.micro_order);
        if state.eps.is_uniform() {
            return transport_micro(&self.space, vel, &state.g, ctx, order);
        }
        let mut h = state.g.clone();
        for (j, &e) in state.eps.faces().iter().enumerate() {
            h.station_mut(j).iter_mut().for_each(|x| *x *= e);
        }
        let mut out = transport_micro(&self.space, vel, &h, ctx, order)?;
        for j in 0..out.count() {
            let e = state.eps.face(j);
            out.station_mut(j).iter_mut().for_each(|x| *x /= e);
        }
        Ok(out)
    }

    /// Advance `g` by one step with the scalar-denominator update (Boltzmann and BGK).
    pub fn micro_step_boltzmann(
        &self,
        state: &MicroMacroState,
        dt: f64,
    ) -> Result<(DistributionField, MicroStats)> {
        if self.collision.is_landau() {
            return Err(Error::InvalidParameter(
                "explicit micro update needs a Boltzmann or BGK operator".into(),
            ));
        }
        self.check_state(state)?;
        let cell_m = self.cell_maxwellians(&state.u)?;
        let ctx = self.contexts(&state.u, &cell_m)?;
        let transport = self.micro_transport(state, &ctx)?;
        let rows = (0..ctx.len())
            .into_par_iter()
            .map(|j| {
                let g = state.g.station(j);
                let eps = state.eps.face(j);
                let terms =
                    self.collision
                        .micro_terms(&ctx[j].maxwellian, g, &self.config.penalty)?;
                let dm = self.maxwellian_gradient(&ctx[j], &cell_m, j);
                let beta = 0.5 * (terms.beta.0 + terms.beta.1);
                let c = dt / eps;
                let denom = 1.0 + c * beta;
                let tr = transport.station(j);
                Ok((0..g.len())
                    .map(|k| {
                        let stiff = terms.linear[k] + beta * g[k] - dm[k];
                        (g[k] - dt * tr[k] + dt * terms.q_gg[k] + c * stiff) / denom
                    })
                    .collect())
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok((self.assemble(rows)?, MicroStats::default()))
    }

    /// Advance `g` with the Fokker-Planck penalty, one CG solve per face.
    pub fn micro_step_landau(
        &self,
        state: &MicroMacroState,
        dt: f64,
    ) -> Result<(DistributionField, MicroStats)> {
        if !self.collision.is_landau() {
            return Err(Error::InvalidParameter(
                "Fokker-Planck penalized update needs the Landau operator".into(),
            ));
        }
        self.check_state(state)?;
        let vel = self.velocity();
        let cell_m = self.cell_maxwellians(&state.u)?;
        let ctx = self.contexts(&state.u, &cell_m)?;
        let transport = self.micro_transport(state, &ctx)?;
        let next_m = if self.config.landau_predictor {
            let u_star = self.macro_step(state, &state.g, dt)?;
            let cm = self.cell_maxwellians(&u_star)?;
            Some(
                (0..ctx.len())
                    .map(|j| {
                        let l = &cm[self.space.cell_index(j as isize - 1)];
                        let r = &cm[self.space.cell_index(j as isize)];
                        l.iter()
                            .zip(r)
                            .map(|(a, b)| 0.5 * (a + b))
                            .collect::<Vec<f64>>()
                    })
                    .collect::<Vec<_>>(),
            )
        } else {
            None
        };
        let solved = (0..ctx.len())
            .into_par_iter()
            .map(|j| {
                let g = state.g.station(j);
                let c = dt / state.eps.face(j);
                let terms =
                    self.collision
                        .micro_terms(&ctx[j].maxwellian, g, &self.config.penalty)?;
                let beta = 0.5 * (terms.beta.0 + terms.beta.1);
                let dm = self.maxwellian_gradient(&ctx[j], &cell_m, j);
                let now = FpStencil::new(vel, &ctx[j].maxwellian).map_err(|e| e.at_cell(j))?;
                let h: Vec<f64> = g.iter().zip(now.sqrt_m()).map(|(g, s)| g / s).collect();
                let mut ph = vec![0.0; g.len()];
                now.apply(&h, &mut ph);
                let tr = transport.station(j);
                let rhs: Vec<f64> = (0..g.len())
                    .map(|k| {
                        let stiff = terms.linear[k] - beta * now.sqrt_m()[k] * ph[k] - dm[k];
                        g[k] - dt * tr[k] + dt * terms.q_gg[k] + c * stiff
                    })
                    .collect();
                let next = match &next_m {
                    Some(m) => FpStencil::new(vel, &m[j]).map_err(|e| e.at_cell(j))?,
                    None => now,
                };
                let b: Vec<f64> = rhs.iter().zip(next.sqrt_m()).map(|(r, s)| r / s).collect();
                let sol = next.solve_shifted(c * beta, &b, self.config.cg)?;
                let out: Vec<f64> = sol
                    .x
                    .iter()
                    .zip(next.sqrt_m())
                    .map(|(x, s)| x * s)
                    .collect();
                Ok((out, sol.iterations))
            })
            .collect::<Result<Vec<(Vec<f64>, usize)>>>()?;
        let stats = MicroStats {
            linear_solves: solved.len(),
            cg_iterations: solved.iter().map(|s| s.1).sum(),
        };
        let rows = solved.into_iter().map(|s| s.0).collect();
        Ok((self.assemble(rows)?, stats))
    }

    fn assemble(&self, mut rows: Vec<Vec<f64>>) -> Result<DistributionField> {
        if self.space.bc() == BoundaryCondition::Periodic {
            rows.push(rows[0].clone());
        }
        DistributionField::from_stations(Stations::Interfaces, rows)
    }

    pub fn micro_step(
        &self,
        state: &MicroMacroState,
        dt: f64,
    ) -> Result<(DistributionField, MicroStats)> {
        if self.collision.is_landau() {
            self.micro_step_landau(state, dt)
        } else {
            self.micro_step_boltzmann(state, dt)
        }
    }

    /// Conservative update of the cell moments with face values `g_new`.
    pub fn macro_step(
        &self,
        state: &MicroMacroState,
        g_new: &DistributionField,
        dt: f64,
    ) -> Result<Vec<ConservedMoments>> {
        let vel = self.velocity();
        let flux = macro_fluxes(&self.space, vel, &state.u, self.config.macro_order)?;
        let micro = (0..=self.space.n())
            .into_par_iter()
            .map(|j| Ok(state.eps.face(j) * vel.flux_moments(g_new.station(j))?))
            .collect::<Result<Vec<_>>>()?;
        let r = dt / self.space.dx();
        state
            .u
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let du = (flux[i + 1] - flux[i]) + (micro[i + 1] - micro[i]);
                let next = *u + (-r) * du;
                next.primitives(vel.dim()).map_err(|e| e.at_cell(i))?;
                Ok(next)
            })
            .collect()
    }

    /// One full step: micro update, then macro update with the new `g`.
    pub fn step(&self, state: &mut MicroMacroState, dt: f64) -> Result<MicroStats> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let t = state.t;
        let (g_new, stats) = self.micro_step(state, dt).map_err(|e| e.at_time(t))?;
        if !g_new.is_finite() {
            return Err(Error::BlowUp {
                stage: "micro update".into(),
                time: t,
            });
        }
        let u_new = self
            .macro_step(state, &g_new, dt)
            .map_err(|e| e.at_time(t))?;
        state.g = g_new;
        state.u = u_new;
        state.t += dt;
        Ok(stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::{BoltzmannKernel, BoltzmannOperator};

    fn vel() -> VelocityGrid {
        VelocityGrid::new(2, 6.0, 16).unwrap()
    }

    #[test]
    fn projection_fixes_maxwellian_and_is_idempotent() {
        let v = vel();
        let u = Primitives::new(1.1, [0.2, -0.1], 0.9).to_conserved(2);
        let m = v.maxwellian(&u.primitives(2).unwrap()).unwrap();
        let pm = project(&m, &u, &v).unwrap();
        assert!(pm.iter().zip(&m).all(|(a, b)| (a - b).abs() < 1e-10));
        let phi: Vec<f64> = (0..v.len())
            .map(|k| (k as f64 * 0.37).sin() * m[k])
            .collect();
        let p1 = project(&phi, &u, &v).unwrap();
        let p2 = project(&p1, &u, &v).unwrap();
        assert!(p1.iter().zip(&p2).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn face_index_maps() {
        let p = SpatialGrid::new(10, 0.0, 1.0, BoundaryCondition::Periodic).unwrap();
        assert_eq!(face_index(&p, -1), 9);
        assert_eq!(face_index(&p, 10), 0);
        assert_eq!(face_index(&p, 11), 1);
        let f = SpatialGrid::new(10, 0.0, 1.0, BoundaryCondition::FreeFlow).unwrap();
        assert_eq!(face_index(&f, -1), 0);
        assert_eq!(face_index(&f, 11), 10);
    }

    #[test]
    fn split_flux_sums_to_full_flux() {
        let v = vel();
        let u = Primitives::new(0.7, [0.3, 0.1], 1.2).to_conserved(2);
        let (p, m) = split_flux(&v, &u).unwrap();
        let full = v
            .flux_moments(&v.maxwellian(&u.primitives(2).unwrap()).unwrap())
            .unwrap();
        let s = (p + m - full).max_abs();
        assert!(s < 1e-14, "{s}");
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let v = vel();
        let space = SpatialGrid::new(8, 0.0, 1.0, BoundaryCondition::Periodic).unwrap();
        let op = BoltzmannOperator::new(&v, BoltzmannKernel::default()).unwrap();
        let solver = MicroMacroSolver::new(
            space.clone(),
            Collision::Boltzmann(op),
            MicroMacroConfig::default(),
        )
        .unwrap();
        let eps = KnudsenField::constant(&space, 1e-2).unwrap();
        let mut st = MicroMacroState::equilibrium(
            &space,
            &v,
            |_| Primitives::new(1.0, [0.1, 0.0], 1.0),
            eps,
        )
        .unwrap();
        let u0 = st.u.clone();
        for _ in 0..3 {
            solver.step(&mut st, 1e-3).unwrap();
        }
        for (a, b) in st.u.iter().zip(&u0) {
            assert!((*a - *b).max_abs() < 1e-12);
        }
        assert_eq!(st.g.max_abs(), 0.0);
    }

    #[test]
    fn transport_sees_eps_g_across_a_jump() {
        let v = vel();
        let space = SpatialGrid::new(8, 0.0, 1.0, BoundaryCondition::Periodic).unwrap();
        let op = BoltzmannOperator::new(&v, BoltzmannKernel::default()).unwrap();
        let solver = MicroMacroSolver::new(
            space.clone(),
            Collision::Boltzmann(op),
            MicroMacroConfig::default(),
        )
        .unwrap();
        let faces: Vec<f64> = (0..=8)
            .map(|j| if (2..6).contains(&j) { 1.0 } else { 0.01 })
            .collect();
        let eps = KnudsenField::new(vec![0.5; 8], faces.clone()).unwrap();
        let mut st = MicroMacroState::equilibrium(
            &space,
            &v,
            |_| Primitives::new(1.0, [0.2, 0.0], 1.1),
            eps,
        )
        .unwrap();
        let u = st.u[0];
        let mut phi: Vec<f64> = (0..v.len()).map(|k| (k as f64 * 0.37).sin()).collect();
        Projection::new(&v, &u)
            .unwrap()
            .complement_in_place(&v, &mut phi);
        for (j, e) in faces.iter().enumerate() {
            st.g.station_mut(j)
                .iter_mut()
                .zip(&phi)
                .for_each(|(g, p)| *g = p / e);
        }
        let cm = solver.cell_maxwellians(&st.u).unwrap();
        let ctx = solver.contexts(&st.u, &cm).unwrap();
        let t = solver.micro_transport(&st, &ctx).unwrap();
        assert!(t.max_abs() < 1e-10, "{}", t.max_abs());
    }
}
