//! Velocity and spatial grids, trapezoid quadrature, moments and Maxwellians.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Sub};

use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// Densities below this are treated as vacuum.
pub const VACUUM_RHO: f64 = 1e-12;

/// Uniform tensor velocity lattice on `[-L, L]^d` with `N_v + 1` nodes per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    dim: usize,
    extent: f64,
    n: usize,
    dv: f64,
    axis: Vec<f64>,
    v1: Vec<f64>,
    v2: Vec<f64>,
    weights: Vec<f64>,
}

impl VelocityGrid {
    pub fn new(dim: usize, extent: f64, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !(extent > 0.0 && extent.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "velocity extent must be positive, got {extent}"
            )));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "velocity cells per axis must be even and >= 2, got {n}"
            )));
        }
        let dv = 2.0 * extent / n as f64;
        let axis: Vec<f64> = (0..=n)
            .map(|j| {
                // symmetric construction so that v_j = -v_{n-j} bit for bit
                let k = j as f64 - n as f64 / 2.0;
                k * dv
            })
            .collect();
        let w1: Vec<f64> = (0..=n)
            .map(|j| if j == 0 || j == n { 0.5 } else { 1.0 })
            .collect();
        let (v1, v2, weights) = if dim == 1 {
            (
                axis.clone(),
                vec![0.0; n + 1],
                w1.iter().map(|w| w * dv).collect(),
            )
        } else {
            let m = n + 1;
            let mut v1 = Vec::with_capacity(m * m);
            let mut v2 = Vec::with_capacity(m * m);
            let mut w = Vec::with_capacity(m * m);
            for j1 in 0..m {
                for j2 in 0..m {
                    v1.push(axis[j1]);
                    v2.push(axis[j2]);
                    w.push(w1[j1] * w1[j2] * dv * dv);
                }
            }
            (v1, v2, w)
        };
        Ok(Self {
            dim,
            extent,
            n,
            dv,
            axis,
            v1,
            v2,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Number of velocity cells per axis (`N_v`).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.n + 1
    }

    /// Total number of nodes in the tensor grid.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    /// First velocity component at every node.
    pub fn v1(&self) -> &[f64] {
        &self.v1
    }

    /// Second velocity component at every node (zero when `d = 1`).
    pub fn v2(&self) -> &[f64] {
        &self.v2
    }

    /// Quadrature weights `w_j Δv^d`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn velocity(&self, idx: usize) -> [f64; 2] {
        [self.v1[idx], self.v2[idx]]
    }

    pub fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                found: f.len(),
            });
        }
        Ok(())
    }

    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        self.check(f)?;
        Ok(f.iter().zip(&self.weights).map(|(a, w)| a * w).sum())
    }

    /// `<m f>` with `m = (1, v, |v|^2/2)`.
    pub fn moments(&self, f: &[f64]) -> Result<ConservedMoments> {
        self.check(f)?;
        let mut u = ConservedMoments::zero();
        for (j, &fj) in f.iter().enumerate() {
            let wf = fj * self.weights[j];
            let (a, b) = (self.v1[j], self.v2[j]);
            u.rho += wf;
            u.mom[0] += a * wf;
            u.mom[1] += b * wf;
            u.energy += 0.5 * (a * a + b * b) * wf;
        }
        Ok(u)
    }

    /// `<v1 m f>`, the x-flux of the conserved moments carried by `f`.
    pub fn flux_moments(&self, f: &[f64]) -> Result<ConservedMoments> {
        self.check(f)?;
        let mut u = ConservedMoments::zero();
        for (j, &fj) in f.iter().enumerate() {
            let (a, b) = (self.v1[j], self.v2[j]);
            let wf = fj * self.weights[j] * a;
            u.rho += wf;
            u.mom[0] += a * wf;
            u.mom[1] += b * wf;
            u.energy += 0.5 * (a * a + b * b) * wf;
        }
        Ok(u)
    }

    pub fn maxwellian(&self, p: &Primitives) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.maxwellian_into(p, &mut out)?;
        Ok(out)
    }

    pub fn maxwellian_into(&self, p: &Primitives, out: &mut [f64]) -> Result<()> {
        self.check(out)?;
        if !(p.rho > 0.0) || !(p.t > 0.0) || !p.rho.is_finite() || !p.t.is_finite() {
            return Err(Error::Domain(format!(
                "Maxwellian needs rho > 0 and T > 0, got rho = {}, T = {}",
                p.rho, p.t
            )));
        }
        let d = self.dim as f64;
        let c = p.rho / (2.0 * PI * p.t).powf(0.5 * d);
        let inv = 0.5 / p.t;
        for (j, o) in out.iter_mut().enumerate() {
            let a = self.v1[j] - p.u[0];
            let b = self.v2[j] - p.u[1];
            *o = c * (-(a * a + b * b) * inv).exp();
        }
        Ok(())
    }

    /// Analytic mass of the Maxwellian lying outside the velocity box.
    pub fn tail_mass(&self, p: &Primitives) -> f64 {
        let s = (2.0 * p.t).sqrt();
        let l = self.extent;
        let inside: f64 = (0..self.dim)
            .map(|a| 0.5 * (erf((l - p.u[a]) / s) - erf((-l - p.u[a]) / s)))
            .product();
        p.rho * (1.0 - inside).max(0.0)
    }
}

/// `U = (rho, rho u, E)`; the second momentum component is zero for `d = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedMoments {
    pub rho: f64,
    pub mom: [f64; 2],
    pub energy: f64,
}

impl ConservedMoments {
    pub fn new(rho: f64, mom: [f64; 2], energy: f64) -> Self {
        Self { rho, mom, energy }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.rho, self.mom[0], self.mom[1], self.energy]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], [a[1], a[2]], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn primitives(&self, dim: usize) -> Result<Primitives> {
        primitives(self, dim)
    }
}

impl Add for ConservedMoments {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(
            self.rho + o.rho,
            [self.mom[0] + o.mom[0], self.mom[1] + o.mom[1]],
            self.energy + o.energy,
        )
    }
}

impl AddAssign for ConservedMoments {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for ConservedMoments {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(
            self.rho - o.rho,
            [self.mom[0] - o.mom[0], self.mom[1] - o.mom[1]],
            self.energy - o.energy,
        )
    }
}

impl Mul<ConservedMoments> for f64 {
    type Output = ConservedMoments;
    fn mul(self, o: ConservedMoments) -> ConservedMoments {
        ConservedMoments::new(
            self * o.rho,
            [self * o.mom[0], self * o.mom[1]],
            self * o.energy,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitives {
    pub rho: f64,
    pub u: [f64; 2],
    pub t: f64,
}

impl Primitives {
    pub fn new(rho: f64, u: [f64; 2], t: f64) -> Self {
        Self { rho, u, t }
    }

    pub fn to_conserved(&self, dim: usize) -> ConservedMoments {
        let ke = 0.5 * self.rho * (self.u[0] * self.u[0] + self.u[1] * self.u[1]);
        ConservedMoments::new(
            self.rho,
            [self.rho * self.u[0], self.rho * self.u[1]],
            ke + 0.5 * dim as f64 * self.rho * self.t,
        )
    }
}

pub fn primitives(u: &ConservedMoments, dim: usize) -> Result<Primitives> {
    if !u.is_finite() {
        return Err(Error::Domain(format!(
            "non-finite moments {:?}",
            u.to_array()
        )));
    }
    if u.rho < VACUUM_RHO {
        return Err(Error::Vacuum {
            rho: u.rho,
            cell: None,
        });
    }
    let vel = if dim == 1 {
        [u.mom[0] / u.rho, 0.0]
    } else {
        [u.mom[0] / u.rho, u.mom[1] / u.rho]
    };
    let ke = 0.5 * u.rho * (vel[0] * vel[0] + vel[1] * vel[1]);
    let t = (u.energy - ke) / (0.5 * dim as f64 * u.rho);
    if !(t > 0.0) {
        return Err(Error::NonPhysicalTemperature {
            temperature: t,
            cell: None,
        });
    }
    Ok(Primitives::new(u.rho, vel, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Periodic,
    FreeFlow,
}

/// Uniform cells on `[a, b]`; cell `i` has center `a + (i + 1/2) dx`, face `j` sits at `a + j dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    n: usize,
    a: f64,
    b: f64,
    dx: f64,
    bc: BoundaryCondition,
}

impl SpatialGrid {
    pub fn new(n: usize, a: f64, b: f64, bc: BoundaryCondition) -> Result<Self> {
        if n < 4 {
            return Err(Error::InvalidParameter(format!(
                "need at least 4 cells, got {n}"
            )));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bad spatial domain [{a}, {b}]"
            )));
        }
        Ok(Self {
            n,
            a,
            b,
            dx: (b - a) / n as f64,
            bc,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn center(&self, i: usize) -> f64 {
        self.a + (i as f64 + 0.5) * self.dx
    }

    pub fn face(&self, j: usize) -> f64 {
        self.a + j as f64 * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.center(i)).collect()
    }

    pub fn faces(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.face(j)).collect()
    }

    /// Map a possibly out-of-range cell index onto the interior per the BC.
    pub fn cell_index(&self, i: isize) -> usize {
        let n = self.n as isize;
        match self.bc {
            BoundaryCondition::Periodic => i.rem_euclid(n) as usize,
            BoundaryCondition::FreeFlow => i.clamp(0, n - 1) as usize,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stations {
    Centers,
    Interfaces,
}

/// Values over (spatial station, velocity node), station-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionField {
    stations: Stations,
    nv: usize,
    data: Vec<f64>,
}

impl DistributionField {
    pub fn zeros(stations: Stations, count: usize, nv: usize) -> Self {
        Self {
            stations,
            nv,
            data: vec![0.0; count * nv],
        }
    }

    pub fn from_stations(stations: Stations, rows: Vec<Vec<f64>>) -> Result<Self> {
        let nv = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nv * rows.len());
        for r in &rows {
            if r.len() != nv {
                return Err(Error::Shape {
                    expected: nv,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { stations, nv, data })
    }

    pub fn stations(&self) -> Stations {
        self.stations
    }

    pub fn count(&self) -> usize {
        if self.nv == 0 {
            0
        } else {
            self.data.len() / self.nv
        }
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn station(&self, i: usize) -> &[f64] {
        &self.data[i * self.nv..(i + 1) * self.nv]
    }

    pub fn station_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.nv..(i + 1) * self.nv]
    }

    pub fn iter_stations(&self) -> std::slice::Chunks<'_, f64> {
        self.data.chunks(self.nv)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn moments(&self, grid: &VelocityGrid) -> Result<Vec<ConservedMoments>> {
        self.iter_stations().map(|s| grid.moments(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integrates_to_box_length() {
        for n in [2, 8, 32] {
            let g = VelocityGrid::new(1, 3.0, n).unwrap();
            let one = vec![1.0; g.len()];
            assert!((g.integrate(&one).unwrap() - 6.0).abs() < 1e-14);
        }
        let g = VelocityGrid::new(2, 3.0, 16).unwrap();
        assert!((g.integrate(&vec![1.0; g.len()]).unwrap() - 36.0).abs() < 1e-12);
    }

    #[test]
    fn odd_function_vanishes() {
        let g = VelocityGrid::new(2, 8.4, 32).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|j| g.v1()[j].powi(3) * (-g.v2()[j].powi(2)).exp())
            .collect();
        let scale: f64 = f.iter().zip(g.weights()).map(|(a, w)| (a * w).abs()).sum();
        assert!(g.integrate(&f).unwrap().abs() < 1e-14 * scale);
    }

    #[test]
    fn shape_error() {
        let g = VelocityGrid::new(1, 1.0, 4).unwrap();
        assert!(matches!(g.integrate(&[1.0; 3]), Err(Error::Shape { .. })));
    }

    #[test]
    fn nodes_symmetric() {
        let g = VelocityGrid::new(1, 8.4, 32).unwrap();
        let a = g.axis();
        for j in 0..a.len() {
            assert_eq!(a[j], -a[a.len() - 1 - j]);
        }
        assert_eq!(a[16], 0.0);
    }

    #[test]
    fn maxwellian_peak_value() {
        let g = VelocityGrid::new(2, 4.0, 8).unwrap();
        let m = g
            .maxwellian(&Primitives::new(1.0, [0.0, 0.0], 1.0))
            .unwrap();
        let centre = 4 * 9 + 4;
        assert!((m[centre] - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn maxwellian_moments_round_trip() {
        let g = VelocityGrid::new(2, 8.4, 32).unwrap();
        let p = Primitives::new(1.0, [0.2, 0.0], 0.75);
        let u = g.moments(&g.maxwellian(&p).unwrap()).unwrap();
        let expect = [1.0, 0.2, 0.0, 0.5 * 0.04 + 0.75];
        for (a, b) in u.to_array().iter().zip(expect) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn primitives_examples() {
        let p = primitives(&ConservedMoments::new(1.0, [0.2, 0.0], 0.77), 2).unwrap();
        assert!((p.t - 0.75).abs() < 1e-14 && (p.u[0] - 0.2).abs() < 1e-15);
        let p = primitives(&ConservedMoments::new(2.0, [0.0, 0.0], 2.0), 2).unwrap();
        assert!((p.t - 1.0).abs() < 1e-15);
        assert!(matches!(
            primitives(&ConservedMoments::new(1.0, [1.0, 0.0], 0.5), 2),
            Err(Error::NonPhysicalTemperature { .. })
        ));
        assert!(matches!(
            primitives(&ConservedMoments::new(0.0, [0.0, 0.0], 1.0), 2),
            Err(Error::Vacuum { .. })
        ));
    }

    #[test]
    fn maxwellian_rejects_bad_state() {
        let g = VelocityGrid::new(1, 4.0, 8).unwrap();
        assert!(g.maxwellian(&Primitives::new(1.0, [0.0; 2], 0.0)).is_err());
        assert!(g.maxwellian(&Primitives::new(-1.0, [0.0; 2], 1.0)).is_err());
    }

    #[test]
    fn tail_mass_grows_with_temperature() {
        let g = VelocityGrid::new(2, 8.4, 32).unwrap();
        let cold = g.tail_mass(&Primitives::new(1.0, [0.0; 2], 1.0));
        let hot = g.tail_mass(&Primitives::new(1.0, [0.0; 2], 9.0));
        assert!(cold < 1e-12 && hot > 1e-6);
    }

    #[test]
    fn cell_index_maps() {
        let s = SpatialGrid::new(10, 0.0, 1.0, BoundaryCondition::Periodic).unwrap();
        assert_eq!(s.cell_index(-1), 9);
        assert_eq!(s.cell_index(11), 1);
        let s = SpatialGrid::new(10, 0.0, 1.0, BoundaryCondition::FreeFlow).unwrap();
        assert_eq!(s.cell_index(-2), 0);
        assert_eq!(s.cell_index(12), 9);
    }
}
