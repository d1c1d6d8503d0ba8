//! Penalty operators (BGK and symmetrized Fokker-Planck) and stiffness estimates `β`.

use crate::cg::{self, CgOptions, CgSolution};
use crate::error::{Error, Result};
use crate::grid::VelocityGrid;

use super::boltzmann::BoltzmannOperator;
use super::landau::LandauOperator;

/// Floor applied to every penalty coefficient.
pub const BETA_MIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyChoice {
    /// Maximum of the loss frequency of each quadratic operator.
    Choice1,
    /// `sup |Q(M±g)| / |g|` with a relative floor on `|g|`.
    Choice2,
    /// `β₀` times the largest spectral radius of the Landau diffusion matrix.
    LandauSpectralRadius,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    pub choice: PenaltyChoice,
    pub beta0: f64,
    /// Choice 2 divides by `max(|g|, delta_rel * max|g|)`.
    pub delta_rel: f64,
}

impl Default for PenaltyParams {
    fn default() -> Self {
        Self {
            choice: PenaltyChoice::Choice1,
            beta0: 1.0,
            delta_rel: 1e-8,
        }
    }
}

impl PenaltyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta0 > 0.5) {
            return Err(Error::InvalidParameter(format!(
                "beta0 must exceed 1/2, got {}",
                self.beta0
            )));
        }
        if !(self.delta_rel > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {}",
                self.delta_rel
            )));
        }
        Ok(())
    }
}

pub fn floor_beta(b: f64) -> f64 {
    if b.is_finite() {
        b.max(BETA_MIN)
    } else {
        BETA_MIN
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Choice 1 from precomputed loss frequencies of `M+g` and `M-g`.
pub fn beta_choice1(nu_plus: &[f64], nu_minus: &[f64]) -> (f64, f64) {
    let mx = |v: &[f64]| v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    (floor_beta(mx(nu_plus)), floor_beta(mx(nu_minus)))
}

/// Choice 2 from precomputed `Q(M+g)`, `Q(M-g)` and `g`.
pub fn beta_choice2(q_plus: &[f64], q_minus: &[f64], g: &[f64], delta_rel: f64) -> (f64, f64) {
    let gmax = sup(g);
    if gmax == 0.0 {
        return (BETA_MIN, BETA_MIN);
    }
    let delta = delta_rel * gmax;
    let ratio = |q: &[f64]| {
        q.iter()
            .zip(g)
            .map(|(q, g)| q.abs() / g.abs().max(delta))
            .fold(0.0, f64::max)
    };
    (floor_beta(ratio(q_plus)), floor_beta(ratio(q_minus)))
}

pub fn beta_boltzmann(
    op: &BoltzmannOperator,
    mg_plus: &[f64],
    mg_minus: &[f64],
    params: &PenaltyParams,
) -> Result<(f64, f64)> {
    match params.choice {
        PenaltyChoice::Choice1 => Ok(beta_choice1(
            &op.loss_frequency(mg_plus)?,
            &op.loss_frequency(mg_minus)?,
        )),
        PenaltyChoice::Choice2 => {
            let qp = op.quadratic(mg_plus)?;
            let qm = op.quadratic(mg_minus)?;
            let g: Vec<f64> = mg_plus
                .iter()
                .zip(mg_minus)
                .map(|(a, b)| 0.5 * (a - b))
                .collect();
            Ok(beta_choice2(&qp, &qm, &g, params.delta_rel))
        }
        PenaltyChoice::LandauSpectralRadius => Err(Error::InvalidParameter(
            "spectral-radius penalty applies to the Landau operator only".into(),
        )),
    }
}

pub fn beta_landau(
    op: &LandauOperator,
    mg_plus: &[f64],
    mg_minus: &[f64],
    beta0: f64,
) -> Result<(f64, f64)> {
    let b1 = op.coefficients(mg_plus)?.max_spectral_radius();
    let b2 = op.coefficients(mg_minus)?.max_spectral_radius();
    Ok((floor_beta(beta0 * b1), floor_beta(beta0 * b2)))
}

/// BGK penalty `β(M - f)`.
pub fn bgk_penalty(beta: f64, m: &[f64], f: &[f64]) -> Vec<f64> {
    m.iter().zip(f).map(|(m, f)| beta * (m - f)).collect()
}

/// The symmetrized Fokker-Planck stencil `P̃` for a fixed Maxwellian.
#[derive(Debug, Clone)]
pub struct FpStencil {
    dim: usize,
    m: usize,
    inv_dv2: f64,
    sqrt_m: Vec<f64>,
    /// `Σ_axes (s_{j+1} + s_{j-1}) / Δv²` at each node.
    centre: Vec<f64>,
}

impl FpStencil {
    pub fn new(grid: &VelocityGrid, maxwellian: &[f64]) -> Result<Self> {
        grid.check(maxwellian)?;
        if let Some(j) = maxwellian
            .iter()
            .position(|&x| !(x > 0.0) || !x.is_finite())
        {
            return Err(Error::Domain(format!(
                "Fokker-Planck penalty needs a positive Maxwellian, found {} at node {j}",
                maxwellian[j]
            )));
        }
        let sqrt_m: Vec<f64> = maxwellian.iter().map(|x| x.sqrt()).collect();
        let m = grid.nodes_per_axis();
        let dim = grid.dim();
        let inv_dv2 = 1.0 / (grid.dv() * grid.dv());
        let at = |idx: Option<usize>| idx.map_or(0.0, |k| sqrt_m[k]);
        let mut centre = vec![0.0; sqrt_m.len()];
        for (k, c) in centre.iter_mut().enumerate() {
            let mut acc = 0.0;
            for axis in 0..dim {
                let (lo, hi) = neighbours(k, axis, dim, m);
                acc += at(lo) + at(hi);
            }
            *c = acc * inv_dv2;
        }
        Ok(Self {
            dim,
            m,
            inv_dv2,
            sqrt_m,
            centre,
        })
    }

    pub fn sqrt_m(&self) -> &[f64] {
        &self.sqrt_m
    }

    /// Diagonal entries of `P̃`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.centre
            .iter()
            .zip(&self.sqrt_m)
            .map(|(c, s)| -c / s)
            .collect()
    }

    pub fn apply(&self, h: &[f64], out: &mut [f64]) {
        for k in 0..h.len() {
            let mut acc = -self.centre[k] * (h[k] / self.sqrt_m[k]);
            for axis in 0..self.dim {
                let (lo, hi) = neighbours(k, axis, self.dim, self.m);
                acc += (lo.map_or(0.0, |i| h[i]) + hi.map_or(0.0, |i| h[i])) * self.inv_dv2;
            }
            out[k] = acc;
        }
    }

    /// Solve `(I - c P̃) x = b` by CG; convergence is checked in both the `h`
    /// metric and the `√M`-weighted metric of the original unknown.
    pub fn solve_shifted(&self, c: f64, b: &[f64], opts: CgOptions) -> Result<CgSolution> {
        let inv_diag: Vec<f64> = self
            .diagonal()
            .iter()
            .map(|d| 1.0 / (1.0 - c * d))
            .collect();
        cg::solve(
            |x, y| {
                self.apply(x, y);
                for (y, x) in y.iter_mut().zip(x) {
                    *y = x - c * *y;
                }
            },
            b,
            Some(&inv_diag),
            Some(&self.sqrt_m),
            opts,
        )
    }
}

fn neighbours(k: usize, axis: usize, dim: usize, m: usize) -> (Option<usize>, Option<usize>) {
    let (stride, pos) = if dim == 1 {
        (1, k)
    } else if axis == 0 {
        (m, k / m)
    } else {
        (1, k % m)
    };
    let lo = (pos > 0).then(|| k - stride);
    let hi = (pos + 1 < m).then(|| k + stride);
    (lo, hi)
}

/// `P̃ h` for the Maxwellian `M`.
pub fn fp_tilde_apply(grid: &VelocityGrid, h: &[f64], maxwellian: &[f64]) -> Result<Vec<f64>> {
    grid.check(h)?;
    let st = FpStencil::new(grid, maxwellian)?;
    let mut out = vec![0.0; h.len()];
    st.apply(h, &mut out);
    Ok(out)
}

/// `P f = √M P̃(f/√M)`.
pub fn fp_penalty(grid: &VelocityGrid, f: &[f64], maxwellian: &[f64]) -> Result<Vec<f64>> {
    grid.check(f)?;
    let st = FpStencil::new(grid, maxwellian)?;
    let h: Vec<f64> = f.iter().zip(st.sqrt_m()).map(|(f, s)| f / s).collect();
    let mut out = vec![0.0; f.len()];
    st.apply(&h, &mut out);
    out.iter_mut().zip(st.sqrt_m()).for_each(|(o, s)| *o *= s);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Primitives;

    fn setup(dim: usize) -> (VelocityGrid, Vec<f64>) {
        let g = VelocityGrid::new(dim, 6.0, 16).unwrap();
        let m = g
            .maxwellian(&Primitives::new(1.2, [0.3, -0.1], 0.9))
            .unwrap();
        (g, m)
    }

    #[test]
    fn annihilates_sqrt_maxwellian() {
        for dim in [1, 2] {
            let (g, m) = setup(dim);
            let s: Vec<f64> = m.iter().map(|x| x.sqrt()).collect();
            let out = fp_tilde_apply(&g, &s, &m).unwrap();
            assert!(out.iter().all(|x| x.abs() < 1e-14));
            let p = fp_penalty(&g, &m, &m).unwrap();
            assert!(p.iter().all(|x| x.abs() < 1e-15));
        }
    }

    #[test]
    fn rejects_zero_maxwellian() {
        let (g, mut m) = setup(1);
        m[3] = 0.0;
        assert!(fp_penalty(&g, &m.clone(), &m).is_err());
    }

    #[test]
    fn diagonal_matches_apply() {
        let (g, m) = setup(2);
        let st = FpStencil::new(&g, &m).unwrap();
        let d = st.diagonal();
        let mut e = vec![0.0; g.len()];
        let mut out = vec![0.0; g.len()];
        for k in [0usize, 20, 144, 288] {
            e[k] = 1.0;
            st.apply(&e, &mut out);
            assert!((out[k] - d[k]).abs() <= 1e-12 * d[k].abs());
            e[k] = 0.0;
        }
    }

    #[test]
    fn beta_floors() {
        let z = vec![0.0; 4];
        assert_eq!(beta_choice2(&z, &z, &z, 1e-8), (BETA_MIN, BETA_MIN));
        assert_eq!(beta_choice1(&z, &z), (BETA_MIN, BETA_MIN));
    }

    #[test]
    fn params_validation() {
        assert!(PenaltyParams::default().validate().is_ok());
        let bad = PenaltyParams {
            beta0: 0.4,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn shifted_solve_residual() {
        let (g, m) = setup(2);
        let st = FpStencil::new(&g, &m).unwrap();
        let b: Vec<f64> = (0..g.len()).map(|k| ((k * 7) % 13) as f64 - 6.0).collect();
        let sol = st.solve_shifted(0.3, &b, CgOptions::default()).unwrap();
        let mut y = vec![0.0; g.len()];
        st.apply(&sol.x, &mut y);
        let r: f64 = (0..g.len())
            .map(|k| (sol.x[k] - 0.3 * y[k] - b[k]).powi(2))
            .sum::<f64>()
            .sqrt();
        let bn: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(r <= 1e-10 * bn);
    }
}
