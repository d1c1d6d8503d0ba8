//! Collision operators, penalty operators and stiffness estimates.

pub mod boltzmann;
pub mod landau;
pub mod penalty;

pub use boltzmann::{BoltzmannKernel, BoltzmannOperator};
pub use landau::{LandauCoefficients, LandauKernel, LandauOperator};
pub use penalty::{
    beta_boltzmann, beta_landau, fp_penalty, fp_tilde_apply, FpStencil, PenaltyChoice,
    PenaltyParams, BETA_MIN,
};

use crate::error::{Error, Result};
use crate::grid::{ConservedMoments, VelocityGrid};

/// A bilinear velocity-space collision operator.
pub trait CollisionOperator: Send + Sync {
    fn grid(&self) -> &VelocityGrid;
    fn quadratic(&self, f: &[f64]) -> Result<Vec<f64>>;
    /// `½(Q(f,g) + Q(g,f))`.
    fn symmetric(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>>;
}

impl CollisionOperator for BoltzmannOperator {
    fn grid(&self) -> &VelocityGrid {
        BoltzmannOperator::grid(self)
    }
    fn quadratic(&self, f: &[f64]) -> Result<Vec<f64>> {
        BoltzmannOperator::quadratic(self, f)
    }
    fn symmetric(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        BoltzmannOperator::symmetric(self, f, g)
    }
}

impl CollisionOperator for LandauOperator {
    fn grid(&self) -> &VelocityGrid {
        LandauOperator::grid(self)
    }
    fn quadratic(&self, f: &[f64]) -> Result<Vec<f64>> {
        LandauOperator::quadratic(self, f)
    }
    fn symmetric(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        LandauOperator::symmetric(self, f, g)
    }
}

/// `½[Q(M+g, M+g) - Q(M-g, M-g)]`, which equals `2 Q_sym(M, g)`.
pub fn linearized_l(op: &dyn CollisionOperator, m: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    op.grid().check(m)?;
    op.grid().check(g)?;
    let plus: Vec<f64> = m.iter().zip(g).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = m.iter().zip(g).map(|(a, b)| a - b).collect();
    let qp = op.quadratic(&plus)?;
    let qm = op.quadratic(&minus)?;
    Ok(qp.iter().zip(&qm).map(|(a, b)| 0.5 * (a - b)).collect())
}

/// `(M(U) - f) / τ`.
pub fn q_bgk(grid: &VelocityGrid, f: &[f64], u: &ConservedMoments, tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "relaxation time must be positive, got {tau}"
        )));
    }
    grid.check(f)?;
    let m = grid.maxwellian(&u.primitives(grid.dim())?)?;
    Ok(m.iter().zip(f).map(|(m, f)| (m - f) / tau).collect())
}

/// Explicit collision terms of the micro update at one interface.
#[derive(Debug, Clone, PartialEq)]
pub struct MicroTerms {
    pub q_gg: Vec<f64>,
    /// `½[Q(M+g) - Q(M-g)]`.
    pub linear: Vec<f64>,
    pub beta: (f64, f64),
}

/// The collision models the solvers can be driven with.
#[derive(Debug, Clone)]
pub enum Collision {
    Boltzmann(BoltzmannOperator),
    Landau(LandauOperator),
    Bgk { grid: VelocityGrid, tau: f64 },
}

impl Collision {
    pub fn grid(&self) -> &VelocityGrid {
        match self {
            Collision::Boltzmann(o) => o.grid(),
            Collision::Landau(o) => o.grid(),
            Collision::Bgk { grid, .. } => grid,
        }
    }

    pub fn is_landau(&self) -> bool {
        matches!(self, Collision::Landau(_))
    }

    /// `Q(f,f)`; for BGK the relaxation towards the Maxwellian of `f`.
    pub fn full(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(self.full_with_stiffness(f)?.0)
    }

    /// `Q(f,f)` and a stiffness bound: the maximal loss frequency (Boltzmann),
    /// the maximal spectral radius of `D(f)` (Landau) or `1/τ` (BGK).
    pub fn full_with_stiffness(&self, f: &[f64]) -> Result<(Vec<f64>, f64)> {
        match self {
            Collision::Boltzmann(o) => {
                let (q, nu) = o.quadratic_with_loss(f)?;
                Ok((q, penalty::beta_choice1(&nu, &nu).0))
            }
            Collision::Landau(o) => {
                let (q, c) = o.quadratic_with_coefficients(f)?;
                Ok((q, penalty::floor_beta(c.max_spectral_radius())))
            }
            Collision::Bgk { grid, tau } => {
                let u = grid.moments(f)?;
                Ok((q_bgk(grid, f, &u, *tau)?, 1.0 / tau))
            }
        }
    }

    pub fn micro_terms(&self, m: &[f64], g: &[f64], params: &PenaltyParams) -> Result<MicroTerms> {
        let grid = self.grid();
        grid.check(m)?;
        grid.check(g)?;
        let plus: Vec<f64> = m.iter().zip(g).map(|(a, b)| a + b).collect();
        let minus: Vec<f64> = m.iter().zip(g).map(|(a, b)| a - b).collect();
        let half_diff = |a: &[f64], b: &[f64]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| 0.5 * (x - y))
                .collect::<Vec<_>>()
        };
        match self {
            Collision::Boltzmann(o) => {
                let q_gg = o.quadratic(g)?;
                let (qp, nup) = o.quadratic_with_loss(&plus)?;
                let (qm, num) = o.quadratic_with_loss(&minus)?;
                let beta = match params.choice {
                    PenaltyChoice::Choice1 => penalty::beta_choice1(&nup, &num),
                    PenaltyChoice::Choice2 => penalty::beta_choice2(&qp, &qm, g, params.delta_rel),
                    PenaltyChoice::LandauSpectralRadius => {
                        return Err(Error::InvalidParameter(
                            "spectral-radius penalty applies to the Landau operator only".into(),
                        ))
                    }
                };
                Ok(MicroTerms {
                    q_gg,
                    linear: half_diff(&qp, &qm),
                    beta,
                })
            }
            Collision::Landau(o) => {
                let q_gg = o.quadratic(g)?;
                let (qp, cp) = o.quadratic_with_coefficients(&plus)?;
                let (qm, cm) = o.quadratic_with_coefficients(&minus)?;
                let beta = (
                    penalty::floor_beta(params.beta0 * cp.max_spectral_radius()),
                    penalty::floor_beta(params.beta0 * cm.max_spectral_radius()),
                );
                Ok(MicroTerms {
                    q_gg,
                    linear: half_diff(&qp, &qm),
                    beta,
                })
            }
            Collision::Bgk { tau, .. } => Ok(MicroTerms {
                q_gg: vec![0.0; g.len()],
                linear: g.iter().map(|x| -x / tau).collect(),
                beta: (1.0 / tau, 1.0 / tau),
            }),
        }
    }
}
