//! Jacobi-preconditioned conjugate gradients for small symmetric positive definite systems.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual `‖b - Ax‖ / ‖b‖` of the returned iterate.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn weighted_norm(r: &[f64], w: Option<&[f64]>) -> f64 {
    match w {
        Some(w) => r
            .iter()
            .zip(w)
            .map(|(x, s)| (x * s) * (x * s))
            .sum::<f64>()
            .sqrt(),
        None => dot(r, r).sqrt(),
    }
}

/// Solve `A x = b` starting from zero.
///
/// Convergence requires `‖r‖ <= tol ‖b‖`, and additionally `‖w∘r‖ <= tol ‖w∘b‖`
/// when `weights` is given.
pub fn solve(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    inv_diag: Option<&[f64]>,
    weights: Option<&[f64]>,
    opts: CgOptions,
) -> Result<CgSolution> {
    let n = b.len();
    let bn = dot(b, b).sqrt();
    let bw = weighted_norm(b, weights);
    if bn == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let precond = |r: &[f64], z: &mut [f64]| match inv_diag {
        Some(d) => z
            .iter_mut()
            .zip(r)
            .zip(d)
            .for_each(|((z, r), d)| *z = r * d),
        None => z.copy_from_slice(r),
    };
    let converged = |r: &[f64]| {
        let ok = dot(r, r).sqrt() <= opts.tol * bn;
        ok && (weights.is_none() || weighted_norm(r, weights) <= opts.tol * bw)
    };
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);
    for it in 1..=opts.max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::CgNotConverged {
                iterations: it,
                residual: dot(&r, &r).sqrt() / bn,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if converged(&r) {
            // confirm against the true residual
            apply(&x, &mut ap);
            let rt: Vec<f64> = b.iter().zip(&ap).map(|(b, a)| b - a).collect();
            if converged(&rt) {
                return Ok(CgSolution {
                    x,
                    iterations: it,
                    residual: dot(&rt, &rt).sqrt() / bn,
                });
            }
            r = rt;
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::CgNotConverged {
        iterations: opts.max_iter,
        residual: dot(&r, &r).sqrt() / bn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(x: &[f64], y: &mut [f64]) {
        let n = x.len();
        for i in 0..n {
            let l = if i > 0 { x[i - 1] } else { 0.0 };
            let r = if i + 1 < n { x[i + 1] } else { 0.0 };
            y[i] = (2.0 + i as f64) * x[i] - l - r;
        }
    }

    #[test]
    fn solves_spd_system() {
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let d: Vec<f64> = (0..30).map(|i| 1.0 / (2.0 + i as f64)).collect();
        let s = solve(tridiag, &b, Some(&d), None, CgOptions::default()).unwrap();
        let mut ax = vec![0.0; 30];
        tridiag(&s.x, &mut ax);
        let r: f64 = ax
            .iter()
            .zip(&b)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let bn: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(r <= 1e-10 * bn);
        assert!(s.residual <= 1e-10);
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let s = solve(tridiag, &[0.0; 5], None, None, CgOptions::default()).unwrap();
        assert_eq!(s.x, vec![0.0; 5]);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn reports_non_convergence() {
        let b = vec![1.0; 50];
        let opts = CgOptions {
            tol: 1e-14,
            max_iter: 2,
        };
        assert!(matches!(
            solve(tridiag, &b, None, None, opts),
            Err(Error::CgNotConverged { iterations: 2, .. })
        ));
    }
}
