//! Landau operator `Q(f,g) = ∇·(D(g)∇f - F(g) f)` with `D = A * g`, `F = (∇·A) * g`.
//!
//! The five convolution kernels are transformed once on a zero-padded grid, so each
//! evaluation costs one forward and three packed inverse transforms per argument.
//! Velocity derivatives are spectral on the periodic nodes, which makes the discrete
//! divergence integrate to zero exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::spectral::{frequency, nodes_from_periodic_2d, nodes_from_periodic_2d_im, Fft2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauKernel {
    pub gamma: f64,
}

impl Default for LandauKernel {
    fn default() -> Self {
        Self { gamma: 0.0 }
    }
}

impl LandauKernel {
    /// `A(z) = |z|^{γ+2}(I - z z^T/|z|^2)` as `(a11, a12, a22)`.
    pub fn matrix(&self, z: [f64; 2]) -> [f64; 3] {
        let r2 = z[0] * z[0] + z[1] * z[1];
        if r2 == 0.0 {
            return [0.0; 3];
        }
        let psi = r2.powf(0.5 * (self.gamma + 2.0));
        let s = psi / r2;
        [
            psi - s * z[0] * z[0],
            -s * z[0] * z[1],
            psi - s * z[1] * z[1],
        ]
    }

    /// `∇·A(z) = (1-d)|z|^γ z` in two dimensions.
    pub fn divergence(&self, z: [f64; 2]) -> [f64; 2] {
        let r2 = z[0] * z[0] + z[1] * z[1];
        if r2 == 0.0 {
            return [0.0; 2];
        }
        let c = -r2.powf(0.5 * self.gamma);
        [c * z[0], c * z[1]]
    }
}

/// Diffusion matrix and drift at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct LandauCoefficients {
    pub d11: Vec<f64>,
    pub d12: Vec<f64>,
    pub d22: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl LandauCoefficients {
    /// Largest spectral radius of the 2x2 diffusion matrix over the grid.
    pub fn max_spectral_radius(&self) -> f64 {
        (0..self.d11.len())
            .map(|j| spectral_radius_2x2(self.d11[j], self.d12[j], self.d22[j]))
            .fold(0.0, f64::max)
    }
}

pub fn spectral_radius_2x2(a: f64, b: f64, c: f64) -> f64 {
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (m + r).abs().max((m - r).abs())
}

#[derive(Debug, Clone)]
pub struct LandauOperator {
    grid: VelocityGrid,
    kernel: LandauKernel,
    n: usize,
    p: usize,
    fft_n: Fft2,
    fft_p: Fft2,
    /// Normalized transforms of A11, A12, A22, b1, b2.
    kernels: [Vec<Complex64>; 5],
    xi: f64,
}

impl LandauOperator {
    pub fn new(grid: &VelocityGrid, kernel: LandauKernel) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::UnsupportedDimension(grid.dim()));
        }
        if !(kernel.gamma >= -3.0) {
            return Err(Error::UnsupportedKernel(format!(
                "Landau exponent must be >= -3, got {}",
                kernel.gamma
            )));
        }
        let n = grid.n();
        let m = n + 1;
        let p = 2 * m;
        let dv = grid.dv();
        let fft_p = Fft2::new(p);
        let mut scratch = fft_p.scratch();
        let mut kern = vec![vec![Complex64::new(0.0, 0.0); p * p]; 5];
        for i in 0..p {
            let di = if i <= p / 2 {
                i as f64
            } else {
                i as f64 - p as f64
            };
            for j in 0..p {
                let dj = if j <= p / 2 {
                    j as f64
                } else {
                    j as f64 - p as f64
                };
                let z = [di * dv, dj * dv];
                let a = kernel.matrix(z);
                let b = kernel.divergence(z);
                let idx = i * p + j;
                kern[0][idx].re = a[0];
                kern[1][idx].re = a[1];
                kern[2][idx].re = a[2];
                kern[3][idx].re = b[0];
                kern[4][idx].re = b[1];
            }
        }
        for k in kern.iter_mut() {
            fft_p.forward(k, &mut scratch);
        }
        let scale = 1.0 / (p * p) as f64;
        let kernels: [Vec<Complex64>; 5] =
            std::array::from_fn(|k| kern[k].iter().map(|c| c * scale).collect());
        Ok(Self {
            grid: grid.clone(),
            kernel,
            n,
            p,
            fft_n: Fft2::new(n),
            fft_p,
            kernels,
            xi: std::f64::consts::PI / grid.extent(),
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &LandauKernel {
        &self.kernel
    }

    /// `D(g)` and `F(g)` by aperiodic trapezoid convolution over all nodes.
    pub fn coefficients(&self, g: &[f64]) -> Result<LandauCoefficients> {
        self.grid.check(g)?;
        let (m, p) = (self.n + 1, self.p);
        let w = self.grid.weights();
        let mut gh = vec![Complex64::new(0.0, 0.0); p * p];
        for i in 0..m {
            for j in 0..m {
                gh[i * p + j].re = g[i * m + j] * w[i * m + j];
            }
        }
        let mut s = self.fft_p.scratch();
        self.fft_p.forward(&mut gh, &mut s);
        let i1 = Complex64::new(0.0, 1.0);
        let mut out = [Vec::new(), Vec::new(), Vec::new()];
        // both convolutions in a pair are real, so they share one inverse transform
        let pairs = [(0usize, Some(1usize)), (2, Some(3)), (4, None)];
        for (o, &(a, b)) in out.iter_mut().zip(&pairs) {
            let mut buf: Vec<Complex64> = (0..p * p)
                .map(|k| {
                    let x = gh[k] * self.kernels[a][k];
                    match b {
                        Some(b) => x + i1 * gh[k] * self.kernels[b][k],
                        None => x,
                    }
                })
                .collect();
            self.fft_p.inverse(&mut buf, &mut s);
            *o = buf;
        }
        let take = |buf: &[Complex64], im: bool| -> Vec<f64> {
            let mut v = Vec::with_capacity(m * m);
            for i in 0..m {
                for j in 0..m {
                    let c = buf[i * p + j];
                    v.push(if im { c.im } else { c.re });
                }
            }
            v
        };
        Ok(LandauCoefficients {
            d11: take(&out[0], false),
            d12: take(&out[0], true),
            d22: take(&out[1], false),
            f1: take(&out[1], true),
            f2: take(&out[2], false),
        })
    }

    /// Spectral gradient of `f` on the periodic nodes, written back onto all nodes.
    pub fn gradient(&self, f: &[f64]) -> Result<[Vec<f64>; 2]> {
        self.grid.check(f)?;
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        crate::spectral::periodic_2d(f, n, &mut buf);
        let mut s = self.fft_n.scratch();
        self.fft_n.forward(&mut buf, &mut s);
        let scale = 1.0 / (n * n) as f64;
        for k1 in 0..n {
            for k2 in 0..n {
                let c = &mut buf[k1 * n + k2];
                *c = match (frequency(k1, n), frequency(k2, n)) {
                    (Some(a), Some(b)) => {
                        // i ξ k1 f + i (i ξ k2 f)
                        let x = *c * scale * self.xi;
                        Complex64::new(0.0, a as f64) * x - x * b as f64
                    }
                    _ => Complex64::new(0.0, 0.0),
                };
            }
        }
        self.fft_n.inverse(&mut buf, &mut s);
        let mut g1 = vec![0.0; self.grid.len()];
        let mut g2 = vec![0.0; self.grid.len()];
        nodes_from_periodic_2d(&buf, n, &mut g1);
        nodes_from_periodic_2d_im(&buf, n, &mut g2);
        Ok([g1, g2])
    }

    /// Spectral divergence of the node field `(j1, j2)`.
    pub fn divergence(&self, j1: &[f64], j2: &[f64]) -> Vec<f64> {
        let n = self.n;
        let m = n + 1;
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                buf[i * n + j] = Complex64::new(j1[i * m + j], j2[i * m + j]);
            }
        }
        let mut s = self.fft_n.scratch();
        self.fft_n.forward(&mut buf, &mut s);
        let scale = 1.0 / (n * n) as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for k1 in 0..n {
            for k2 in 0..n {
                if let (Some(a), Some(b)) = (frequency(k1, n), frequency(k2, n)) {
                    let x = buf[k1 * n + k2];
                    let y = buf[((n - k1) % n) * n + (n - k2) % n].conj();
                    let h1 = 0.5 * (x + y);
                    let h2 = Complex64::new(0.0, -0.5) * (x - y);
                    let d = (h1 * a as f64 + h2 * b as f64) * Complex64::new(0.0, self.xi * scale);
                    out[k1 * n + k2] = d;
                }
            }
        }
        self.fft_n.inverse(&mut out, &mut s);
        let mut q = vec![0.0; self.grid.len()];
        nodes_from_periodic_2d(&out, n, &mut q);
        q
    }

    fn flux(
        c: &LandauCoefficients,
        grad: &[Vec<f64>; 2],
        f: &[f64],
        j1: &mut [f64],
        j2: &mut [f64],
        w: f64,
    ) {
        for k in 0..f.len() {
            j1[k] += w * (c.d11[k] * grad[0][k] + c.d12[k] * grad[1][k] - c.f1[k] * f[k]);
            j2[k] += w * (c.d12[k] * grad[0][k] + c.d22[k] * grad[1][k] - c.f2[k] * f[k]);
        }
    }

    /// `Q(f,f)` and the coefficients `D(f)`, `F(f)` used to build it.
    pub fn quadratic_with_coefficients(&self, f: &[f64]) -> Result<(Vec<f64>, LandauCoefficients)> {
        let c = self.coefficients(f)?;
        let grad = self.gradient(f)?;
        let len = f.len();
        let (mut j1, mut j2) = (vec![0.0; len], vec![0.0; len]);
        Self::flux(&c, &grad, f, &mut j1, &mut j2, 1.0);
        Ok((self.divergence(&j1, &j2), c))
    }

    pub fn quadratic(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(self.quadratic_with_coefficients(f)?.0)
    }

    /// `½(Q(f,g) + Q(g,f))`.
    pub fn symmetric(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        let cf = self.coefficients(f)?;
        let cg = self.coefficients(g)?;
        let gf = self.gradient(f)?;
        let gg = self.gradient(g)?;
        let len = f.len();
        let (mut j1, mut j2) = (vec![0.0; len], vec![0.0; len]);
        Self::flux(&cg, &gf, f, &mut j1, &mut j2, 0.5);
        Self::flux(&cf, &gg, g, &mut j1, &mut j2, 0.5);
        Ok(self.divergence(&j1, &j2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Primitives;

    fn op(n: usize, l: f64) -> LandauOperator {
        LandauOperator::new(
            &VelocityGrid::new(2, l, n).unwrap(),
            LandauKernel::default(),
        )
        .unwrap()
    }

    #[test]
    fn kernel_matrix_annihilates_z() {
        let k = LandauKernel { gamma: -1.0 };
        let z = [0.3, -1.2];
        let a = k.matrix(z);
        assert!((a[0] * z[0] + a[1] * z[1]).abs() < 1e-15);
        assert!((a[1] * z[0] + a[2] * z[1]).abs() < 1e-15);
        assert_eq!(k.matrix([0.0, 0.0]), [0.0; 3]);
    }

    #[test]
    fn spectral_radius_of_diagonal() {
        assert_eq!(spectral_radius_2x2(2.0, 0.0, -5.0), 5.0);
        assert_eq!(spectral_radius_2x2(3.0, 0.0, 1.0), 3.0);
    }

    #[test]
    fn coefficients_match_direct_sum() {
        let o = op(8, 4.0);
        let g = o.grid().clone();
        let f = g
            .maxwellian(&Primitives::new(1.0, [0.3, -0.2], 0.8))
            .unwrap();
        let c = o.coefficients(&f).unwrap();
        let k = LandauKernel::default();
        for i in [0usize, 17, 40, 80] {
            let vi = g.velocity(i);
            let mut d = [0.0; 5];
            for j in 0..g.len() {
                let vj = g.velocity(j);
                let z = [vi[0] - vj[0], vi[1] - vj[1]];
                let a = k.matrix(z);
                let b = k.divergence(z);
                let w = f[j] * g.weights()[j];
                d[0] += a[0] * w;
                d[1] += a[1] * w;
                d[2] += a[2] * w;
                d[3] += b[0] * w;
                d[4] += b[1] * w;
            }
            let got = [c.d11[i], c.d12[i], c.d22[i], c.f1[i], c.f2[i]];
            for (x, y) in got.iter().zip(d) {
                assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn maxwellian_is_annihilated_and_mass_exact() {
        let o = op(32, 6.0);
        let m = o
            .grid()
            .maxwellian(&Primitives::new(1.0, [0.2, 0.0], 0.75))
            .unwrap();
        let q = o.quadratic(&m).unwrap();
        let sup = q.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(sup < 1e-6, "sup {sup:e}");
        assert!(o.grid().integrate(&q).unwrap().abs() < 1e-13);
    }
}
