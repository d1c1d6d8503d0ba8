//! Fourier-Galerkin evaluation of the 2D Boltzmann operator for Maxwell molecules.
//!
//! The operator is written in Carleman form on the periodized box `[-L, L]^2`,
//! truncated to `|x|, |y| <= R`:
//!
//! `Q(f,g)(v) = (1/pi) ∫∫ δ(x·y) [f(v+x) g(v+y) - f(v) g(v+x+y)] dx dy`
//!
//! The kernel modes `B(l,m)` separate over the angular nodes `θ_p = pπ/M`, so each
//! angle costs one padded inverse FFT (two real transforms packed as real and
//! imaginary parts). Products are formed on a `3N/2` grid so the retained modes
//! carry no aliasing error.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::spectral::{bin, frequency, nodes_from_periodic_2d, periodic_2d, Fft2};

/// Variable hard sphere kernel `C_λ |u|^λ b` with constant angular part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoltzmannKernel {
    pub lambda: f64,
    /// Truncation radius of the relative velocity; `None` picks `0.8 L`.
    pub radius: Option<f64>,
    /// Number of angular nodes on the half circle.
    pub angles: usize,
}

impl Default for BoltzmannKernel {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            radius: None,
            angles: 8,
        }
    }
}

pub fn default_radius(extent: f64) -> f64 {
    0.8 * extent
}

fn phi(r: f64, s: f64) -> f64 {
    if s.abs() < 1e-12 {
        2.0 * r
    } else {
        2.0 * (r * s).sin() / s
    }
}

#[derive(Debug, Clone)]
pub struct BoltzmannOperator {
    grid: VelocityGrid,
    kernel: BoltzmannKernel,
    radius: f64,
    n: usize,
    p: usize,
    fft_n: Fft2,
    fft_p: Fft2,
    /// (bin on the N grid, bin on the padded grid) of every retained mode.
    modes: Vec<(usize, usize)>,
    alpha: Vec<Vec<f64>>,
    alpha_perp: Vec<Vec<f64>>,
    loss_modes: Vec<f64>,
}

impl BoltzmannOperator {
    pub fn new(grid: &VelocityGrid, kernel: BoltzmannKernel) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::UnsupportedDimension(grid.dim()));
        }
        if kernel.lambda != 0.0 {
            return Err(Error::UnsupportedKernel(format!(
                "only Maxwell molecules (lambda = 0) are implemented, got lambda = {}",
                kernel.lambda
            )));
        }
        if kernel.angles == 0 {
            return Err(Error::InvalidParameter(
                "angular node count must be positive".into(),
            ));
        }
        let radius = kernel
            .radius
            .unwrap_or_else(|| default_radius(grid.extent()));
        if !(radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation radius must be positive, got {radius}"
            )));
        }
        let n = grid.n();
        let p = {
            let p = (3 * n).div_ceil(2);
            p + p % 2
        };
        let xi = std::f64::consts::PI / grid.extent();
        let mut modes = Vec::new();
        let mut freqs = Vec::new();
        for k1 in 0..n {
            for k2 in 0..n {
                if let (Some(a), Some(b)) = (frequency(k1, n), frequency(k2, n)) {
                    modes.push((k1 * n + k2, bin(a, p) * p + bin(b, p)));
                    freqs.push((a as f64, b as f64));
                }
            }
        }
        let m = kernel.angles;
        let mut alpha = Vec::with_capacity(m);
        let mut alpha_perp = Vec::with_capacity(m);
        for q in 0..m {
            let th = std::f64::consts::PI * q as f64 / m as f64;
            let (s, c) = th.sin_cos();
            alpha.push(
                freqs
                    .iter()
                    .map(|&(a, b)| phi(radius, xi * (a * c + b * s)))
                    .collect::<Vec<_>>(),
            );
            alpha_perp.push(
                freqs
                    .iter()
                    .map(|&(a, b)| phi(radius, xi * (-a * s + b * c)))
                    .collect::<Vec<_>>(),
            );
        }
        let loss_modes = (0..freqs.len())
            .map(|i| (0..m).map(|q| alpha[q][i] * alpha_perp[q][i]).sum::<f64>() / m as f64)
            .collect();
        Ok(Self {
            grid: grid.clone(),
            kernel,
            radius,
            n,
            p,
            fft_n: Fft2::new(n),
            fft_p: Fft2::new(p),
            modes,
            alpha,
            alpha_perp,
            loss_modes,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &BoltzmannKernel {
        &self.kernel
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Kernel mode `B(l,m)` for signed frequency pairs, as used by the Galerkin sum.
    pub fn kernel_mode(&self, l: (i64, i64), m: (i64, i64)) -> f64 {
        let xi = std::f64::consts::PI / self.grid.extent();
        let na = self.kernel.angles;
        (0..na)
            .map(|q| {
                let th = std::f64::consts::PI * q as f64 / na as f64;
                let (s, c) = th.sin_cos();
                let a = phi(self.radius, xi * (l.0 as f64 * c + l.1 as f64 * s));
                let b = phi(self.radius, xi * (-(m.0 as f64) * s + m.1 as f64 * c));
                a * b
            })
            .sum::<f64>()
            / na as f64
    }

    /// Normalized Fourier coefficients on the N grid (Nyquist modes included, unused).
    pub fn coefficients(&self, f: &[f64]) -> Result<Vec<Complex64>> {
        self.grid.check(f)?;
        let n = self.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
        periodic_2d(f, n, &mut buf);
        let mut s = self.fft_n.scratch();
        self.fft_n.forward(&mut buf, &mut s);
        let scale = 1.0 / (n * n) as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        Ok(buf)
    }

    fn padded(
        &self,
        buf: &mut [Complex64],
        fill: impl Fn(usize, usize) -> Complex64,
        scratch: &mut [Complex64],
    ) {
        buf.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for (i, &(nb, pb)) in self.modes.iter().enumerate() {
            buf[pb] = fill(i, nb);
        }
        self.fft_p.inverse(buf, scratch);
    }

    fn finish(&self, mut acc: Vec<Complex64>, scratch: &mut [Complex64]) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        self.fft_p.forward(&mut acc, scratch);
        let scale = 1.0 / (p * p) as f64;
        let mut out_hat = vec![Complex64::new(0.0, 0.0); n * n];
        for &(nb, pb) in &self.modes {
            out_hat[nb] = acc[pb] * scale;
        }
        let mut sn = self.fft_n.scratch();
        self.fft_n.inverse(&mut out_hat, &mut sn);
        let mut out = vec![0.0; self.grid.len()];
        nodes_from_periodic_2d(&out_hat, n, &mut out);
        out
    }

    /// `Q(f,f)` together with the loss frequency `ν = ∫∫ B δ f(v+x+y)` at every node.
    pub fn quadratic_with_loss(&self, f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let fh = self.coefficients(f)?;
        let p2 = self.p * self.p;
        let mut sp = self.fft_p.scratch();
        let mut buf = vec![Complex64::new(0.0, 0.0); p2];
        let mut acc = vec![Complex64::new(0.0, 0.0); p2];
        let w = 1.0 / self.kernel.angles as f64;
        for q in 0..self.kernel.angles {
            let (a, b) = (&self.alpha[q], &self.alpha_perp[q]);
            self.padded(
                &mut buf,
                |i, nb| fh[nb] * Complex64::new(a[i], b[i]),
                &mut sp,
            );
            for (s, c) in acc.iter_mut().zip(&buf) {
                s.re += w * c.re * c.im;
            }
        }
        self.padded(
            &mut buf,
            |i, nb| fh[nb] * Complex64::new(1.0, self.loss_modes[i]),
            &mut sp,
        );
        for (s, c) in acc.iter_mut().zip(&buf) {
            s.re -= c.re * c.im;
        }
        let q = self.finish(acc, &mut sp);
        Ok((q, self.loss_frequency_from(&fh)))
    }

    fn loss_frequency_from(&self, fh: &[Complex64]) -> Vec<f64> {
        let n = self.n;
        let mut nu = vec![Complex64::new(0.0, 0.0); n * n];
        for (i, &(nb, _)) in self.modes.iter().enumerate() {
            nu[nb] = fh[nb] * self.loss_modes[i];
        }
        let mut s = self.fft_n.scratch();
        self.fft_n.inverse(&mut nu, &mut s);
        let mut out = vec![0.0; self.grid.len()];
        nodes_from_periodic_2d(&nu, n, &mut out);
        out
    }

    pub fn loss_frequency(&self, f: &[f64]) -> Result<Vec<f64>> {
        let fh = self.coefficients(f)?;
        Ok(self.loss_frequency_from(&fh))
    }

    pub fn quadratic(&self, f: &[f64]) -> Result<Vec<f64>> {
        Ok(self.quadratic_with_loss(f)?.0)
    }

    /// `½(Q(f,g) + Q(g,f))`.
    pub fn symmetric(&self, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
        let fh = self.coefficients(f)?;
        let gh = self.coefficients(g)?;
        let p2 = self.p * self.p;
        let mut sp = self.fft_p.scratch();
        let mut b1 = vec![Complex64::new(0.0, 0.0); p2];
        let mut b2 = vec![Complex64::new(0.0, 0.0); p2];
        let mut acc = vec![Complex64::new(0.0, 0.0); p2];
        let w = 0.5 / self.kernel.angles as f64;
        for q in 0..self.kernel.angles {
            let (a, b) = (&self.alpha[q], &self.alpha_perp[q]);
            self.padded(
                &mut b1,
                |i, nb| fh[nb] * a[i] + gh[nb] * Complex64::new(0.0, b[i]),
                &mut sp,
            );
            self.padded(
                &mut b2,
                |i, nb| gh[nb] * a[i] + fh[nb] * Complex64::new(0.0, b[i]),
                &mut sp,
            );
            for ((s, x), y) in acc.iter_mut().zip(&b1).zip(&b2) {
                s.re += w * (x.re * x.im + y.re * y.im);
            }
        }
        let lm = &self.loss_modes;
        self.padded(
            &mut b1,
            |i, nb| fh[nb] + gh[nb] * Complex64::new(0.0, lm[i]),
            &mut sp,
        );
        self.padded(
            &mut b2,
            |i, nb| gh[nb] + fh[nb] * Complex64::new(0.0, lm[i]),
            &mut sp,
        );
        for ((s, x), y) in acc.iter_mut().zip(&b1).zip(&b2) {
            s.re -= 0.5 * (x.re * x.im + y.re * y.im);
        }
        Ok(self.finish(acc, &mut sp))
    }
}
