//! FFT plumbing shared by the spectral collision operators and the Vlasov field term.
//!
//! Grid functions live on the `N+1` endpoint-inclusive nodes; spectral work uses the
//! periodic nodes `0..N` and writes node `N` back as a copy of node `0`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Signed frequency of FFT bin `k` for length `n`; the Nyquist bin maps to `None`.
pub fn frequency(k: usize, n: usize) -> Option<i64> {
    let half = n / 2;
    if k < half {
        Some(k as i64)
    } else if k == half {
        None
    } else {
        Some(k as i64 - n as i64)
    }
}

/// Bin holding signed frequency `f` in a length-`n` transform.
pub fn bin(f: i64, n: usize) -> usize {
    f.rem_euclid(n as i64) as usize
}

/// Square 2D transform built from row transforms and in-place transposes.
#[derive(Clone)]
pub struct Fft2 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl std::fmt::Debug for Fft2 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch_len,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.scratch_len]
    }

    /// Unnormalized forward transform of a row-major `n x n` array.
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.run(&*self.forward, buf, scratch);
    }

    /// Unnormalized inverse transform.
    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.run(&*self.inverse, buf, scratch);
    }

    fn run(&self, plan: &dyn Fft<f64>, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n * self.n);
        plan.process_with_scratch(buf, scratch);
        transpose(buf, self.n);
        plan.process_with_scratch(buf, scratch);
        transpose(buf, self.n);
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Periodic part of a 2D node array (`(n+1)^2` values) as a complex `n x n` array.
pub fn periodic_2d(f: &[f64], n: usize, out: &mut [Complex64]) {
    let m = n + 1;
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = Complex64::new(f[i * m + j], 0.0);
        }
    }
}

/// Write the real part of a periodic `n x n` array back onto `(n+1)^2` nodes.
pub fn nodes_from_periodic_2d(src: &[Complex64], n: usize, out: &mut [f64]) {
    let m = n + 1;
    for i in 0..=n {
        for j in 0..=n {
            out[i * m + j] = src[(i % n) * n + (j % n)].re;
        }
    }
}

/// Same as [`nodes_from_periodic_2d`] for the imaginary part.
pub fn nodes_from_periodic_2d_im(src: &[Complex64], n: usize, out: &mut [f64]) {
    let m = n + 1;
    for i in 0..=n {
        for j in 0..=n {
            out[i * m + j] = src[(i % n) * n + (j % n)].im;
        }
    }
}

/// Spectral first derivative of periodic 1D samples over a period of length `2L`.
#[derive(Clone)]
pub struct Derivative1d {
    n: usize,
    xi: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Derivative1d {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Derivative1d").field("n", &self.n).finish()
    }
}

impl Derivative1d {
    pub fn new(n: usize, half_period: f64) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            xi: std::f64::consts::PI / half_period,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Differentiate the periodic samples in `buf` (length `n`) in place.
    pub fn apply(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
        let scale = 1.0 / self.n as f64;
        for (k, c) in buf.iter_mut().enumerate() {
            *c = match frequency(k, self.n) {
                Some(f) => *c * Complex64::new(0.0, self.xi * f as f64 * scale),
                None => Complex64::new(0.0, 0.0),
            };
        }
        self.inverse.process(buf);
    }

    /// Derivative of two real periodic signals at once, packed as `a + i b`.
    pub fn apply_pair(&self, a: &[f64], b: &[f64], da: &mut [f64], db: &mut [f64]) {
        let mut buf: Vec<Complex64> = a
            .iter()
            .zip(b)
            .map(|(&x, &y)| Complex64::new(x, y))
            .collect();
        self.apply(&mut buf);
        for k in 0..self.n {
            da[k] = buf[k].re;
            db[k] = buf[k].im;
        }
    }
}
