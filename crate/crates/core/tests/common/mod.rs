#![allow(dead_code)]

use std::f64::consts::PI;

use kinap::grid::{Primitives, VelocityGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn l2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    l2(&d) / l2(b)
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Closed-form Maxwellian sampled at the grid nodes, written out independently of the crate.
pub fn gaussian(grid: &VelocityGrid, rho: f64, u: [f64; 2], t: f64) -> Vec<f64> {
    let d = grid.dim() as i32;
    let c = rho / (2.0 * PI * t).powi(d).sqrt();
    (0..grid.len())
        .map(|j| {
            let v = grid.velocity(j);
            let mut r2 = (v[0] - u[0]).powi(2);
            if d == 2 {
                r2 += (v[1] - u[1]).powi(2);
            }
            c * (-r2 / (2.0 * t)).exp()
        })
        .collect()
}

/// Two half-density Maxwellians drifting at `±u1`.
pub fn double_peak(grid: &VelocityGrid, omega: f64, u1: f64, x: f64) -> Vec<f64> {
    let rho = (2.0 + (omega * x).sin()) / 3.0;
    let t = (3.0 + (omega * x).cos()) / 4.0;
    let a = gaussian(grid, 0.5 * rho, [u1, 0.0], t);
    let b = gaussian(grid, 0.5 * rho, [-u1, 0.0], t);
    a.iter().zip(&b).map(|(a, b)| a + b).collect()
}

pub fn random_primitives(r: &mut impl Rng) -> Primitives {
    Primitives::new(
        r.gen_range(0.5..2.0),
        [r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5)],
        r.gen_range(0.6..1.4),
    )
}

/// Smooth perturbation `M(v) p(v)` with a random quadratic polynomial `p`.
pub fn random_perturbation(grid: &VelocityGrid, m: &[f64], r: &mut impl Rng) -> Vec<f64> {
    let c: Vec<f64> = (0..6).map(|_| r.gen_range(-0.3..0.3)).collect();
    (0..grid.len())
        .map(|j| {
            let [a, b] = grid.velocity(j);
            m[j] * (c[0] + c[1] * a + c[2] * b + c[3] * a * a + c[4] * a * b + c[5] * b * b)
        })
        .collect()
}

fn signed(k: usize, n: usize) -> Option<i64> {
    let k = k as i64;
    let n = n as i64;
    if 2 * k < n {
        Some(k)
    } else if 2 * k == n {
        None
    } else {
        Some(k - n)
    }
}

fn retained(n: usize) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if let (Some(x), Some(y)) = (signed(a, n), signed(b, n)) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Fourier coefficients of the periodic part by direct summation.
fn dft(f: &[f64], n: usize, modes: &[(i64, i64)]) -> Vec<(f64, f64)> {
    let m = n + 1;
    modes
        .iter()
        .map(|&(k1, k2)| {
            let (mut re, mut im) = (0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    let th = -2.0 * PI * (k1 * i as i64 + k2 * j as i64) as f64 / n as f64;
                    re += f[i * m + j] * th.cos();
                    im += f[i * m + j] * th.sin();
                }
            }
            let s = 1.0 / (n * n) as f64;
            (re * s, im * s)
        })
        .collect()
}

/// Real part of the trigonometric sum at every node; node `N` repeats node `0`.
fn synth(coef: &[(f64, f64)], n: usize, modes: &[(i64, i64)]) -> Vec<f64> {
    let m = n + 1;
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let (pi, pj) = (i % n, j % n);
            let mut s = 0.0;
            for (c, &(k1, k2)) in coef.iter().zip(modes) {
                let th = 2.0 * PI * (k1 * pi as i64 + k2 * pj as i64) as f64 / n as f64;
                s += c.0 * th.cos() - c.1 * th.sin();
            }
            out[i * m + j] = s;
        }
    }
    out
}

fn kernel_phi(r: f64, s: f64) -> f64 {
    if s == 0.0 {
        2.0 * r
    } else {
        2.0 * (r * s).sin() / s
    }
}

/// `B(l, m)` of the Carleman form, averaged over `angles` directions on the half circle.
pub fn carleman_mode(l: (i64, i64), m: (i64, i64), xi: f64, radius: f64, angles: usize) -> f64 {
    let mut s = 0.0;
    for q in 0..angles {
        let th = PI * q as f64 / angles as f64;
        let (e1, e2) = (th.cos(), th.sin());
        let a = xi * (l.0 as f64 * e1 + l.1 as f64 * e2);
        let b = xi * (-(m.0 as f64) * e2 + m.1 as f64 * e1);
        s += kernel_phi(radius, a) * kernel_phi(radius, b);
    }
    s / angles as f64
}

/// Fourier-Galerkin Boltzmann collision term by the direct double sum over modes,
/// `Q_k = Σ_{l+m=k} f_l f_m [B(l,m) - B(m,m)]`.
pub fn galerkin_boltzmann(grid: &VelocityGrid, radius: f64, angles: usize, f: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let xi = PI / grid.extent();
    let modes = retained(n);
    let fh = dft(f, n, &modes);
    let lim = (n / 2) as i64;
    let index = |k: (i64, i64)| -> Option<usize> {
        (k.0.abs() < lim && k.1.abs() < lim)
            .then(|| ((k.0 + lim - 1) * (2 * lim - 1) + (k.1 + lim - 1)) as usize)
    };
    let side = (2 * lim - 1) as usize;
    let mut q = vec![(0.0, 0.0); side * side];
    let diag: Vec<f64> = modes
        .iter()
        .map(|&m| carleman_mode(m, m, xi, radius, angles))
        .collect();
    for (il, &l) in modes.iter().enumerate() {
        for (im, &m) in modes.iter().enumerate() {
            if let Some(k) = index((l.0 + m.0, l.1 + m.1)) {
                let w = carleman_mode(l, m, xi, radius, angles) - diag[im];
                let (a, b) = (fh[il], fh[im]);
                q[k].0 += w * (a.0 * b.0 - a.1 * b.1);
                q[k].1 += w * (a.0 * b.1 + a.1 * b.0);
            }
        }
    }
    let coef: Vec<(f64, f64)> = modes.iter().map(|&k| q[index(k).unwrap()]).collect();
    synth(&coef, n, &modes)
}

fn spectral_partials(f: &[f64], n: usize, modes: &[(i64, i64)], xi: f64) -> [Vec<f64>; 2] {
    let fh = dft(f, n, modes);
    let d = |axis: usize| -> Vec<(f64, f64)> {
        fh.iter()
            .zip(modes)
            .map(|(c, k)| {
                let w = xi * if axis == 0 { k.0 } else { k.1 } as f64;
                (-w * c.1, w * c.0)
            })
            .collect()
    };
    [synth(&d(0), n, modes), synth(&d(1), n, modes)]
}

/// Landau term `∇·(D∇f - F f)`: `D`, `F` by direct trapezoid convolution over every node,
/// derivatives by direct trigonometric interpolation on the periodic nodes.
pub fn landau_direct(grid: &VelocityGrid, gamma: f64, f: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let len = grid.len();
    let w = grid.weights();
    let modes = retained(n);
    let xi = PI / grid.extent();
    let mut d = vec![[0.0; 3]; len];
    let mut drift = vec![[0.0; 2]; len];
    for a in 0..len {
        let va = grid.velocity(a);
        for b in 0..len {
            let vb = grid.velocity(b);
            let z = [va[0] - vb[0], va[1] - vb[1]];
            let r2 = z[0] * z[0] + z[1] * z[1];
            if r2 == 0.0 {
                continue;
            }
            let r = r2.sqrt();
            let wf = w[b] * f[b];
            let p = r.powf(gamma);
            d[a][0] += wf * p * (r2 - z[0] * z[0]);
            d[a][1] += wf * p * (-z[0] * z[1]);
            d[a][2] += wf * p * (r2 - z[1] * z[1]);
            drift[a][0] -= wf * p * z[0];
            drift[a][1] -= wf * p * z[1];
        }
    }
    let [g1, g2] = spectral_partials(f, n, &modes, xi);
    let j1: Vec<f64> = (0..len)
        .map(|k| d[k][0] * g1[k] + d[k][1] * g2[k] - drift[k][0] * f[k])
        .collect();
    let j2: Vec<f64> = (0..len)
        .map(|k| d[k][1] * g1[k] + d[k][2] * g2[k] - drift[k][1] * f[k])
        .collect();
    let [a, _] = spectral_partials(&j1, n, &modes, xi);
    let [_, b] = spectral_partials(&j2, n, &modes, xi);
    a.iter().zip(&b).map(|(a, b)| a + b).collect()
}

/// Exact solution of the Riemann problem for a polytropic gas, sampled at `s = x/t`.
pub struct ExactRiemann {
    gamma: f64,
    left: [f64; 3],
    right: [f64; 3],
    pub p_star: f64,
    pub u_star: f64,
}

impl ExactRiemann {
    /// States are `(ρ, u, p)`.
    pub fn new(gamma: f64, left: [f64; 3], right: [f64; 3]) -> Self {
        let mut s = Self {
            gamma,
            left,
            right,
            p_star: 0.0,
            u_star: 0.0,
        };
        let jump = |p: f64| s.wave(p, left) + s.wave(p, right) + right[1] - left[1];
        let (mut lo, mut hi) = (1e-10, 10.0 * left[2].max(right[2]));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if jump(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let p = 0.5 * (lo + hi);
        s.p_star = p;
        s.u_star = 0.5 * (left[1] + right[1]) + 0.5 * (s.wave(p, right) - s.wave(p, left));
        s
    }

    fn wave(&self, p: f64, k: [f64; 3]) -> f64 {
        let g = self.gamma;
        let (r, pk) = (k[0], k[2]);
        if p > pk {
            let a = 2.0 / ((g + 1.0) * r);
            let b = (g - 1.0) / (g + 1.0) * pk;
            (p - pk) * (a / (p + b)).sqrt()
        } else {
            let c = (g * pk / r).sqrt();
            2.0 * c / (g - 1.0) * ((p / pk).powf((g - 1.0) / (2.0 * g)) - 1.0)
        }
    }

    /// `(ρ, u, p)` for a left rarefaction and right shock, the Sod configuration.
    pub fn sample(&self, s: f64) -> [f64; 3] {
        let g = self.gamma;
        let [rl, ul, pl] = self.left;
        let [rr, ur, pr] = self.right;
        let (ps, us) = (self.p_star, self.u_star);
        if s < us {
            let al = (g * pl / rl).sqrt();
            let head = ul - al;
            let ast = al * (ps / pl).powf((g - 1.0) / (2.0 * g));
            if s < head {
                return self.left;
            }
            if s > us - ast {
                return [rl * (ps / pl).powf(1.0 / g), us, ps];
            }
            let u = 2.0 / (g + 1.0) * (al + 0.5 * (g - 1.0) * ul + s);
            let a = 2.0 / (g + 1.0) * (al + 0.5 * (g - 1.0) * (ul - s));
            let r = rl * (a / al).powf(2.0 / (g - 1.0));
            [r, u, r * a * a / g]
        } else {
            let ar = (g * pr / rr).sqrt();
            let q = ps / pr;
            let k = (g - 1.0) / (g + 1.0);
            let shock = ur + ar * ((g + 1.0) / (2.0 * g) * q + (g - 1.0) / (2.0 * g)).sqrt();
            if s < shock {
                [rr * (q + k) / (k * q + 1.0), us, ps]
            } else {
                self.right
            }
        }
    }
}
