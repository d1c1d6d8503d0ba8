//! Upwind and MUSCL reconstructions along the spatial direction.

use crate::error::{Error, Result};

/// Spatial order of a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn from_usize(k: usize) -> Result<Self> {
        match k {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::InvalidParameter(format!(
                "order must be 1 or 2, got {k}"
            ))),
        }
    }

    pub fn as_usize(self) -> usize {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Upwind flux of `v f` between stations `s[1]` and `s[2]`, using the reconstructed
/// right edge of `s[1]` for `v > 0` and the left edge of `s[2]` for `v < 0`.
/// `s[0]` and `s[3]` are only read at second order.
pub fn upwind_flux(v: &[f64], s: [&[f64]; 4], order: Order, out: &mut [f64]) {
    let [a, b, c, d] = s;
    for k in 0..v.len() {
        let vk = v[k];
        out[k] = if vk > 0.0 {
            let mut left = b[k];
            if order == Order::Second {
                left += 0.5 * minmod(c[k] - b[k], b[k] - a[k]);
            }
            vk * left
        } else if vk < 0.0 {
            let mut right = c[k];
            if order == Order::Second {
                right -= 0.5 * minmod(d[k] - c[k], c[k] - b[k]);
            }
            vk * right
        } else {
            0.0
        };
    }
}

/// Split a per-node velocity into its positive and negative parts.
pub fn split(v: f64) -> (f64, f64) {
    (v.max(0.0), v.min(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minmod_cases() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-3.0, -2.0), -2.0);
        assert_eq!(minmod(1.0, -1.0), 0.0);
        assert_eq!(minmod(0.0, 5.0), 0.0);
    }

    #[test]
    fn linear_data_is_reconstructed_exactly() {
        let v = [2.0, -1.5, 0.0];
        let st: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64 * 0.3 + 1.0; 3]).collect();
        let mut out = [0.0; 3];
        upwind_flux(
            &v,
            [&st[0], &st[1], &st[2], &st[3]],
            Order::Second,
            &mut out,
        );
        // the interface value of the linear profile is 1.45
        assert!((out[0] - 2.0 * 1.45).abs() < 1e-15);
        assert!((out[1] + 1.5 * 1.45).abs() < 1e-15);
        assert_eq!(out[2], 0.0);
    }

    #[test]
    fn first_order_is_donor_cell() {
        let v = [1.0, -1.0];
        let (a, b, c, d) = ([0.0; 2], [1.0; 2], [5.0; 2], [0.0; 2]);
        let mut out = [0.0; 2];
        upwind_flux(&v, [&a, &b, &c, &d], Order::First, &mut out);
        assert_eq!(out, [1.0, -5.0]);
    }

    #[test]
    fn limiter_engages_at_extremum() {
        let v = [1.0];
        let mut out = [0.0];
        upwind_flux(
            &v,
            [&[0.0], &[1.0], &[0.0], &[0.0]],
            Order::Second,
            &mut out,
        );
        assert_eq!(out[0], 1.0);
    }
}
