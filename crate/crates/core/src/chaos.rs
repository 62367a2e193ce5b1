//! Probabilists' Hermite polynomials, Hermite expansion coefficients of
//! functions of a standard normal variable, and the series constants `C(f)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{exp, lgamma, ln};
use crate::quad::gauss_hermite_normal;

pub const DEFAULT_ORDER: usize = 20;
pub const DEFAULT_NODES: usize = 128;

/// `H_q(x)` via `H_{q+1} = x H_q - q H_{q-1}`.
pub fn hermite_eval(q: usize, x: f64) -> f64 {
    scaled_hermite(q, 1.0, x)
}

/// `H_0(x), ..., H_qmax(x)`.
pub fn hermite_all(qmax: usize, x: f64) -> Vec<f64> {
    let mut h = vec![1.0; qmax + 1];
    if qmax >= 1 {
        h[1] = x;
    }
    for q in 1..qmax {
        h[q + 1] = x * h[q] - q as f64 * h[q - 1];
    }
    h
}

/// `s^q H_q(a / s)`, computed without dividing by `s`:
/// `G_0 = 1`, `G_1 = a`, `G_{q+1} = a G_q - q s^2 G_{q-1}`.
/// At `s = 0` this is `a^q`.
pub fn scaled_hermite(q: usize, s: f64, a: f64) -> f64 {
    if q == 0 {
        return 1.0;
    }
    let s2 = s * s;
    let (mut g0, mut g1) = (1.0, a);
    for k in 1..q {
        let g2 = a * g1 - k as f64 * s2 * g0;
        g0 = g1;
        g1 = g2;
    }
    g1
}

/// `sum_{q>=1} c[q-1] H_q(x)`.
pub fn hermite_series(c: &[f64], x: f64) -> f64 {
    scaled_hermite_series(c, 1.0, x)
}

/// `sum_{q>=1} c[q-1] s^q H_q(a/s)`.
pub fn scaled_hermite_series(c: &[f64], s: f64, a: f64) -> f64 {
    let s2 = s * s;
    let (mut g0, mut g1) = (1.0, a);
    let mut total = 0.0;
    for (k, cq) in c.iter().enumerate() {
        // g1 holds G_{k+1}
        total += cq * g1;
        let g2 = a * g1 - (k + 1) as f64 * s2 * g0;
        g0 = g1;
        g1 = g2;
    }
    total
}

/// `E[H_q(sU + tV) | U = u] = s^q H_q(u)` for independent standard normals
/// and `s^2 + t^2 = 1`.
pub fn conditional_hermite_projection(q: usize, s: f64, u: f64) -> f64 {
    if q == 0 {
        return 1.0;
    }
    if s == 0.0 {
        return 0.0;
    }
    crate::math::powi(s, q as i32) * hermite_eval(q, u)
}

/// `ln q!`.
pub fn ln_factorial(q: usize) -> f64 {
    lgamma(q as f64 + 1.0)
}

/// Expansion coefficients of `f(N)`, `N` standard normal.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HermiteCoeffs {
    /// `E f(N)`, the centering term.
    pub c0: f64,
    /// `c[q-1] = c_q = E[f(N) H_q(N)] / q!` for `q = 1..=Q`.
    pub c: Vec<f64>,
    pub nodes: usize,
    /// Set when `nodes < 2 Q`.
    pub precision_warning: bool,
}

impl HermiteCoeffs {
    pub fn order(&self) -> usize {
        self.c.len()
    }

    /// `c_0 + sum c_q H_q(x)`.
    pub fn resynthesize(&self, x: f64) -> f64 {
        self.c0 + hermite_series(&self.c, x)
    }
}

/// Coefficients `c_1..c_Q` of `f` by Gauss-Hermite quadrature.
pub fn hermite_coeffs<F: Fn(f64) -> f64>(f: F, order: usize, nodes: usize) -> HermiteCoeffs {
    let nodes = nodes.max(1);
    let rule = gauss_hermite_normal(nodes);
    let mut acc = vec![0.0; order + 1];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let fx = f(*x) * w;
        for (a, h) in acc.iter_mut().zip(hermite_all(order, *x)) {
            *a += fx * h;
        }
    }
    let c = (1..=order).map(|q| acc[q] * exp(-ln_factorial(q))).collect();
    HermiteCoeffs { c0: acc[0], c, nodes, precision_warning: nodes < 2 * order }
}

/// Which maximal inequality a series constant feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ChaosProfile {
    /// Rectangles in `Z^d`: exponent `d - 1/2`.
    Rectangles,
    /// Set sequences / unions of rectangles: exponent `1/2`.
    Unions,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesConstant {
    pub value: f64,
    /// The last term exceeds `1e-6` of the partial sum.
    pub tail_flag: bool,
}

/// `C(f) = sum_q sqrt(q!) q^e |c_q|`, terms assembled in log space.
pub fn series_constant(c: &[f64], d: usize, profile: ChaosProfile) -> SeriesConstant {
    let e = match profile {
        ChaosProfile::Rectangles => d as f64 - 0.5,
        ChaosProfile::Unions => 0.5,
    };
    let mut total = 0.0;
    let mut last = 0.0;
    for (k, cq) in c.iter().enumerate() {
        let q = k + 1;
        last = if *cq == 0.0 { 0.0 } else { exp(0.5 * ln_factorial(q) + e * ln(q as f64) + ln(cq.abs())) };
        total += last;
    }
    SeriesConstant { value: total, tail_flag: total > 0.0 && last > 1e-6 * total }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_hermite_values() {
        assert_eq!(hermite_eval(2, 2.0), 3.0);
        assert_eq!(hermite_eval(3, 2.0), 2.0);
        assert_eq!(hermite_eval(0, -7.3), 1.0);
        assert_eq!(hermite_all(3, 2.0), [1.0, 2.0, 3.0, 2.0]);
    }

    #[test]
    fn scaled_recurrence_matches_direct_form() {
        for q in 0..12 {
            for &(s, a) in &[(0.3, -0.7), (0.9, 1.4), (1.0, 2.5)] {
                let direct = libm::pow(s, q as f64) * hermite_eval(q, a / s);
                let g = scaled_hermite(q, s, a);
                assert!((g - direct).abs() <= 1e-11 * direct.abs().max(1.0), "q={q} {g} {direct}");
            }
        }
        assert_eq!(scaled_hermite(3, 0.0, 2.0), 8.0);
    }

    #[test]
    fn coefficients_of_polynomials() {
        let h3 = hermite_coeffs(|x| hermite_eval(3, x), 10, 64);
        for (k, c) in h3.c.iter().enumerate() {
            let want = if k + 1 == 3 { 1.0 } else { 0.0 };
            assert!((c - want).abs() < 1e-10, "q={} {c}", k + 1);
        }
        let mix = hermite_coeffs(|x| x * x - 1.0 + x, 6, 64);
        assert!((mix.c[0] - 1.0).abs() < 1e-12 && (mix.c[1] - 1.0).abs() < 1e-12);
        assert!(mix.c0.abs() < 1e-12);
        assert!(hermite_coeffs(|x| x, 20, 16).precision_warning);
    }

    #[test]
    fn series_constants() {
        let h2 = series_constant(&[0.0, 1.0], 2, ChaosProfile::Rectangles);
        assert!((h2.value - 4.0).abs() < 1e-12);
        assert_eq!(series_constant(&[1.0], 5, ChaosProfile::Rectangles).value, 1.0);
        let both = series_constant(&[1.0, 1.0], 1, ChaosProfile::Rectangles);
        assert!((both.value - 3.0).abs() < 1e-12);
        assert!(both.tail_flag);
    }

    #[test]
    fn conditional_projection_edges() {
        assert_eq!(conditional_hermite_projection(2, 0.0, 1.3), 0.0);
        assert_eq!(conditional_hermite_projection(3, 1.0, 2.0), hermite_eval(3, 2.0));
    }
}
