//! Gaussian quadrature rules and expectations under simple one-dimensional laws.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{cos, exp, sqrt};

/// Nodes and weights of an `n`-point rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    for i in 0..m {
        let mut z = cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    Rule { nodes, weights }
}

/// Gauss-Hermite rule for the standard normal law: `E f(Z) ~ sum w_k f(x_k)`.
///
/// Built from the physicists' rule (weight `e^{-t^2}`) by `x = sqrt(2) t`,
/// `w = w_phys / sqrt(pi)`.
pub fn gauss_hermite_normal(n: usize) -> Rule {
    assert!(n >= 1);
    // pi^{-1/4}
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut t = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => sqrt(2.0 * nf + 1.0) - 1.85575 * libm::pow(2.0 * nf + 1.0, -0.16667),
            1 => z - 1.14 * libm::pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * t[0],
            3 => 1.91 * z - 0.91 * t[1],
            _ => 2.0 * z - t[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * sqrt(2.0 / (jf + 1.0)) * p2 - sqrt(jf / (jf + 1.0)) * p3;
            }
            pp = sqrt(2.0 * nf) * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 3e-14 * z1.abs().max(1.0) {
                break;
            }
        }
        t[i] = z;
        t[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let inv_sqrt_pi = 1.0 / sqrt(PI);
    Rule {
        nodes: t.iter().map(|x| x * core::f64::consts::SQRT_2).collect(),
        weights: w.iter().map(|x| x * inv_sqrt_pi).collect(),
    }
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]` using `panels`
/// equal panels of the given rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &Rule) -> f64 {
    if b <= a {
        return 0.0;
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Composite integral over `[a, b]` with extra panel boundaries at `breaks`,
/// so integrands with kinks at known points keep full accuracy.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    max_width: f64,
    rule: &Rule,
) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > a && *x < b).collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    cuts.dedup();
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let panels = libm::ceil((hi - lo) / max_width).max(1.0) as usize;
        total += integrate(&f, lo, hi, panels, rule);
    }
    total
}

/// Number of standard deviations covered by normal-law integrals.
const NORMAL_SPAN: f64 = 13.0;
const PANEL_ORDER: usize = 16;

/// A one-dimensional law whose expectations can be computed deterministically.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    /// Centered normal with standard deviation `sd`.
    Normal { sd: f64 },
    /// Finite support: `(value, probability)` atoms.
    Discrete(Vec<(f64, f64)>),
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// Symmetric triangular density on `[-half_width, half_width]`
    /// (difference of two i.i.d. uniforms of half-width `half_width / 2`).
    Triangular { half_width: f64 },
}

impl Law {
    /// `E f(X)`. `breaks` lists points where `f` is not smooth; `0` is
    /// always treated as a breakpoint. `nodes` sets the total node budget of
    /// the composite rule (at least one 16-point panel per segment).
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64], nodes: usize) -> f64 {
        let rule = gauss_legendre(PANEL_ORDER);
        let mut all_breaks: Vec<f64> = breaks.to_vec();
        all_breaks.push(0.0);
        let panels = (nodes / PANEL_ORDER).max(2) as f64;
        match self {
            Law::Normal { sd } => {
                if *sd == 0.0 {
                    return f(0.0);
                }
                let span = NORMAL_SPAN * sd;
                let norm = 1.0 / (sd * sqrt(2.0 * PI));
                let density = |x: f64| norm * exp(-0.5 * (x / sd) * (x / sd));
                integrate_with_breaks(
                    |x| f(x) * density(x),
                    -span,
                    span,
                    &all_breaks,
                    2.0 * span / panels,
                    &rule,
                )
            }
            Law::Discrete(atoms) => atoms.iter().map(|(x, p)| p * f(*x)).sum(),
            Law::Uniform { half_width } => {
                let h = *half_width;
                integrate_with_breaks(f, -h, h, &all_breaks, 2.0 * h / panels, &rule) / (2.0 * h)
            }
            Law::Triangular { half_width } => {
                let h = *half_width;
                integrate_with_breaks(
                    |x| f(x) * (h - x.abs()) / (h * h),
                    -h,
                    h,
                    &all_breaks,
                    2.0 * h / panels,
                    &rule,
                )
            }
        }
    }

    /// Largest absolute value in the support, if bounded.
    pub fn bound(&self) -> Option<f64> {
        match self {
            Law::Normal { sd } => (*sd == 0.0).then_some(0.0),
            Law::Discrete(atoms) => Some(atoms.iter().map(|(x, _)| x.abs()).fold(0.0, f64::max)),
            Law::Uniform { half_width } | Law::Triangular { half_width } => Some(*half_width),
        }
    }

    /// `P(X > t)`, exact.
    pub fn survival(&self, t: f64) -> f64 {
        match self {
            Law::Normal { sd } => {
                if *sd == 0.0 {
                    return if t < 0.0 { 1.0 } else { 0.0 };
                }
                0.5 * crate::math::erfc(t / (sd * core::f64::consts::SQRT_2))
            }
            Law::Discrete(atoms) => atoms.iter().filter(|(x, _)| *x > t).map(|(_, p)| p).sum(),
            Law::Uniform { half_width: h } => ((h - t) / (2.0 * h)).clamp(0.0, 1.0),
            Law::Triangular { half_width: h } => {
                if t >= *h {
                    0.0
                } else if t <= -h {
                    1.0
                } else if t >= 0.0 {
                    0.5 * (h - t) * (h - t) / (h * h)
                } else {
                    1.0 - 0.5 * (h + t) * (h + t) / (h * h)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let r = gauss_legendre(10);
        // degree 19 is the exactness limit of a 10-point rule
        let approx = integrate(|x| x.powi(18) + x.powi(3), -1.0, 1.0, 1, &r);
        assert!((approx - 2.0 / 19.0).abs() < 1e-14, "{approx}");
        let w: f64 = r.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_rule_reproduces_normal_moments() {
        for &n in &[8usize, 64, 128] {
            let r = gauss_hermite_normal(n);
            let m = |k: i32| -> f64 { r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(k)).sum() };
            assert!((m(0) - 1.0).abs() < 1e-12, "n={n} {}", m(0));
            assert!((m(2) - 1.0).abs() < 1e-12);
            assert!((m(4) - 3.0).abs() < 1e-11);
            assert!((m(6) - 15.0).abs() < 1e-10);
            assert!(m(3).abs() < 1e-12);
        }
    }

    #[test]
    fn law_expectations() {
        let n = Law::Normal { sd: 2.0 };
        assert!((n.expect(|x| x * x, &[], 256) - 4.0).abs() < 1e-12);
        assert!((n.expect(|x| x.abs(), &[], 256) - 2.0 * (2.0 / PI).sqrt()).abs() < 1e-12);
        let u = Law::Uniform { half_width: 3f64.sqrt() };
        assert!((u.expect(|x| x * x, &[], 64) - 1.0).abs() < 1e-13);
        let t = Law::Triangular { half_width: 2.0 * 3f64.sqrt() };
        // variance of the difference of two unit-variance uniforms
        assert!((t.expect(|x| x * x, &[], 64) - 2.0).abs() < 1e-12);
        assert!((t.expect(|_| 1.0, &[], 64) - 1.0).abs() < 1e-13);
        let d = Law::Discrete(alloc::vec![(-1.0, 0.5), (1.0, 0.5)]);
        assert_eq!(d.expect(|x| x * x, &[], 1), 1.0);
    }

    #[test]
    fn survival_functions() {
        assert!((Law::Normal { sd: 1.0 }.survival(0.0) - 0.5).abs() < 1e-15);
        assert!((Law::Triangular { half_width: 1.0 }.survival(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(Law::Uniform { half_width: 1.0 }.survival(2.0), 0.0);
    }
}
