//! Slowly varying normalizers, the Young function `phi_{p,r}`, Luxemburg
//! norms and weak-`L^p` norms.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{ln, ln1p, powf, sqrt};
use crate::quad::Law;
use crate::stats;

/// Default bisection tolerance on the expectation scale.
pub const DEFAULT_TOL: f64 = 1e-10;

/// `L(x) = max(ln x, 1)`.
pub fn slow_log(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("L(x) needs x > 0, got {x}")));
    }
    Ok(ln(x).max(1.0))
}

/// `LL(x) = L(L(x))`.
pub fn slow_log_log(x: f64) -> Result<f64> {
    slow_log(slow_log(x)?)
}

/// `L` on values already known to be positive.
pub(crate) fn l_pos(x: f64) -> f64 {
    ln(x).max(1.0)
}

pub(crate) fn ll_pos(x: f64) -> f64 {
    l_pos(l_pos(x))
}

/// Exponents of `phi_{p,r}(x) = x^p (1 + ln(1 + x))^r`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrliczParams {
    pub p: f64,
    pub r: f64,
}

impl OrliczParams {
    /// Parameters of an Orlicz space: `p > 1`, `r >= 0`.
    pub fn new(p: f64, r: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::Domain(format!("Orlicz exponent p must exceed 1, got {p}")));
        }
        Self::gauge(p, r)
    }

    /// Like [`OrliczParams::new`] but only requires `p > 0`. The Luxemburg
    /// functional is then a quasi-norm; it is needed for `||eps||_{2 gamma, r}`
    /// with `gamma < 1`.
    pub fn gauge(p: f64, r: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain(format!("exponent p must be positive, got {p}")));
        }
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("logarithmic weight r must be nonnegative, got {r}")));
        }
        Ok(OrliczParams { p, r })
    }

    /// The plain `L^2` norm.
    pub fn l2() -> Self {
        OrliczParams { p: 2.0, r: 0.0 }
    }
}

/// `phi_{p,r}(x)` for `x >= 0`.
pub fn phi(params: OrliczParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let base = powf(x, params.p);
    if params.r == 0.0 {
        base
    } else {
        base * powf(1.0 + ln1p(x), params.r)
    }
}

fn phi_derivative(params: OrliczParams, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let g = 1.0 + ln1p(x);
    let (p, r) = (params.p, params.r);
    let mut out = p * powf(x, p - 1.0) * powf(g, r);
    if r != 0.0 {
        out += powf(x, p) * r * powf(g, r - 1.0) / (1.0 + x);
    }
    out
}

/// A finite sample with a free-form provenance label.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    pub provenance: String,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("sample set is empty".into()));
        }
        check_finite(&values)?;
        Ok(SampleSet { values, provenance: provenance.into() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_finite(xs: &[f64]) -> Result<()> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(k) => Err(Error::Input(format!("sample {k} is not finite ({})", xs[k]))),
        None => Ok(()),
    }
}

/// Find the root of the decreasing function `g(lambda) - 1` by bracketing
/// and bisection in `lambda`.
fn solve_luxemburg<G: Fn(f64) -> f64>(g: G, lo0: f64, hi0: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo0, hi0);
    let mut guard = 0;
    while g(lo) <= 1.0 {
        lo *= 0.25;
        guard += 1;
        if guard > 2000 || lo == 0.0 {
            return Err(Error::Domain("could not bracket the Luxemburg norm from below".into()));
        }
    }
    guard = 0;
    while g(hi) > 1.0 {
        hi *= 4.0;
        guard += 1;
        if guard > 2000 || !hi.is_finite() {
            return Err(Error::Domain("could not bracket the Luxemburg norm from above".into()));
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Luxemburg norm of the empirical law of `xs`.
///
/// The samples are first divided by `max |x|`, so scaling the input by a
/// power of two scales the result exactly. Bisection runs until the bracket
/// collapses; `tol` is the guaranteed accuracy of `mean phi(|x|/lambda)`.
pub fn orlicz_norm_samples(xs: &[f64], params: OrliczParams, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if xs.is_empty() {
        return Err(Error::Input("sample set is empty".into()));
    }
    check_finite(xs)?;
    let m = xs.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if m == 0.0 {
        return Ok(0.0);
    }
    let scaled: Vec<f64> = xs.iter().map(|x| x.abs() / m).collect();
    let n = scaled.len() as f64;
    let g = |lam: f64| scaled.iter().map(|&x| phi(params, x / lam)).sum::<f64>() / n;
    let lam = solve_luxemburg(&g, 1e-12, 4.0 * (1.0 + params.r))?;
    let resid = g(lam) - 1.0;
    // at a collapsed bracket the residual is a rounding effect; only report
    // genuine failures
    if resid.abs() > tol && (g(lam * (1.0 - 4.0 * f64::EPSILON)) - 1.0).signum() == resid.signum() {
        return Err(Error::Domain(format!("Luxemburg bisection stalled with residual {resid}")));
    }
    Ok(lam * m)
}

/// Luxemburg norm with a delta-method standard error.
///
/// Linearizes `mean phi(|x|/lambda) = 1` around the root: the SE of the mean
/// divided by the slope of the mean in `lambda`.
pub fn orlicz_norm_samples_se(xs: &[f64], params: OrliczParams, tol: f64) -> Result<stats::MeanSe> {
    let lam = orlicz_norm_samples(xs, params, tol)?;
    if lam == 0.0 {
        return Ok(stats::MeanSe { mean: 0.0, se: 0.0 });
    }
    let terms: Vec<f64> = xs.iter().map(|x| phi(params, x.abs() / lam)).collect();
    let se_mean = stats::mean_se(&terms).se;
    let slope = xs
        .iter()
        .map(|x| {
            let a = x.abs();
            phi_derivative(params, a / lam) * a / (lam * lam)
        })
        .sum::<f64>()
        / xs.len() as f64;
    let se = if slope > 0.0 { se_mean / slope } else { 0.0 };
    Ok(stats::MeanSe { mean: lam, se })
}

/// Luxemburg norm of a law, with the expectation computed by quadrature
/// (or an exact finite sum for discrete laws). `nodes` is the node budget of
/// the composite rule.
pub fn orlicz_norm_law(law: &Law, params: OrliczParams, nodes: usize) -> Result<f64> {
    orlicz_norm_law_transform(law, |x| x, &[], params, nodes)
}

/// Luxemburg norm of `h(X)` for `X` with the given law; `breaks` lists the
/// kinks of `h`.
pub fn orlicz_norm_law_transform<H: Fn(f64) -> f64>(
    law: &Law,
    h: H,
    breaks: &[f64],
    params: OrliczParams,
    nodes: usize,
) -> Result<f64> {
    let second = law.expect(|x| h(x) * h(x), breaks, nodes);
    if !(second > 0.0) {
        return Ok(0.0);
    }
    let scale = sqrt(second);
    let g = |lam: f64| law.expect(|x| phi(params, h(x).abs() / lam), breaks, nodes);
    solve_luxemburg(g, 0.25 * scale, 4.0 * scale * (1.0 + params.r))
}

/// Empirical `L^p` norm `(mean |x|^p)^{1/p}`.
pub fn lp_norm_samples(xs: &[f64], p: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Input("sample set is empty".into()));
    }
    let m = xs.iter().map(|x| powf(x.abs(), p)).sum::<f64>() / xs.len() as f64;
    Ok(powf(m, 1.0 / p))
}

/// Weak-`L^p` norm of the empirical law: `(sup_t t^p P(|X| > t))^{1/p}`.
///
/// For a step tail the supremum is attained just below an order statistic,
/// so it equals `max_k t_(k)^p k / n` with `t_(1) >= t_(2) >= ...`.
pub fn weak_lp_norm_samples(xs: &[f64], p: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Input("sample set is empty".into()));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("weak-L^p exponent must be positive, got {p}")));
    }
    check_finite(xs)?;
    let mut a: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
    a.sort_by(|x, y| y.partial_cmp(x).expect("finite"));
    let n = a.len() as f64;
    let best = a
        .iter()
        .enumerate()
        .map(|(k, &t)| powf(t, p) * (k + 1) as f64 / n)
        .fold(0.0f64, f64::max);
    Ok(powf(best, 1.0 / p))
}
