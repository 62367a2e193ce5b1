//! Monte Carlo checks of two deviation inequalities for sums of independent
//! variables and of the multiparameter maximal ergodic inequality.
//!
//! Every check uses common random numbers across its threshold grid, so the
//! empirical probabilities are exactly monotone along the grid. A point
//! passes when `empirical <= bound + 3 SE`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::{replicate, replicate_rows, Executor};
use crate::fields::{rep_seed, simulate_block, FieldModel, InnovationSpec, Innovations};
use crate::lattice::{build_prefix_table, LatticeIndex, Rect};
use crate::math::{exp, ln, powi};
use crate::stats::proportion_se;

const TAIL_TAG: u64 = 0x7A11;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyPoint {
    pub threshold: f64,
    pub empirical: f64,
    pub se: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VerifyReport {
    pub suite: String,
    /// Human-readable echo of the inputs.
    pub setup: String,
    pub reps: usize,
    pub points: Vec<VerifyPoint>,
    pub all_pass: bool,
    /// Empirical probabilities are nonincreasing along the sorted grid.
    pub empirical_monotone: bool,
    /// Bounds are nonincreasing along the sorted grid.
    pub bound_monotone: bool,
}

fn nonincreasing_along(thresholds: &[f64], vals: &[f64]) -> bool {
    let mut order: Vec<usize> = (0..thresholds.len()).collect();
    order.sort_by(|&a, &b| thresholds[a].partial_cmp(&thresholds[b]).expect("finite thresholds"));
    order.windows(2).all(|w| vals[w[1]] <= vals[w[0]])
}

fn assemble(suite: &str, setup: String, reps: usize, grid: &[f64], hits: &[f64], bounds: &[f64]) -> VerifyReport {
    let w = grid.len();
    let mut counts = alloc::vec![0u64; w];
    for row in hits.chunks(w) {
        for (c, h) in counts.iter_mut().zip(row) {
            *c += *h as u64;
        }
    }
    let points: Vec<VerifyPoint> = (0..w)
        .map(|k| {
            let p = counts[k] as f64 / reps as f64;
            let se = proportion_se(p, reps);
            VerifyPoint { threshold: grid[k], empirical: p, se, bound: bounds[k], pass: p <= bounds[k] + 3.0 * se }
        })
        .collect();
    let emp: Vec<f64> = points.iter().map(|p| p.empirical).collect();
    VerifyReport {
        suite: suite.into(),
        setup,
        reps,
        all_pass: points.iter().all(|p| p.pass),
        empirical_monotone: nonincreasing_along(grid, &emp),
        bound_monotone: nonincreasing_along(grid, bounds),
        points,
    }
}

fn check_grid(grid: &[f64], reps: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Input("empty threshold grid".into()));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("threshold grid contains a non-finite value".into()));
    }
    if reps == 0 {
        return Err(Error::Input("reps must be positive".into()));
    }
    Ok(())
}

/// `(sum d_i, sum d_i^2)` for `n` i.i.d. innovations of one replication.
fn sum_and_square(innov: InnovationSpec, n: usize, seed: u64) -> (f64, f64) {
    let eps = Innovations::new(innov, seed);
    let (mut s, mut q) = (0.0, 0.0);
    for k in 0..n {
        let d = eps.at(&[k as i64]);
        s += d;
        q += d * d;
    }
    (s, q)
}

/// `2 exp(-x^2 / (2 (y + V^2)))`.
pub fn bercu_touati_bound(x: f64, y: f64, v2: f64) -> f64 {
    2.0 * exp(-x * x / (2.0 * (y + v2)))
}

/// `P(|sum d_i| > x, sum d_i^2 <= y)` against `2 exp(-x^2 / (2(y + V^2)))`
/// with `V^2 = n Var(d)`.
pub fn check_bercu_touati(
    exec: &dyn Executor,
    innov: InnovationSpec,
    n: usize,
    x_grid: &[f64],
    y: f64,
    reps: usize,
    seed: u64,
) -> Result<VerifyReport> {
    check_grid(x_grid, reps)?;
    innov.validate()?;
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("y must be nonnegative, got {y}")));
    }
    let v2 = n as f64 * innov.variance();
    let w = x_grid.len();
    let hits = replicate_rows(exec, reps, w, |r, row| {
        let (s, q) = sum_and_square(innov, n, rep_seed(seed, r));
        for (h, x) in row.iter_mut().zip(x_grid) {
            *h = if s.abs() > *x && q <= y { 1.0 } else { 0.0 };
        }
    });
    let bounds: Vec<f64> = x_grid.iter().map(|&x| bercu_touati_bound(x, y, v2)).collect();
    let setup = format!("innovation={} n={n} y={y} V2={v2} seed={seed}", innov.tag());
    Ok(assemble("bercu_touati", setup, reps, x_grid, &hits, &bounds))
}

/// `h(u) = (1 + u) ln(1 + u) - u`.
pub fn freedman_h(u: f64) -> f64 {
    (1.0 + u) * crate::math::ln1p(u) - u
}

/// `2 exp(-(y / c^2) h(x c / y))`.
pub fn freedman_bound(x: f64, y: f64, c: f64) -> f64 {
    2.0 * exp(-(y / (c * c)) * freedman_h(x * c / y))
}

/// `P(|sum d_i| > x)` against `2 exp(-(y/c^2) h(xc/y))` for bounded
/// innovations `|d| <= c` and `y >= sum E d_i^2`.
pub fn check_freedman(
    exec: &dyn Executor,
    innov: InnovationSpec,
    n: usize,
    x_grid: &[f64],
    y: f64,
    reps: usize,
    seed: u64,
) -> Result<VerifyReport> {
    check_grid(x_grid, reps)?;
    innov.validate()?;
    let c = innov.bound().ok_or_else(|| {
        Error::Capability(format!(
            "the Freedman-type bound needs bounded increments (there exists a c>0 with |d_i| <= c); {} is unbounded",
            innov.tag()
        ))
    })?;
    let v2 = n as f64 * innov.variance();
    if !(y >= v2) || !(y > 0.0) {
        return Err(Error::Domain(format!("y = {y} must be positive and at least sum E d_i^2 = {v2}")));
    }
    let w = x_grid.len();
    let hits = replicate_rows(exec, reps, w, |r, row| {
        let (s, _) = sum_and_square(innov, n, rep_seed(seed, r));
        for (h, x) in row.iter_mut().zip(x_grid) {
            *h = if s.abs() > *x { 1.0 } else { 0.0 };
        }
    });
    let bounds: Vec<f64> = x_grid.iter().map(|&x| freedman_bound(x, y, c)).collect();
    let setup = format!("innovation={} n={n} y={y} c={c} seed={seed}", innov.tag());
    Ok(assemble("freedman", setup, reps, x_grid, &hits, &bounds))
}

/// Map from the field to nonnegative values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Nonneg {
    Abs,
    Square,
    /// Values are used as they are and must already be nonnegative.
    Identity,
}

impl Nonneg {
    fn apply(&self, x: f64) -> f64 {
        match self {
            Nonneg::Abs => x.abs(),
            Nonneg::Square => x * x,
            Nonneg::Identity => x,
        }
    }
}

/// `int_1^U (ln u)^m du`, via `I_0 = U - 1`, `I_m = U (ln U)^m - m I_{m-1}`.
pub fn log_power_integral(m: usize, upper: f64) -> f64 {
    if upper <= 1.0 {
        return 0.0;
    }
    let l = ln(upper);
    let mut acc = upper - 1.0;
    for k in 1..=m {
        acc = upper * powi(l, k as i32) - k as f64 * acc;
    }
    acc
}

/// `int_1^inf P(Y > y u 2^{-d}) (ln u)^{d-1} du` for the empirical law of
/// `tail`; exact for the step-function tail.
pub fn ergodic_bound_empirical(tail: &[f64], y: f64, d: usize) -> f64 {
    let scale = powi(2.0, d as i32) / y;
    tail.iter().map(|&v| log_power_integral(d - 1, v * scale)).sum::<f64>() / tail.len() as f64
}

/// `P(sup_{n <= N} |n|^{-1} sum_{1 <= i <= n} Y_i > y)` against the maximal
/// ergodic bound, with the single-site tail estimated from `tail_reps`
/// independent draws of `Y_0`.
#[allow(clippy::too_many_arguments)]
pub fn check_maximal_ergodic(
    exec: &dyn Executor,
    model: &FieldModel,
    transform: Nonneg,
    n_max: u64,
    y_grid: &[f64],
    reps: usize,
    tail_reps: usize,
    seed: u64,
) -> Result<VerifyReport> {
    check_grid(y_grid, reps)?;
    model.validate()?;
    if let Some(y) = y_grid.iter().find(|y| !(**y > 0.0)) {
        return Err(Error::Domain(format!("levels y must be positive, got {y}")));
    }
    if n_max == 0 || tail_reps == 0 {
        return Err(Error::Input("block side and tail sample size must be positive".into()));
    }
    let d = model.dim();
    let block = Rect::anchored(&LatticeIndex::splat(d, n_max as i64))?;
    // probe for negative values before the main loop
    let probe = simulate_block(model, &block, rep_seed(seed, 0))?;
    if let Some(v) = probe.values().iter().map(|&x| transform.apply(x)).find(|v| *v < 0.0) {
        return Err(Error::Input(format!("transformed field takes the negative value {v}")));
    }
    let w = y_grid.len();
    let hits = replicate_rows(exec, reps, w, |r, row| {
        let grid = simulate_block(model, &block, rep_seed(seed, r)).expect("validated model").map(|x| transform.apply(x));
        let table = build_prefix_table(&grid);
        let ext = grid.extents().to_vec();
        let mut n = alloc::vec![1u64; d];
        let mut sup = 0.0f64;
        for &s in table.entries() {
            let card: u64 = n.iter().product();
            sup = sup.max(s / card as f64);
            let mut q = d;
            while q > 0 {
                q -= 1;
                if (n[q] as usize) < ext[q] {
                    n[q] += 1;
                    break;
                }
                n[q] = 1;
            }
        }
        for (h, y) in row.iter_mut().zip(y_grid) {
            *h = if sup > *y { 1.0 } else { 0.0 };
        }
    });
    let origin = LatticeIndex::zeros(d);
    let tail_seed = rep_seed(seed, TAIL_TAG as usize);
    let tail = replicate(exec, tail_reps, |k| {
        let eps = Innovations::new(model.innovation(), rep_seed(tail_seed, k));
        transform.apply(model.value_at(&origin, |s| eps.at(s)))
    });
    if let Some(v) = tail.iter().find(|v| **v < 0.0) {
        return Err(Error::Input(format!("transformed field takes the negative value {v}")));
    }
    let bounds: Vec<f64> = y_grid.iter().map(|&y| ergodic_bound_empirical(&tail, y, d)).collect();
    let setup = format!(
        "model={} d={d} transform={transform:?} N_max={n_max} tail_reps={tail_reps} seed={seed}",
        model.tag()
    );
    Ok(assemble("maximal_ergodic", setup, reps, y_grid, &hits, &bounds))
}
