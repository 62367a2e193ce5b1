//! LIL-normalized maximal functions and Monte Carlo estimates of their
//! `L^p` norms.
//!
//! For a field on the anchored block `[1, N]^d`,
//! `M = max_n |S_n| / sqrt(|n| LL(|n|))` over all `n` in the block (full
//! mode) or over `n` with power-of-two coordinates (dyadic mode).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::{replicate, replicate_rows, Executor};
use crate::fields::{rep_seed, simulate_block, FieldModel};
use crate::lattice::{build_prefix_table, LatticeIndex, PrefixTable, Rect, ValueGrid};
use crate::math::{powf, sqrt};
use crate::scalars::ll_pos;
use crate::sets::{Region, SetSequence};
use crate::stats;

/// `sqrt(l LL(l))`.
pub fn lil_normalizer(cardinality: u64) -> f64 {
    let l = cardinality.max(1) as f64;
    sqrt(l * ll_pos(l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MaxMode {
    Full,
    Dyadic,
}

/// Monte Carlo settings for maximal-function experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct McConfig {
    pub reps: usize,
    pub seed: u64,
    /// Block side `N_max`.
    pub n_max: u64,
    pub p: f64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Input("reps must be positive".into()));
        }
        if self.n_max == 0 {
            return Err(Error::Input("block side must be positive".into()));
        }
        check_p(self.p)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::Domain(format!("maximal inequalities need 1 < p < 2, got {p}")));
    }
    Ok(())
}

/// `L^p` norm estimate of a maximal function.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaxEstimate {
    pub lp_estimate: f64,
    pub se: f64,
    pub reps: usize,
    /// Block side `N_max`, or number of regions for set sequences.
    pub truncation: u64,
}

/// Walk a prefix table in storage order, handing each entry its anchored
/// index `n` (relative to origin 1) by coordinates.
fn for_each_anchored<F: FnMut(&[u64], f64)>(table: &PrefixTable, mut f: F) {
    let ext = table.rect().extents();
    let d = ext.len();
    let mut n = vec![1u64; d];
    for &v in table.entries() {
        f(&n, v);
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
}

fn check_anchor(grid: &ValueGrid) -> Result<()> {
    if let Some(q) = grid.origin().coords().iter().position(|&c| c != 1) {
        return Err(Error::Domain(format!(
            "maximal functions need a grid anchored at 1, coordinate {} starts at {}",
            q + 1,
            grid.origin().coords()[q]
        )));
    }
    Ok(())
}

/// `max |S_n| / sqrt(|n| LL(|n|))` over the grid (full) or its dyadic points.
pub fn maximal_function_rect(grid: &ValueGrid, mode: MaxMode) -> Result<f64> {
    check_anchor(grid)?;
    let table = build_prefix_table(grid);
    let mut best = 0.0f64;
    for_each_anchored(&table, |n, s| {
        if mode == MaxMode::Dyadic && !n.iter().all(|c| c.is_power_of_two()) {
            return;
        }
        let card: u64 = n.iter().product();
        best = best.max(s.abs() / lil_normalizer(card));
    });
    Ok(best)
}

/// `(full, dyadic)` maximal values from a single pass.
pub fn maximal_function_both(grid: &ValueGrid) -> Result<(f64, f64)> {
    check_anchor(grid)?;
    let table = build_prefix_table(grid);
    let (mut full, mut dy) = (0.0f64, 0.0f64);
    for_each_anchored(&table, |n, s| {
        let v = s.abs() / lil_normalizer(n.iter().product());
        full = full.max(v);
        if n.iter().all(|c| c.is_power_of_two()) {
            dy = dy.max(v);
        }
    });
    Ok((full, dy))
}

/// Full-mode maxima over the nested blocks `[1, 2^k]^d` for each `k` in
/// `exponents` (increasing), from one grid covering the largest block.
pub fn maximal_function_nested(grid: &ValueGrid, exponents: &[u32]) -> Result<Vec<f64>> {
    check_anchor(grid)?;
    if exponents.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("exponents must be strictly increasing".into()));
    }
    let kmax = *exponents.last().ok_or_else(|| Error::Input("no exponents".into()))?;
    if grid.extents().iter().any(|&e| (e as u64) < (1u64 << kmax)) {
        return Err(Error::Domain(format!("grid smaller than the block of side 2^{kmax}")));
    }
    let table = build_prefix_table(grid);
    let mut out = vec![0.0f64; exponents.len()];
    for_each_anchored(&table, |n, s| {
        let top = *n.iter().max().expect("d >= 1");
        if top > 1u64 << kmax {
            return;
        }
        // smallest k with n <= 2^k on every axis
        let k = 64 - (top - 1).leading_zeros();
        let v = s.abs() / lil_normalizer(n.iter().product());
        for (slot, &e) in out.iter_mut().zip(exponents) {
            if e >= k {
                *slot = slot.max(v);
            }
        }
    });
    Ok(out)
}

/// `max_n |sum_{Lambda_n} X| / sqrt(l_n LL(l_n))` on a realized grid.
pub fn maximal_function_sets_on_grid(grid: &ValueGrid, seq: &SetSequence) -> Result<f64> {
    let table = build_prefix_table(grid);
    let mut best = 0.0f64;
    for region in &seq.regions {
        let s = match region {
            Region::Boxes(u) => {
                let mut s = 0.0;
                for b in u.boxes() {
                    s += table.sum_over_rect(b)?;
                }
                s
            }
            Region::Points(pts) => {
                let mut s = 0.0;
                for p in pts {
                    s += grid.get(p)?;
                }
                s
            }
        };
        best = best.max(s.abs() / lil_normalizer(region.cardinality()));
    }
    Ok(best)
}

/// One realization of the set-sequence maximal function.
pub fn maximal_function_sets(model: &FieldModel, seq: &SetSequence, seed: u64) -> Result<f64> {
    let grid = simulate_block(model, &seq.bounding_box(), seed)?;
    maximal_function_sets_on_grid(&grid, seq)
}

/// `(mean M^p)^{1/p}` with a delta-method standard error.
pub fn estimate_lp_norm(samples: &[f64], p: f64, truncation: u64) -> Result<MaxEstimate> {
    if samples.is_empty() {
        return Err(Error::Input("no samples".into()));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("exponent must be positive, got {p}")));
    }
    let pw: Vec<f64> = samples.iter().map(|m| powf(m.abs(), p)).collect();
    let ms = stats::mean_se(&pw);
    let est = powf(ms.mean, 1.0 / p);
    let se = if ms.mean > 0.0 { ms.se * powf(ms.mean, 1.0 / p - 1.0) / p } else { 0.0 };
    Ok(MaxEstimate { lp_estimate: est, se, reps: samples.len(), truncation })
}

/// Draw `reps` maximal values with `sampler(derived seed)` and estimate
/// their `L^p` norm.
pub fn estimate_lp_norm_with<F>(
    exec: &dyn Executor,
    sampler: F,
    p: f64,
    reps: usize,
    seed: u64,
    truncation: u64,
) -> Result<MaxEstimate>
where
    F: Fn(u64) -> f64 + Sync,
{
    let draws = replicate(exec, reps, |r| sampler(rep_seed(seed, r)));
    estimate_lp_norm(&draws, p, truncation)
}

fn anchored_cube(d: usize, side: u64) -> Result<Rect> {
    Rect::anchored(&LatticeIndex::splat(d, side as i64))
}

/// `||M_{N = 2^k}||_p` for each `k`, with common random numbers: every
/// replication simulates the largest block once and reads all `k` from it,
/// so each replication's curve is nondecreasing.
///
/// Returns the estimates and the per-replication maxima (row-major,
/// `exponents.len()` per row).
pub fn saturation_curve(
    exec: &dyn Executor,
    model: &FieldModel,
    p: f64,
    exponents: &[u32],
    reps: usize,
    seed: u64,
) -> Result<(Vec<MaxEstimate>, Vec<f64>)> {
    check_p(p)?;
    if exponents.is_empty() || exponents.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("exponents must be nonempty and strictly increasing".into()));
    }
    let kmax = *exponents.last().expect("nonempty");
    let block = anchored_cube(model.dim(), 1u64 << kmax)?;
    model.validate()?;
    let width = exponents.len();
    let rows = replicate_rows(exec, reps, width, |r, row| {
        let grid = simulate_block(model, &block, rep_seed(seed, r)).expect("validated model");
        let m = maximal_function_nested(&grid, exponents).expect("grid covers the block");
        row.copy_from_slice(&m);
    });
    let mut out = Vec::with_capacity(width);
    for (c, &k) in exponents.iter().enumerate() {
        let col: Vec<f64> = rows.iter().skip(c).step_by(width).copied().collect();
        out.push(estimate_lp_norm(&col, p, 1u64 << k)?);
    }
    Ok((out, rows))
}

/// Full and dyadic `L^p` estimates on `[1, n_max]^d` from shared realizations.
pub fn full_and_dyadic(
    exec: &dyn Executor,
    model: &FieldModel,
    cfg: &McConfig,
) -> Result<(MaxEstimate, MaxEstimate)> {
    cfg.validate()?;
    model.validate()?;
    let block = anchored_cube(model.dim(), cfg.n_max)?;
    let rows = replicate_rows(exec, cfg.reps, 2, |r, row| {
        let grid = simulate_block(model, &block, rep_seed(cfg.seed, r)).expect("validated model");
        let (f, d) = maximal_function_both(&grid).expect("anchored grid");
        row[0] = f;
        row[1] = d;
    });
    let full: Vec<f64> = rows.iter().step_by(2).copied().collect();
    let dy: Vec<f64> = rows.iter().skip(1).step_by(2).copied().collect();
    Ok((estimate_lp_norm(&full, cfg.p, cfg.n_max)?, estimate_lp_norm(&dy, cfg.p, cfg.n_max)?))
}
