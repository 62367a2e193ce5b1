//! Martingale projections `X_{0,j}` and the physical dependence measure.
//!
//! `X_{0,j}` is the part of `X_0` revealed by the innovations on the
//! `||.||_inf`-shell of radius `j` around the origin:
//! `E[X_0 | eps_u, ||u|| <= j] - E[X_0 | eps_u, ||u|| <= j - 1]`, with
//! `X_{0,0} = E[X_0 | eps_0]`. Samplers draw innovations from the same
//! site-addressed stream as [`crate::fields::simulate_block`], so for a given
//! seed the levels add up to the simulated value at the origin.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chaos::scaled_hermite_series;
use crate::error::{Error, Result};
use crate::exec::{replicate, Executor};
use crate::fields::{coupled_difference, rep_seed, FieldModel, Innovations};
use crate::lattice::{ball, shell, LatticeIndex};
use crate::math::{powf, sqrt};
use crate::rng::SiteStream;
use crate::scalars::{self, OrliczParams};
use crate::stats::MeanSe;

/// Inner sample size of nested Monte Carlo conditional expectations.
pub const DEFAULT_INNER: usize = 256;
const INNER_TAG: u64 = 0x1_0000;

/// Level `j` of the projection decomposition of a model.
#[derive(Debug, Clone)]
pub struct ProjectionLevel {
    model: FieldModel,
    j: u64,
    inner: usize,
}

impl ProjectionLevel {
    pub fn level(&self) -> u64 {
        self.j
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    /// Whether draws are exact (not nested Monte Carlo).
    pub fn closed_form(&self) -> bool {
        !matches!(self.model, FieldModel::HolderOfLinear { .. })
    }

    /// Inner sample size for nested Monte Carlo levels; `None` for exact ones.
    /// Conditional expectations estimated this way carry a bias of order
    /// `1 / inner` in squared norms.
    pub fn bias_warning(&self) -> Option<usize> {
        (!self.closed_form()).then_some(self.inner)
    }

    pub fn with_inner(mut self, inner: usize) -> Self {
        self.inner = inner.max(1);
        self
    }

    /// `true` when the level is identically zero.
    pub fn vanishes(&self) -> bool {
        self.j > self.model.radius()
    }

    /// One draw of `X_{0,j}` driven by the innovations of `seed`.
    pub fn sample(&self, seed: u64) -> f64 {
        if self.vanishes() {
            return 0.0;
        }
        let eps = Innovations::new(self.model.innovation(), seed);
        let at = |i: &LatticeIndex| eps.at(i.neg().coords());
        let j = self.j;
        match &self.model {
            FieldModel::Iid { .. } => at(&LatticeIndex::zeros(self.model.dim())),
            FieldModel::Linear { coeffs, .. } => {
                coeffs.entries().iter().filter(|(i, _)| i.sup_norm() == j).map(|(i, a)| a * at(i)).sum()
            }
            FieldModel::Volterra { pairs, .. } => pairs
                .entries()
                .iter()
                .filter(|(u, v, _)| u.sup_norm().max(v.sup_norm()) == j)
                .map(|(u, v, a)| a * at(u) * at(v))
                .sum(),
            FieldModel::Hermite { coeffs, hermite, .. } => {
                let window = |k: u64| -> (f64, f64) {
                    let mut a_sum = 0.0;
                    let mut s2 = 0.0;
                    for (i, a) in coeffs.entries().iter().filter(|(i, _)| i.sup_norm() <= k) {
                        a_sum += a * at(i);
                        s2 += a * a;
                    }
                    (a_sum, sqrt(s2))
                };
                let (aj, sj) = window(j);
                let upper = scaled_hermite_series(hermite, sj, aj);
                if j == 0 {
                    upper
                } else {
                    let (ak, sk) = window(j - 1);
                    upper - scaled_hermite_series(hermite, sk, ak)
                }
            }
            FieldModel::HolderOfLinear { coeffs, g, center, innov } => {
                // E[g(Y) | window] by averaging over fresh innovations outside
                // the window; the same inner draws serve both windows
                let inner_stream = SiteStream::new(seed).substream(INNER_TAG);
                let mut total = 0.0;
                for k in 0..self.inner {
                    let fresh = Innovations::new(*innov, inner_stream.word_at(k as u64));
                    let (mut y_hi, mut y_lo) = (0.0, 0.0);
                    for (i, a) in coeffs.entries() {
                        let n = i.sup_norm();
                        let inside = at(i);
                        let outside = fresh.at(i.neg().coords());
                        y_hi += a * if n <= j { inside } else { outside };
                        y_lo += a * if j > 0 && n < j { inside } else { outside };
                    }
                    total += if j == 0 { g.eval(y_hi) - center } else { g.eval(y_hi) - g.eval(y_lo) };
                }
                total / self.inner as f64
            }
        }
    }

    /// `reps` independent draws; replication `r` uses the derived seed `(seed, r)`.
    pub fn sample_many(&self, exec: &dyn Executor, reps: usize, seed: u64) -> Vec<f64> {
        replicate(exec, reps, |r| self.sample(rep_seed(seed, r)))
    }

    /// Exact `||X_{0,j}||_2` where available (unit-variance innovations).
    pub fn exact_l2(&self) -> Option<f64> {
        if self.vanishes() {
            return Some(0.0);
        }
        let j = self.j;
        match &self.model {
            FieldModel::Iid { .. } => Some(1.0),
            FieldModel::Linear { coeffs, .. } => Some(sqrt(coeffs.shell_power_sum(j, 2.0))),
            FieldModel::Volterra { pairs, .. } => {
                let mut sym: BTreeMap<(&LatticeIndex, &LatticeIndex), f64> = BTreeMap::new();
                for (u, v, a) in pairs.entries().iter().filter(|(u, v, _)| u.sup_norm().max(v.sup_norm()) == j) {
                    let key = if u < v { (u, v) } else { (v, u) };
                    *sym.entry(key).or_insert(0.0) += a;
                }
                Some(sqrt(sym.values().map(|b| b * b).sum()))
            }
            FieldModel::Hermite { coeffs, hermite, .. } => {
                // E[E[H_q(Y)|G_j]^2] = q! s_j^{2q}, orthogonal across q
                let s_hi = coeffs.ball_sum_sq(j);
                let s_lo = if j == 0 { 0.0 } else { coeffs.ball_sum_sq(j - 1) };
                let mut var = 0.0;
                let mut fact = 1.0;
                for (k, c) in hermite.iter().enumerate() {
                    let q = (k + 1) as f64;
                    fact *= q;
                    var += c * c * fact * (powf(s_hi, q) - powf(s_lo, q));
                }
                Some(sqrt(var.max(0.0)))
            }
            FieldModel::HolderOfLinear { .. } => None,
        }
    }
}

/// The projection sampler for level `j` of `model`.
pub fn projection_sampler(model: &FieldModel, j: u64) -> Result<ProjectionLevel> {
    model.validate()?;
    Ok(ProjectionLevel { model: model.clone(), j, inner: DEFAULT_INNER })
}

/// Norm estimate of one projection level.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelNorm {
    pub value: f64,
    pub se: f64,
    /// `true` when `value` is an exact closed form rather than an estimate.
    pub exact: bool,
    pub reps: usize,
}

/// `||X_{0,j}||_{p,r}`. For `(p, r) = (2, 0)` and closed-form models the
/// exact value is returned; otherwise `reps` draws are fed to the empirical
/// Luxemburg norm.
pub fn projection_norm(
    level: &ProjectionLevel,
    params: OrliczParams,
    exec: &dyn Executor,
    reps: usize,
    seed: u64,
) -> Result<LevelNorm> {
    if level.vanishes() {
        return Ok(LevelNorm { value: 0.0, se: 0.0, exact: true, reps: 0 });
    }
    if params == OrliczParams::l2() {
        if let Some(v) = level.exact_l2() {
            return Ok(LevelNorm { value: v, se: 0.0, exact: true, reps: 0 });
        }
    }
    let draws = level.sample_many(exec, reps, seed);
    let est = scalars::orlicz_norm_samples_se(&draws, params, scalars::DEFAULT_TOL)?;
    Ok(LevelNorm { value: est.mean, se: est.se, exact: false, reps })
}

/// `delta_{2,r}(i)` in closed form, where available:
/// linear models give `|a_i| ||eps_0 - eps_0'||_{2,r}`.
pub fn physical_dependence_exact(model: &FieldModel, i: &LatticeIndex, r: f64) -> Result<Option<f64>> {
    let params = OrliczParams::gauge(2.0, r)?;
    if i.sup_norm() > model.radius() {
        return Ok(Some(0.0));
    }
    let diff = model.innovation().difference_law();
    Ok(match model {
        FieldModel::Iid { .. } => {
            Some(if i.sup_norm() == 0 { scalars::orlicz_norm_law(&diff, params, 4096)? } else { 0.0 })
        }
        FieldModel::Linear { coeffs, .. } => {
            let a = coeffs.get(i).abs();
            Some(if a == 0.0 { 0.0 } else { a * scalars::orlicz_norm_law(&diff, params, 4096)? })
        }
        _ => None,
    })
}

/// Monte Carlo estimate of `delta_{2,r}(i)` from coupled pairs, with a
/// delta-method standard error. Sites beyond the support radius give an
/// exact zero.
pub fn physical_dependence(
    model: &FieldModel,
    i: &LatticeIndex,
    r: f64,
    exec: &dyn Executor,
    reps: usize,
    seed: u64,
) -> Result<MeanSe> {
    model.validate()?;
    if i.dim() != model.dim() {
        return Err(Error::Input(format!("site {i} does not match model dimension {}", model.dim())));
    }
    let params = OrliczParams::gauge(2.0, r)?;
    if i.sup_norm() > model.radius() {
        return Ok(MeanSe { mean: 0.0, se: 0.0 });
    }
    let draws = replicate(exec, reps, |k| coupled_difference(model, i, rep_seed(seed, k)));
    scalars::orlicz_norm_samples_se(&draws, params, scalars::DEFAULT_TOL)
}

/// Upper bound `||K |a_i|^gamma |eps_0 - eps_0'|^gamma||_{2,r}` on
/// `delta_{2,r}(i)` for a Hölder transform of a linear field.
pub fn holder_dependence_bound(model: &FieldModel, i: &LatticeIndex, r: f64) -> Result<f64> {
    let FieldModel::HolderOfLinear { coeffs, innov, g, .. } = model else {
        return Err(Error::Input(format!("Hölder bound needs a Hölder model, got {}", model.tag())));
    };
    let params = OrliczParams::gauge(2.0, r)?;
    let gamma = g.exponent();
    let scale = g.holder_constant() * powf(coeffs.get(i).abs(), gamma);
    if scale == 0.0 {
        return Ok(0.0);
    }
    scalars::orlicz_norm_law_transform(&innov.difference_law(), |x| scale * powf(x.abs(), gamma), &[], params, 4096)
}

/// Estimated `delta_{2,r}(i)` on a set of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DependenceProfile {
    pub r: f64,
    pub reps: usize,
    pub entries: BTreeMap<LatticeIndex, MeanSe>,
}

/// Profile over the ball `||i||_inf <= radius`.
pub fn dependence_profile(
    model: &FieldModel,
    r: f64,
    radius: u64,
    exec: &dyn Executor,
    reps: usize,
    seed: u64,
) -> Result<DependenceProfile> {
    let mut entries = BTreeMap::new();
    for (k, i) in ball(model.dim(), radius).into_iter().enumerate() {
        let est = physical_dependence(model, &i, r, exec, reps, rep_seed(seed ^ 0xD3, k))?;
        entries.insert(i, est);
    }
    Ok(DependenceProfile { r, reps, entries })
}

/// `sqrt(sum_{||i||_inf = j} delta(i)^2)`.
pub fn shell_aggregate(profile: &DependenceProfile, d: usize, j: u64) -> Result<f64> {
    let sites = shell(d, j);
    let missing: Vec<String> =
        sites.iter().filter(|i| !profile.entries.contains_key(*i)).map(|i| format!("{i}")).collect();
    if !missing.is_empty() {
        return Err(Error::Input(format!("profile lacks shell sites {}", missing.join(" "))));
    }
    Ok(sqrt(sites.iter().map(|i| profile.entries[i].mean * profile.entries[i].mean).sum()))
}
