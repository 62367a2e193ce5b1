//! Right-hand sides of the maximal inequalities as explicit series.
//!
//! Every bound is reported without its absolute constant (`c_{p,d}`,
//! `K(p)`, `K(p,d,C,delta)` and the Hölder constant of `g` are not known in
//! closed form), so reports compare shapes: finiteness, scaling and decay of
//! the terms.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chaos::{series_constant, ChaosProfile};
use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::math::{powf, sqrt};
use crate::projections::{shell_aggregate, DependenceProfile};
use crate::scalars::{l_pos, OrliczParams};

/// Level weights of the two series.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "tag", rename_all = "snake_case"))]
pub enum WeightProfile {
    /// `(j+1)^{d/2}`, for rectangles.
    RectDHalf { d: usize },
    /// `(j+1)^d L(j)^{1/p}` with `L(0) := 1`, for unions of rectangles.
    UnionDLogP { d: usize, p: f64 },
}

impl WeightProfile {
    pub fn weight(&self, j: u64) -> f64 {
        let jp = (j + 1) as f64;
        match *self {
            WeightProfile::RectDHalf { d } => powf(jp, d as f64 / 2.0),
            WeightProfile::UnionDLogP { d, p } => powf(jp, d as f64) * powf(l_pos(j.max(1) as f64), 1.0 / p),
        }
    }
}

/// A bound series with its per-level breakdown.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundReport {
    pub profile: WeightProfile,
    pub shell_norms: Vec<f64>,
    pub weights: Vec<f64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub total: f64,
    pub j_max: u64,
    pub support_radius: Option<u64>,
    /// The series may continue beyond `j_max`: no support radius covers it
    /// and the last term exceeds `1e-6` of the sum.
    pub tail_flag: bool,
    /// Always `true`: absolute constants are excluded.
    pub constant_free: bool,
    /// Free-form description of the shell factor used.
    pub kind: String,
    /// Degree of homogeneity under scaling the coefficients by `alpha > 0`.
    pub scaling_degree: Option<f64>,
}

/// `sum_{j <= J_max} weight(j) shell_norm(j)`. `j_max` defaults to the last
/// supplied level.
pub fn bound_series(
    weights: WeightProfile,
    shell_norms: &[f64],
    j_max: Option<u64>,
    support_radius: Option<u64>,
) -> Result<BoundReport> {
    if let Some(k) = shell_norms.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::Input(format!("shell norm at j = {k} is negative or not finite ({})", shell_norms[k])));
    }
    if shell_norms.is_empty() {
        return Err(Error::Input("no shell norms".into()));
    }
    let j_max = j_max.unwrap_or(shell_norms.len() as u64 - 1);
    if j_max as usize >= shell_norms.len() {
        return Err(Error::Input(format!("J_max = {j_max} but only {} shell norms", shell_norms.len())));
    }
    let norms = &shell_norms[..=j_max as usize];
    let ws: Vec<f64> = (0..=j_max).map(|j| weights.weight(j)).collect();
    let terms: Vec<f64> = ws.iter().zip(norms).map(|(w, v)| w * v).collect();
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut acc = 0.0;
    for t in &terms {
        acc += t;
        partial_sums.push(acc);
    }
    let covered = support_radius.is_some_and(|r| j_max >= r);
    let last = *terms.last().expect("nonempty");
    Ok(BoundReport {
        profile: weights,
        shell_norms: norms.to_vec(),
        weights: ws,
        terms,
        partial_sums,
        total: acc,
        j_max,
        support_radius,
        tail_flag: !covered && last > 1e-6 * acc,
        constant_free: true,
        kind: String::from("custom"),
        scaling_degree: None,
    })
}

/// `C^{1/p} delta^{-1/2} ||eps_0||_2 sum |a_j|` (the constant `K(p)` omitted).
pub fn bound_linear_sets(sum_abs_a: f64, c: f64, delta: f64, p: f64, eps_l2: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    if !(c > 0.0) {
        return Err(Error::Domain(format!("C must be positive, got {c}")));
    }
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::Domain(format!("p must lie in (1, 2), got {p}")));
    }
    Ok(powf(c, 1.0 / p) / sqrt(delta) * eps_l2 * sum_abs_a)
}

/// Which shell factor to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ShellKind {
    /// `(sum_shell a_i^2)^{1/2} ||eps_0||_{2,r}` for linear fields.
    Linear,
    /// `(sum_shell |a_i|^{2 gamma})^{1/2} ||eps_0||_{2 gamma, r}`.
    Holder,
    /// `(sum_shell a_i^2)^{1/2} C(f)`.
    Hermite,
    /// `(sum_{||s1||=j} sum_{||s2||<=j} a_{s1,s2}^2 + a_{s2,s1}^2)^{1/2} ||eps_0||_{2,r}^2`.
    Volterra,
    /// `sqrt(sum_shell delta_{2,r}(i)^2)` from a dependence profile.
    PhysDep,
}

/// Inequality family a bound is computed for.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "tag", rename_all = "snake_case"))]
pub enum Target {
    /// Sup over rectangles: weights `(j+1)^{d/2}`, log weight `r = d - 1`.
    Rectangles,
    /// Unions of rectangles: weights `(j+1)^d L(j)^{1/p}`, `r = 0`.
    Unions { p: f64 },
}

impl Target {
    pub fn profile(&self, d: usize) -> WeightProfile {
        match *self {
            Target::Rectangles => WeightProfile::RectDHalf { d },
            Target::Unions { p } => WeightProfile::UnionDLogP { d, p },
        }
    }

    pub fn log_weight(&self, d: usize) -> f64 {
        match self {
            Target::Rectangles => d as f64 - 1.0,
            Target::Unions { .. } => 0.0,
        }
    }

    pub fn chaos_profile(&self) -> ChaosProfile {
        match self {
            Target::Rectangles => ChaosProfile::Rectangles,
            Target::Unions { .. } => ChaosProfile::Unions,
        }
    }
}

fn mismatch(kind: ShellKind, model: &FieldModel) -> Error {
    Error::Input(format!("shell kind {kind:?} does not apply to a {} model", model.tag()))
}

/// Degree of homogeneity of the shell factors when the coefficients (or
/// Hermite coefficients) are multiplied by `alpha > 0`.
pub fn scaling_degree(kind: ShellKind, model: &FieldModel) -> Option<f64> {
    match (kind, model) {
        (ShellKind::Holder, FieldModel::HolderOfLinear { g, .. }) => Some(g.exponent()),
        (ShellKind::PhysDep, _) => None,
        _ => Some(1.0),
    }
}

/// Shell factor at level `j`. `r` is the logarithmic weight of the Orlicz
/// norms; `chaos` selects the exponent of `C(f)`; `dep` is needed for
/// [`ShellKind::PhysDep`].
pub fn shell_coefficient(
    model: &FieldModel,
    kind: ShellKind,
    j: u64,
    r: f64,
    chaos: ChaosProfile,
    dep: Option<&DependenceProfile>,
) -> Result<f64> {
    let innov = model.innovation();
    match (kind, model) {
        (ShellKind::Linear, FieldModel::Linear { coeffs, .. }) => {
            let s = coeffs.shell_power_sum(j, 2.0);
            if s == 0.0 {
                return Ok(0.0);
            }
            Ok(sqrt(s) * innov.orlicz_norm(OrliczParams::gauge(2.0, r)?)?)
        }
        (ShellKind::Holder, FieldModel::HolderOfLinear { coeffs, g, .. }) => {
            let gamma = g.exponent();
            let s = coeffs.shell_power_sum(j, 2.0 * gamma);
            if s == 0.0 {
                return Ok(0.0);
            }
            Ok(sqrt(s) * innov.orlicz_norm(OrliczParams::gauge(2.0 * gamma, r)?)?)
        }
        (ShellKind::Hermite, FieldModel::Hermite { coeffs, hermite, .. }) => {
            let s = coeffs.shell_power_sum(j, 2.0);
            Ok(sqrt(s) * series_constant(hermite, coeffs.dim(), chaos).value)
        }
        (ShellKind::Volterra, FieldModel::Volterra { pairs, .. }) => {
            let mut s = 0.0;
            for (u, v, a) in pairs.entries() {
                let (nu, nv) = (u.sup_norm(), v.sup_norm());
                if nu == j && nv <= j {
                    s += a * a;
                }
                if nv == j && nu <= j {
                    s += a * a;
                }
            }
            if s == 0.0 {
                return Ok(0.0);
            }
            let e = innov.orlicz_norm(OrliczParams::gauge(2.0, r)?)?;
            Ok(sqrt(s) * e * e)
        }
        (ShellKind::PhysDep, _) => {
            let prof = dep.ok_or_else(|| Error::Input("physical-dependence bound needs a dependence profile".into()))?;
            shell_aggregate(prof, model.dim(), j)
        }
        _ => Err(mismatch(kind, model)),
    }
}

/// The full bound series of `model` for `target`, exact at `J_max = R`.
pub fn model_bound(
    model: &FieldModel,
    kind: ShellKind,
    target: Target,
    dep: Option<&DependenceProfile>,
) -> Result<BoundReport> {
    model.validate()?;
    let d = model.dim();
    let r = target.log_weight(d);
    let radius = model.radius();
    let norms = (0..=radius)
        .map(|j| shell_coefficient(model, kind, j, r, target.chaos_profile(), dep))
        .collect::<Result<Vec<f64>>>()?;
    let mut rep = bound_series(target.profile(d), &norms, Some(radius), Some(radius))?;
    rep.kind = format!("{kind:?}").to_lowercase();
    rep.scaling_degree = scaling_degree(kind, model);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{CoefficientField, InnovationSpec, PairCoefficientField};
    use crate::lattice::LatticeIndex;
    use alloc::vec;

    #[test]
    fn worked_series() {
        let one = bound_series(WeightProfile::RectDHalf { d: 3 }, &[1.0], None, None).unwrap();
        assert_eq!(one.total, 1.0);
        let lin = bound_series(WeightProfile::RectDHalf { d: 2 }, &[1.0, 0.5], None, Some(1)).unwrap();
        assert_eq!(lin.total, 2.0);
        assert!(!lin.tail_flag);
        let uni = bound_series(WeightProfile::UnionDLogP { d: 1, p: 1.5 }, &[1.0, 1.0], None, None).unwrap();
        assert_eq!(uni.total, 3.0);
        assert!(uni.tail_flag);
        assert!(bound_series(WeightProfile::RectDHalf { d: 1 }, &[1.0, -0.1], None, None).is_err());
    }

    #[test]
    fn linear_sets_bound() {
        assert_eq!(bound_linear_sets(1.0, 1.0, 1.0, 1.5, 1.0).unwrap(), 1.0);
        assert_eq!(bound_linear_sets(1.0, 1.0, 0.25, 1.5, 1.0).unwrap(), 2.0);
        let p = 1.5;
        assert!((bound_linear_sets(1.0, libm::pow(2.0, p), 1.0, p, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(bound_linear_sets(1.0, 1.0, 0.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn volterra_counts_both_orderings() {
        let pairs =
            PairCoefficientField::new(2, vec![(LatticeIndex::from([1, 0]), LatticeIndex::from([0, 1]), 1.0)]).unwrap();
        let m = FieldModel::volterra(pairs, InnovationSpec::Rademacher).unwrap();
        let v = shell_coefficient(&m, ShellKind::Volterra, 1, 0.0, ChaosProfile::Rectangles, None).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-12);
        assert!(shell_coefficient(&m, ShellKind::Linear, 1, 0.0, ChaosProfile::Rectangles, None).is_err());
    }

    #[test]
    fn hermite_shell_factor() {
        let c = CoefficientField::new(1, vec![(LatticeIndex::from([0]), 0.75f64.sqrt()), (LatticeIndex::from([1]), 0.5)])
            .unwrap();
        let m = FieldModel::hermite(c, vec![0.0, 1.0]).unwrap();
        let cf = series_constant(&[0.0, 1.0], 1, ChaosProfile::Rectangles).value;
        let v = shell_coefficient(&m, ShellKind::Hermite, 1, 0.0, ChaosProfile::Rectangles, None).unwrap();
        assert!((v - 0.5 * cf).abs() < 1e-15);
    }
}
