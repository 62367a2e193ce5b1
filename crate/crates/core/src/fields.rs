//! Innovation laws, coefficient fields and the simulatable model families.
//!
//! Every model is a finite-window functional of an i.i.d. innovation field:
//! the value at site `j` depends on `eps_{j-u}` for `||u||_inf <= R` only.
//! Innovations are drawn from a counter-based stream keyed on the seed and
//! the absolute site, so overlapping blocks agree pointwise.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::chaos;
use crate::error::{Error, Result};
use crate::lattice::{LatticeIndex, Rect, ValueGrid};
use crate::math::{powf, sqrt};
use crate::quad::Law;
use crate::rng::{box_muller, derive_seed, SiteStream};
use crate::scalars::{self, OrliczParams};
use crate::stats::{self, MeanSe};

const INNOVATION_TAG: u64 = 0x1;
const SWAP_TAG: u64 = 0x2;
const CENTER_TAG: u64 = 0x3;
const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Law of the i.i.d. innovations. All laws are centered with unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "tag", rename_all = "snake_case"))]
pub enum InnovationSpec {
    StandardNormal,
    /// `+-1` with probability 1/2 each.
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    CenteredUniform,
    /// `hi` with probability `q`, `lo` otherwise, with `hi = sqrt((1-q)/q)` and
    /// `lo = -sqrt(q/(1-q))`.
    TwoPoint { q: f64 },
}

impl InnovationSpec {
    pub fn validate(&self) -> Result<()> {
        if let InnovationSpec::TwoPoint { q } = *self {
            if !(q > 0.0 && q < 1.0) {
                return Err(Error::Model(format!("two-point probability must lie in (0,1), got {q}")));
            }
        }
        Ok(())
    }

    pub fn tag(&self) -> &'static str {
        match self {
            InnovationSpec::StandardNormal => "standard_normal",
            InnovationSpec::Rademacher => "rademacher",
            InnovationSpec::CenteredUniform => "centered_uniform",
            InnovationSpec::TwoPoint { .. } => "two_point",
        }
    }

    pub fn variance(&self) -> f64 {
        1.0
    }

    pub fn is_normal(&self) -> bool {
        matches!(self, InnovationSpec::StandardNormal)
    }

    fn two_point_values(q: f64) -> (f64, f64) {
        (sqrt((1.0 - q) / q), -sqrt(q / (1.0 - q)))
    }

    /// The law of one innovation.
    pub fn law(&self) -> Law {
        self.scaled_law(1.0)
    }

    /// The law of `a * eps`.
    pub fn scaled_law(&self, a: f64) -> Law {
        let s = a.abs();
        match *self {
            InnovationSpec::StandardNormal => Law::Normal { sd: s },
            InnovationSpec::Rademacher => Law::Discrete(vec![(-s, 0.5), (s, 0.5)]),
            InnovationSpec::CenteredUniform => Law::Uniform { half_width: SQRT3 * s },
            InnovationSpec::TwoPoint { q } => {
                let (hi, lo) = Self::two_point_values(q);
                Law::Discrete(vec![(a * lo, 1.0 - q), (a * hi, q)])
            }
        }
    }

    /// The law of `eps - eps'` for independent copies.
    pub fn difference_law(&self) -> Law {
        match *self {
            InnovationSpec::StandardNormal => Law::Normal { sd: core::f64::consts::SQRT_2 },
            InnovationSpec::Rademacher => Law::Discrete(vec![(-2.0, 0.25), (0.0, 0.5), (2.0, 0.25)]),
            InnovationSpec::CenteredUniform => Law::Triangular { half_width: 2.0 * SQRT3 },
            InnovationSpec::TwoPoint { q } => {
                let (hi, lo) = Self::two_point_values(q);
                let w = hi - lo;
                let off = q * (1.0 - q);
                Law::Discrete(vec![(-w, off), (0.0, 1.0 - 2.0 * off), (w, off)])
            }
        }
    }

    /// `sup |eps|` for bounded laws.
    pub fn bound(&self) -> Option<f64> {
        match *self {
            InnovationSpec::StandardNormal => None,
            InnovationSpec::Rademacher => Some(1.0),
            InnovationSpec::CenteredUniform => Some(SQRT3),
            InnovationSpec::TwoPoint { q } => {
                let (hi, lo) = Self::two_point_values(q);
                Some(hi.max(-lo))
            }
        }
    }

    /// Luxemburg norm `||eps_0||_{p,r}`.
    pub fn orlicz_norm(&self, params: OrliczParams) -> Result<f64> {
        scalars::orlicz_norm_law(&self.law(), params, 2048)
    }

    /// Innovation from two independent open-unit uniforms.
    pub fn draw(&self, u1: f64, u2: f64) -> f64 {
        match *self {
            InnovationSpec::StandardNormal => box_muller(u1, u2),
            InnovationSpec::Rademacher => {
                if u1 < 0.5 {
                    -1.0
                } else {
                    1.0
                }
            }
            InnovationSpec::CenteredUniform => SQRT3 * (2.0 * u1 - 1.0),
            InnovationSpec::TwoPoint { q } => {
                let (hi, lo) = Self::two_point_values(q);
                if u1 < q {
                    hi
                } else {
                    lo
                }
            }
        }
    }
}

/// Site-addressable innovations for one seed.
#[derive(Debug, Clone, Copy)]
pub struct Innovations {
    spec: InnovationSpec,
    stream: SiteStream,
}

impl Innovations {
    pub fn new(spec: InnovationSpec, seed: u64) -> Self {
        Innovations { spec, stream: SiteStream::new(seed).substream(INNOVATION_TAG) }
    }

    /// The independent copy used when a single site is redrawn.
    pub fn replacement(spec: InnovationSpec, seed: u64) -> Self {
        Innovations { spec, stream: SiteStream::new(seed).substream(SWAP_TAG) }
    }

    #[inline]
    pub fn at(&self, site: &[i64]) -> f64 {
        self.spec.draw(self.stream.uniform(site, 0), self.stream.uniform(site, 1))
    }

    /// Innovations on every point of `rect`.
    pub fn grid(&self, rect: &Rect) -> ValueGrid {
        ValueGrid::from_fn(rect.clone(), |p| self.at(p.coords()))
    }
}

/// Finite-support real coefficients `a_i` on `Z^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    d: usize,
    entries: Vec<(LatticeIndex, f64)>,
}

impl CoefficientField {
    /// Entries are sorted; repeated indices are rejected.
    pub fn new(d: usize, entries: Vec<(LatticeIndex, f64)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Model("dimension must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for (i, a) in entries {
            if i.dim() != d {
                return Err(Error::Model(format!("coefficient index {i} is not {d}-dimensional")));
            }
            if !a.is_finite() {
                return Err(Error::Model(format!("coefficient at {i} is not finite")));
            }
            if map.insert(i.clone(), a).is_some() {
                return Err(Error::Model(format!("coefficient index {i} repeated")));
            }
        }
        Ok(CoefficientField { d, entries: map.into_iter().collect() })
    }

    /// The single coefficient `a_0 = a`.
    pub fn origin(d: usize, a: f64) -> Self {
        CoefficientField { d, entries: vec![(LatticeIndex::zeros(d), a)] }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[(LatticeIndex, f64)] {
        &self.entries
    }

    pub fn get(&self, i: &LatticeIndex) -> f64 {
        self.entries.binary_search_by(|(k, _)| k.cmp(i)).map(|k| self.entries[k].1).unwrap_or(0.0)
    }

    /// `max ||i||_inf` over the entries.
    pub fn radius(&self) -> u64 {
        self.entries.iter().map(|(i, _)| i.sup_norm()).max().unwrap_or(0)
    }

    pub fn sum_abs(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a.abs()).sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.entries.iter().map(|(_, a)| a * a).sum()
    }

    /// `sum_{||i||_inf = j} |a_i|^e`.
    pub fn shell_power_sum(&self, j: u64, e: f64) -> f64 {
        self.entries.iter().filter(|(i, _)| i.sup_norm() == j).map(|(_, a)| powf(a.abs(), e)).sum()
    }

    /// `sum_{||i||_inf <= j} a_i^2`.
    pub fn ball_sum_sq(&self, j: u64) -> f64 {
        self.entries.iter().filter(|(i, _)| i.sup_norm() <= j).map(|(_, a)| a * a).sum()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        CoefficientField { d: self.d, entries: self.entries.iter().map(|(i, a)| (i.clone(), alpha * a)).collect() }
    }
}

/// Coefficients `a_{s1,s2}` of a second-order Volterra field.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCoefficientField {
    d: usize,
    entries: Vec<(LatticeIndex, LatticeIndex, f64)>,
}

impl PairCoefficientField {
    pub fn new(d: usize, entries: Vec<(LatticeIndex, LatticeIndex, f64)>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Model("dimension must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for (s1, s2, a) in entries {
            if s1.dim() != d || s2.dim() != d {
                return Err(Error::Model(format!("pair ({s1}, {s2}) is not {d}-dimensional")));
            }
            if s1 == s2 {
                return Err(Error::Model(format!("diagonal coefficient at ({s1}, {s1}) must vanish")));
            }
            if !a.is_finite() {
                return Err(Error::Model(format!("coefficient at ({s1}, {s2}) is not finite")));
            }
            if map.insert((s1.clone(), s2.clone()), a).is_some() {
                return Err(Error::Model(format!("pair ({s1}, {s2}) repeated")));
            }
        }
        Ok(PairCoefficientField { d, entries: map.into_iter().map(|((u, v), a)| (u, v, a)).collect() })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[(LatticeIndex, LatticeIndex, f64)] {
        &self.entries
    }

    pub fn radius(&self) -> u64 {
        self.entries.iter().map(|(u, v, _)| u.sup_norm().max(v.sup_norm())).max().unwrap_or(0)
    }

    pub fn sum_sq(&self) -> f64 {
        self.entries.iter().map(|(_, _, a)| a * a).sum()
    }

    /// `E X_0^2 = sum over unordered pairs {s1, s2} of (a_{s1,s2} + a_{s2,s1})^2`
    /// for unit-variance innovations.
    pub fn variance(&self) -> f64 {
        let mut sym: BTreeMap<(&LatticeIndex, &LatticeIndex), f64> = BTreeMap::new();
        for (u, v, a) in &self.entries {
            let key = if u < v { (u, v) } else { (v, u) };
            *sym.entry(key).or_insert(0.0) += a;
        }
        sym.values().map(|b| b * b).sum()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        PairCoefficientField {
            d: self.d,
            entries: self.entries.iter().map(|(u, v, a)| (u.clone(), v.clone(), alpha * a)).collect(),
        }
    }
}

/// Built-in Hölder-continuous transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "tag", rename_all = "snake_case"))]
pub enum HolderFn {
    /// `|x|^gamma`.
    AbsPower { gamma: f64 },
    /// `sign(x) |x|^gamma`.
    SignedPower { gamma: f64 },
    /// `min(max(x, lo), hi)`.
    Clip { lo: f64, hi: f64 },
    /// `sign(x) max(|x| - tau, 0)`.
    SoftThreshold { tau: f64 },
}

impl HolderFn {
    pub fn validate(&self) -> Result<()> {
        match *self {
            HolderFn::AbsPower { gamma } | HolderFn::SignedPower { gamma } => {
                if !(gamma > 0.0 && gamma <= 1.0) {
                    return Err(Error::Model(format!("Hölder exponent must lie in (0,1], got {gamma}")));
                }
            }
            HolderFn::Clip { lo, hi } => {
                if !(lo <= hi) {
                    return Err(Error::Model(format!("clip bounds out of order: {lo} > {hi}")));
                }
            }
            HolderFn::SoftThreshold { tau } => {
                if !(tau >= 0.0) {
                    return Err(Error::Model(format!("threshold must be nonnegative, got {tau}")));
                }
            }
        }
        Ok(())
    }

    pub fn tag(&self) -> &'static str {
        match self {
            HolderFn::AbsPower { .. } => "abs_power",
            HolderFn::SignedPower { .. } => "signed_power",
            HolderFn::Clip { .. } => "clip",
            HolderFn::SoftThreshold { .. } => "soft_threshold",
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            HolderFn::AbsPower { gamma } => powf(x.abs(), gamma),
            HolderFn::SignedPower { gamma } => {
                let m = powf(x.abs(), gamma);
                if x < 0.0 {
                    -m
                } else {
                    m
                }
            }
            HolderFn::Clip { lo, hi } => x.max(lo).min(hi),
            HolderFn::SoftThreshold { tau } => {
                let m = (x.abs() - tau).max(0.0);
                if x < 0.0 {
                    -m
                } else {
                    m
                }
            }
        }
    }

    /// Exponent `gamma` with `|g(x) - g(y)| <= K |x - y|^gamma`.
    pub fn exponent(&self) -> f64 {
        match *self {
            HolderFn::AbsPower { gamma } | HolderFn::SignedPower { gamma } => gamma,
            _ => 1.0,
        }
    }

    /// The constant `K` of the Hölder bound.
    pub fn holder_constant(&self) -> f64 {
        match *self {
            HolderFn::SignedPower { gamma } => powf(2.0, 1.0 - gamma),
            _ => 1.0,
        }
    }

    /// Points where `g` is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            HolderFn::AbsPower { .. } | HolderFn::SignedPower { .. } => vec![0.0],
            HolderFn::Clip { lo, hi } => vec![lo, hi],
            HolderFn::SoftThreshold { tau } => vec![-tau, tau],
        }
    }
}

/// How to compute `E g(Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "tag", rename_all = "snake_case"))]
pub enum CenterMethod {
    /// Quadrature when the law of `Y` is available in closed form, Monte Carlo otherwise.
    #[default]
    Auto,
    Quadrature { nodes: usize },
    MonteCarlo { reps: usize, seed: u64 },
}

const CENTER_NODES: usize = 4096;
const CENTER_MC_REPS: usize = 400_000;

/// Law of `Y_0 = sum a_i eps_{-i}` when it has a closed form.
fn linear_law(coeffs: &CoefficientField, innov: InnovationSpec) -> Option<Law> {
    if innov.is_normal() {
        return Some(Law::Normal { sd: sqrt(coeffs.sum_sq()) });
    }
    match coeffs.entries() {
        [] => Some(Law::Discrete(vec![(0.0, 1.0)])),
        [(_, a)] => Some(innov.scaled_law(*a)),
        _ => None,
    }
}

/// Centering constant `E g(Y_0)` for `Y_0 = sum a_i eps_{-i}`, with a
/// standard error (zero for quadrature).
pub fn holder_center(
    g: HolderFn,
    coeffs: &CoefficientField,
    innov: InnovationSpec,
    method: CenterMethod,
) -> Result<MeanSe> {
    g.validate()?;
    innov.validate()?;
    let quad = |nodes: usize| -> Option<MeanSe> {
        linear_law(coeffs, innov).map(|law| MeanSe { mean: law.expect(|y| g.eval(y), &g.kinks(), nodes), se: 0.0 })
    };
    match method {
        CenterMethod::Auto => match quad(CENTER_NODES) {
            Some(m) => Ok(m),
            None => Ok(center_mc(g, coeffs, innov, CENTER_MC_REPS, 0x5EED)),
        },
        CenterMethod::Quadrature { nodes } => quad(nodes).ok_or_else(|| {
            Error::Capability("quadrature centering needs normal innovations or a single coefficient".into())
        }),
        CenterMethod::MonteCarlo { reps, seed } => Ok(center_mc(g, coeffs, innov, reps.max(2), seed)),
    }
}

fn center_mc(g: HolderFn, coeffs: &CoefficientField, innov: InnovationSpec, reps: usize, seed: u64) -> MeanSe {
    let stream = SiteStream::new(seed).substream(CENTER_TAG);
    let vals: Vec<f64> = (0..reps)
        .map(|r| {
            let eps = Innovations { spec: innov, stream: stream.substream(r as u64) };
            let y: f64 = coeffs.entries().iter().map(|(i, a)| a * eps.at(i.neg().coords())).sum();
            g.eval(y)
        })
        .collect();
    stats::mean_se(&vals)
}

/// The model families.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldModel {
    /// `X_j = eps_j`.
    Iid { innov: InnovationSpec, d: usize },
    /// `X_j = sum_i a_i eps_{j-i}`.
    Linear { coeffs: CoefficientField, innov: InnovationSpec },
    /// `X_j = g(Y_j) - center` with `Y_j = sum_i a_i eps_{j-i}`.
    HolderOfLinear { coeffs: CoefficientField, innov: InnovationSpec, g: HolderFn, center: f64 },
    /// `X_j = sum a_{s1,s2} eps_{j-s1} eps_{j-s2}`.
    Volterra { pairs: PairCoefficientField, innov: InnovationSpec },
    /// `X_j = sum_{q>=1} c_q H_q(Y_j)` with Gaussian `Y_j`, `sum a_i^2 = 1`.
    /// `hermite[q-1]` holds `c_q`.
    Hermite { coeffs: CoefficientField, hermite: Vec<f64>, innov: InnovationSpec },
}

impl FieldModel {
    pub fn iid(innov: InnovationSpec, d: usize) -> Result<Self> {
        let m = FieldModel::Iid { innov, d };
        m.validate()?;
        Ok(m)
    }

    pub fn linear(coeffs: CoefficientField, innov: InnovationSpec) -> Result<Self> {
        let m = FieldModel::Linear { coeffs, innov };
        m.validate()?;
        Ok(m)
    }

    /// Hölder transform of a linear field, centered with [`holder_center`].
    pub fn holder_of_linear(
        coeffs: CoefficientField,
        innov: InnovationSpec,
        g: HolderFn,
        method: CenterMethod,
    ) -> Result<Self> {
        let center = holder_center(g, &coeffs, innov, method)?.mean;
        let m = FieldModel::HolderOfLinear { coeffs, innov, g, center };
        m.validate()?;
        Ok(m)
    }

    pub fn volterra(pairs: PairCoefficientField, innov: InnovationSpec) -> Result<Self> {
        let m = FieldModel::Volterra { pairs, innov };
        m.validate()?;
        Ok(m)
    }

    pub fn hermite(coeffs: CoefficientField, hermite: Vec<f64>) -> Result<Self> {
        let m = FieldModel::Hermite { coeffs, hermite, innov: InnovationSpec::StandardNormal };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.innovation().validate()?;
        match self {
            FieldModel::Iid { d, .. } => {
                if *d == 0 {
                    return Err(Error::Model("dimension must be at least 1".into()));
                }
            }
            FieldModel::HolderOfLinear { g, center, .. } => {
                g.validate()?;
                if !center.is_finite() {
                    return Err(Error::Model("centering constant is not finite".into()));
                }
            }
            FieldModel::Hermite { coeffs, hermite, innov } => {
                if !innov.is_normal() {
                    return Err(Error::Model(format!(
                        "Hermite functionals need standard normal innovations, got {}",
                        innov.tag()
                    )));
                }
                let s = coeffs.sum_sq();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::Model(format!("Hermite functional needs sum a_i^2 = 1, got {s}")));
                }
                if hermite.is_empty() || hermite.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Model("Hermite coefficients must be finite, Q >= 1".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn tag(&self) -> &'static str {
        match self {
            FieldModel::Iid { .. } => "iid",
            FieldModel::Linear { .. } => "linear",
            FieldModel::HolderOfLinear { .. } => "holder_of_linear",
            FieldModel::Volterra { .. } => "volterra",
            FieldModel::Hermite { .. } => "hermite",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FieldModel::Iid { d, .. } => *d,
            FieldModel::Linear { coeffs, .. }
            | FieldModel::HolderOfLinear { coeffs, .. }
            | FieldModel::Hermite { coeffs, .. } => coeffs.dim(),
            FieldModel::Volterra { pairs, .. } => pairs.dim(),
        }
    }

    pub fn innovation(&self) -> InnovationSpec {
        match self {
            FieldModel::Iid { innov, .. }
            | FieldModel::Linear { innov, .. }
            | FieldModel::HolderOfLinear { innov, .. }
            | FieldModel::Volterra { innov, .. }
            | FieldModel::Hermite { innov, .. } => *innov,
        }
    }

    /// Support radius `R`: `X_0` depends on `eps_u` for `||u||_inf <= R` only.
    pub fn radius(&self) -> u64 {
        match self {
            FieldModel::Iid { .. } => 0,
            FieldModel::Linear { coeffs, .. }
            | FieldModel::HolderOfLinear { coeffs, .. }
            | FieldModel::Hermite { coeffs, .. } => coeffs.radius(),
            FieldModel::Volterra { pairs, .. } => pairs.radius(),
        }
    }

    /// `X_j` computed from an innovation lookup.
    pub fn value_at<E: Fn(&[i64]) -> f64>(&self, j: &LatticeIndex, eps: E) -> f64 {
        let shifted = |i: &LatticeIndex| -> f64 {
            let site: Vec<i64> = j.coords().iter().zip(i.coords()).map(|(a, b)| a - b).collect();
            eps(&site)
        };
        let linear = |coeffs: &CoefficientField| -> f64 { coeffs.entries().iter().map(|(i, a)| a * shifted(i)).sum() };
        match self {
            FieldModel::Iid { .. } => eps(j.coords()),
            FieldModel::Linear { coeffs, .. } => linear(coeffs),
            FieldModel::HolderOfLinear { coeffs, g, center, .. } => g.eval(linear(coeffs)) - center,
            FieldModel::Volterra { pairs, .. } => {
                pairs.entries().iter().map(|(u, v, a)| a * shifted(u) * shifted(v)).sum()
            }
            FieldModel::Hermite { coeffs, hermite, .. } => chaos::hermite_series(hermite, linear(coeffs)),
        }
    }

    /// Same model with coefficients (or Hermite coefficients) multiplied by `alpha`.
    /// The Hölder centering constant is recomputed.
    pub fn scale(&self, alpha: f64) -> Result<Self> {
        Ok(match self {
            FieldModel::Iid { .. } => return Err(Error::Capability("the i.i.d. model has no coefficients".into())),
            FieldModel::Linear { coeffs, innov } => FieldModel::Linear { coeffs: coeffs.scale(alpha), innov: *innov },
            FieldModel::HolderOfLinear { coeffs, innov, g, .. } => {
                FieldModel::holder_of_linear(coeffs.scale(alpha), *innov, *g, CenterMethod::Auto)?
            }
            FieldModel::Volterra { pairs, innov } => FieldModel::Volterra { pairs: pairs.scale(alpha), innov: *innov },
            FieldModel::Hermite { coeffs, hermite, innov } => FieldModel::Hermite {
                coeffs: coeffs.clone(),
                hermite: hermite.iter().map(|c| alpha * c).collect(),
                innov: *innov,
            },
        })
    }
}

/// Offsets into a padded innovation grid, relative to the site being computed.
struct Kernel<'a> {
    model: &'a FieldModel,
    single: Vec<(isize, f64)>,
    pairs: Vec<(isize, isize, f64)>,
}

impl<'a> Kernel<'a> {
    fn new(model: &'a FieldModel, padded: &ValueGrid) -> Self {
        let st = padded.strides();
        let off = |i: &LatticeIndex| -> isize {
            -i.coords().iter().zip(st).map(|(c, s)| *c as isize * *s as isize).sum::<isize>()
        };
        let (single, pairs) = match model {
            FieldModel::Iid { .. } => (vec![(0, 1.0)], vec![]),
            FieldModel::Linear { coeffs, .. }
            | FieldModel::HolderOfLinear { coeffs, .. }
            | FieldModel::Hermite { coeffs, .. } => (coeffs.entries().iter().map(|(i, a)| (off(i), *a)).collect(), vec![]),
            FieldModel::Volterra { pairs, .. } => {
                (vec![], pairs.entries().iter().map(|(u, v, a)| (off(u), off(v), *a)).collect())
            }
        };
        Kernel { model, single, pairs }
    }

    #[inline]
    fn eval(&self, eps: &[f64], base: usize) -> f64 {
        let at = |o: isize| eps[(base as isize + o) as usize];
        let lin = || self.single.iter().map(|&(o, a)| a * at(o)).sum::<f64>();
        match self.model {
            FieldModel::Iid { .. } | FieldModel::Linear { .. } => lin(),
            FieldModel::HolderOfLinear { g, center, .. } => g.eval(lin()) - center,
            FieldModel::Volterra { .. } => self.pairs.iter().map(|&(u, v, a)| a * at(u) * at(v)).sum(),
            FieldModel::Hermite { hermite, .. } => chaos::hermite_series(hermite, lin()),
        }
    }
}

fn check_block(model: &FieldModel, block: &Rect) -> Result<()> {
    model.validate()?;
    if block.dim() != model.dim() {
        return Err(Error::Input(format!("block is {}-dimensional, model is {}-dimensional", block.dim(), model.dim())));
    }
    Ok(())
}

/// Apply the model to a padded innovation grid (padded by at least `R`).
pub fn apply_model(model: &FieldModel, block: &Rect, padded: &ValueGrid) -> Result<ValueGrid> {
    check_block(model, block)?;
    if !padded.rect().contains_rect(&block.inflate(model.radius())) {
        return Err(Error::Domain("innovation grid does not cover the padded block".into()));
    }
    let kernel = Kernel::new(model, padded);
    let eps = padded.values();
    Ok(ValueGrid::from_fn(block.clone(), |p| kernel.eval(eps, padded.offset(p).expect("inside padded grid"))))
}

/// One realization of the model on `block`.
pub fn simulate_block(model: &FieldModel, block: &Rect, seed: u64) -> Result<ValueGrid> {
    check_block(model, block)?;
    let padded = Innovations::new(model.innovation(), seed).grid(&block.inflate(model.radius()));
    apply_model(model, block, &padded)
}

/// Two realizations that share every innovation except the one at
/// `swap_site`, which is redrawn independently in the second grid.
pub fn simulate_coupled_pair(
    model: &FieldModel,
    block: &Rect,
    seed: u64,
    swap_site: &LatticeIndex,
) -> Result<(ValueGrid, ValueGrid)> {
    check_block(model, block)?;
    if swap_site.dim() != block.dim() {
        return Err(Error::Input("swap site dimension differs from the block".into()));
    }
    let spec = model.innovation();
    let padded = Innovations::new(spec, seed).grid(&block.inflate(model.radius()));
    let first = apply_model(model, block, &padded)?;
    let mut swapped = padded;
    let k = swapped.offset(swap_site);
    if let Some(k) = k {
        swapped.values_mut()[k] = Innovations::replacement(spec, seed).at(swap_site.coords());
    }
    let second = if k.is_some() { apply_model(model, block, &swapped)? } else { first.clone() };
    Ok((first, second))
}

/// `X_0 - X_0^*` for the coupling that redraws the innovation at the origin,
/// observed at site `i`.
pub fn coupled_difference(model: &FieldModel, i: &LatticeIndex, seed: u64) -> f64 {
    let spec = model.innovation();
    let eps = Innovations::new(spec, seed);
    let alt = Innovations::replacement(spec, seed);
    let is_origin = |s: &[i64]| s.iter().all(|&c| c == 0);
    let x = model.value_at(i, |s| eps.at(s));
    let y = model.value_at(i, |s| if is_origin(s) { alt.at(s) } else { eps.at(s) });
    x - y
}

/// Seed of replication `rep`.
pub fn rep_seed(seed: u64, rep: usize) -> u64 {
    derive_seed(seed, rep as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(c: &[i64]) -> LatticeIndex {
        LatticeIndex::new(c.to_vec())
    }

    #[test]
    fn innovation_laws_are_standardized() {
        for spec in [
            InnovationSpec::StandardNormal,
            InnovationSpec::Rademacher,
            InnovationSpec::CenteredUniform,
            InnovationSpec::TwoPoint { q: 0.2 },
        ] {
            let law = spec.law();
            assert!(law.expect(|x| x, &[], 512).abs() < 1e-12, "{spec:?}");
            assert!((law.expect(|x| x * x, &[], 512) - 1.0).abs() < 1e-10, "{spec:?}");
            let diff = spec.difference_law();
            assert!((diff.expect(|x| x * x, &[], 512) - 2.0).abs() < 1e-10, "{spec:?}");
        }
    }

    #[test]
    fn single_coefficient_linear_takes_two_values() {
        let m = FieldModel::linear(CoefficientField::origin(2, 2.0), InnovationSpec::Rademacher).unwrap();
        let g = simulate_block(&m, &Rect::cube(2, 1, 16).unwrap(), 9).unwrap();
        assert!(g.values().iter().all(|v| *v == 2.0 || *v == -2.0));
    }

    #[test]
    fn volterra_single_pair_is_a_product() {
        let pairs = PairCoefficientField::new(2, vec![(idx(&[1, 0]), idx(&[0, 1]), 1.0)]).unwrap();
        let m = FieldModel::volterra(pairs, InnovationSpec::StandardNormal).unwrap();
        let block = Rect::cube(2, 0, 6).unwrap();
        let g = simulate_block(&m, &block, 4).unwrap();
        let eps = Innovations::new(InnovationSpec::StandardNormal, 4);
        for p in block.points() {
            let c = p.coords();
            let want = eps.at(&[c[0] - 1, c[1]]) * eps.at(&[c[0], c[1] - 1]);
            assert_eq!(g.get(&p).unwrap(), want);
        }
    }

    #[test]
    fn diagonal_pairs_rejected() {
        assert!(PairCoefficientField::new(1, vec![(idx(&[1]), idx(&[1]), 1.0)]).is_err());
    }

    #[test]
    fn hermite_needs_unit_norm_and_normal_innovations() {
        assert!(FieldModel::hermite(CoefficientField::origin(1, 0.9), vec![1.0]).is_err());
        let bad = FieldModel::Hermite {
            coeffs: CoefficientField::origin(1, 1.0),
            hermite: vec![1.0],
            innov: InnovationSpec::Rademacher,
        };
        assert!(matches!(simulate_block(&bad, &Rect::cube(1, 0, 3).unwrap(), 1), Err(Error::Model(_))));
    }

    #[test]
    fn coupled_pair_differs_only_at_swap_for_origin_model() {
        let m = FieldModel::linear(CoefficientField::origin(2, 1.0), InnovationSpec::StandardNormal).unwrap();
        let block = Rect::cube(2, -3, 7).unwrap();
        let s = idx(&[1, -2]);
        let (a, b) = simulate_coupled_pair(&m, &block, 5, &s).unwrap();
        assert_eq!(a, simulate_block(&m, &block, 5).unwrap());
        for p in block.points() {
            assert_eq!(a.get(&p).unwrap() == b.get(&p).unwrap(), p != s, "{p}");
        }
        let far = idx(&[50, 50]);
        let (c, d) = simulate_coupled_pair(&m, &block, 5, &far).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn holder_centers() {
        let one = CoefficientField::origin(1, 1.0);
        let n = InnovationSpec::StandardNormal;
        let abs = holder_center(HolderFn::AbsPower { gamma: 1.0 }, &one, n, CenterMethod::Auto).unwrap();
        assert!((abs.mean - (2.0 / core::f64::consts::PI).sqrt()).abs() < 1e-10);
        let odd = holder_center(HolderFn::SignedPower { gamma: 1.0 }, &one, n, CenterMethod::Auto).unwrap();
        assert!(odd.mean.abs() < 1e-14);
        let two = CoefficientField::new(1, vec![(idx(&[0]), 1.0), (idx(&[1]), 0.5)]).unwrap();
        let id = holder_center(
            HolderFn::Clip { lo: -1e9, hi: 1e9 },
            &two,
            InnovationSpec::Rademacher,
            CenterMethod::MonteCarlo { reps: 20_000, seed: 1 },
        )
        .unwrap();
        assert!(id.mean.abs() <= 3.0 * id.se, "{id:?}");
    }
}
