//! Summation regions: disjoint unions of boxes, growth certificates for
//! region sequences, and the residue partition of a union of boxes.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{LatticeIndex, Rect};
use crate::math::{ceil, exp, floor, ln, powf, powi, sqrt};
use crate::scalars::ll_pos;

/// A finite disjoint union of boxes.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "UnionRepr", into = "UnionRepr"))]
pub struct RectUnion {
    d: usize,
    boxes: Vec<Rect>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct UnionRepr {
    d: usize,
    boxes: Vec<Rect>,
}

#[cfg(feature = "serde")]
impl TryFrom<UnionRepr> for RectUnion {
    type Error = Error;
    fn try_from(r: UnionRepr) -> Result<Self> {
        RectUnion::new(r.d, r.boxes)
    }
}

#[cfg(feature = "serde")]
impl From<RectUnion> for UnionRepr {
    fn from(u: RectUnion) -> Self {
        UnionRepr { d: u.d, boxes: u.boxes }
    }
}

impl RectUnion {
    pub fn new(d: usize, boxes: Vec<Rect>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::Input("a union needs at least one box".into()));
        }
        if let Some(k) = boxes.iter().position(|b| b.dim() != d) {
            return Err(Error::Input(format!("box {k} is {}-dimensional, expected {d}", boxes[k].dim())));
        }
        for a in 0..boxes.len() {
            for b in a + 1..boxes.len() {
                if boxes[a].intersects(&boxes[b]) {
                    return Err(Error::Input(format!("boxes {a} and {b} overlap")));
                }
            }
        }
        Ok(RectUnion { d, boxes })
    }

    pub fn single(b: Rect) -> Self {
        RectUnion { d: b.dim(), boxes: vec![b] }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn boxes(&self) -> &[Rect] {
        &self.boxes
    }

    pub fn cardinality(&self) -> u64 {
        self.boxes.iter().map(Rect::cardinality).sum()
    }

    /// Every box has `hi_q - lo_q >= min_span` on every axis.
    pub fn spans_at_least(&self, min_span: i64) -> bool {
        self.boxes.iter().all(|b| b.lo().coords().iter().zip(b.hi().coords()).all(|(l, h)| h - l >= min_span))
    }

    pub fn bounding_box(&self) -> Rect {
        self.boxes[1..].iter().fold(self.boxes[0].clone(), |acc, b| acc.hull(b))
    }

    pub fn contains(&self, p: &LatticeIndex) -> bool {
        self.boxes.iter().any(|b| b.contains(p))
    }
}

/// A summation region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Region {
    Boxes(RectUnion),
    /// Distinct lattice points, sorted.
    Points(Vec<LatticeIndex>),
}

impl Region {
    pub fn points(d: usize, pts: Vec<LatticeIndex>) -> Result<Self> {
        if pts.is_empty() {
            return Err(Error::Input("empty point region".into()));
        }
        if let Some(p) = pts.iter().find(|p| p.dim() != d) {
            return Err(Error::Input(format!("point {p} is not {d}-dimensional")));
        }
        let set: BTreeSet<LatticeIndex> = pts.into_iter().collect();
        Ok(Region::Points(set.into_iter().collect()))
    }

    pub fn cardinality(&self) -> u64 {
        match self {
            Region::Boxes(u) => u.cardinality(),
            Region::Points(p) => p.len() as u64,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Boxes(u) => u.dim(),
            Region::Points(p) => p[0].dim(),
        }
    }

    pub fn bounding_box(&self) -> Rect {
        match self {
            Region::Boxes(u) => u.bounding_box(),
            Region::Points(p) => {
                p[1..].iter().fold(Rect::point(p[0].clone()), |acc, q| acc.hull(&Rect::point(q.clone())))
            }
        }
    }
}

/// Constants witnessing the growth conditions of a cardinality sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthCertificate {
    /// Largest `delta` in `(0, 1]` with `l_n >= exp(n^delta)` for `n <= horizon`.
    pub delta: f64,
    /// Grid search over `delta in {k 1e-4}`, a cross-check of `delta`.
    pub delta_grid: f64,
    /// `max_n sum_{k<=n} b_k / b_n` with `b_k = sqrt(l_k / LL(l_k))`.
    pub c_sqrt: f64,
    /// `max_n sum_{k<=n} b_k / (l_n / LL(l_n))`.
    pub c_linear: f64,
    pub horizon: usize,
    /// Leading terms dropped before validation.
    pub offset: usize,
}

fn b_term(l: f64) -> f64 {
    sqrt(l / ll_pos(l))
}

fn growth_holds(cards: &[u64], delta: f64) -> bool {
    cards.iter().enumerate().all(|(k, &l)| l as f64 >= exp(powf((k + 1) as f64, delta)))
}

/// Certify `l_{n+1} >= l_n >= exp(n^delta)` and the partial-sum condition for
/// `n <= horizon`.
///
/// Fails (with the 1-based index) on a decrease, on `l_1 < 3` (`exp(1) > 2`
/// for every `delta`), on a sequence whose last term equals its first (no
/// growth at all), or on a nonpositive `ln ln l_n`.
pub fn validate_growth(cards: &[u64], horizon: usize) -> Result<GrowthCertificate> {
    if cards.is_empty() {
        return Err(Error::Input("empty cardinality sequence".into()));
    }
    if horizon == 0 {
        return Err(Error::Input("horizon must be positive".into()));
    }
    let h = horizon.min(cards.len());
    let cards = &cards[..h];
    if let Some(k) = cards.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Validation {
            index: k + 2,
            reason: format!("cardinality decreases from {} to {}", cards[k], cards[k + 1]),
        });
    }
    if cards[0] < 3 {
        return Err(Error::Validation {
            index: 1,
            reason: format!("l_1 = {} is below e, so l_1 >= exp(1^delta) fails for every delta", cards[0]),
        });
    }
    if h >= 2 && cards[h - 1] == cards[0] {
        return Err(Error::Validation {
            index: h,
            reason: format!("no growth: l_n = {} for every n <= {h}", cards[0]),
        });
    }
    let mut delta = 1.0f64;
    for (k, &l) in cards.iter().enumerate().skip(1) {
        let n = (k + 1) as f64;
        let ratio = ln(ln(l as f64)) / ln(n);
        if !(ratio > 0.0) {
            return Err(Error::Validation { index: k + 1, reason: format!("ln ln l_n <= 0 at l_n = {l}") });
        }
        delta = delta.min(ratio);
    }
    // the minimizer holds with equality; step down until the floating replay agrees
    while !growth_holds(cards, delta) {
        delta *= 1.0 - 1e-12;
    }
    let mut delta_grid = 0.0;
    for k in (1..=10_000).rev() {
        let cand = k as f64 * 1e-4;
        if growth_holds(cards, cand) {
            delta_grid = cand;
            break;
        }
    }
    let mut partial = 0.0;
    let (mut c_sqrt, mut c_linear) = (0.0f64, 0.0f64);
    for &l in cards {
        let lf = l as f64;
        let b = b_term(lf);
        partial += b;
        c_sqrt = c_sqrt.max(partial / b);
        c_linear = c_linear.max(partial / (lf / ll_pos(lf)));
    }
    Ok(GrowthCertificate {
        delta,
        delta_grid,
        c_sqrt: c_sqrt * (1.0 + 1e-12),
        c_linear: c_linear * (1.0 + 1e-12),
        horizon: h,
        offset: 0,
    })
}

/// [`validate_growth`] after dropping leading terms below 3.
pub fn validate_growth_reindexed(cards: &[u64], horizon: usize) -> Result<GrowthCertificate> {
    let offset = cards.iter().position(|&l| l >= 3).unwrap_or(cards.len());
    let mut cert = validate_growth(&cards[offset..], horizon)?;
    cert.offset = offset;
    Ok(cert)
}

/// Replay both defining inequalities with the certificate's constants.
pub fn certificate_replays(cards: &[u64], cert: &GrowthCertificate) -> bool {
    let cards = &cards[cert.offset..cert.offset + cert.horizon];
    let mut partial = 0.0;
    growth_holds(cards, cert.delta)
        && cards.iter().all(|&l| {
            let lf = l as f64;
            partial += b_term(lf);
            partial <= cert.c_sqrt * b_term(lf) && partial <= cert.c_linear * lf / ll_pos(lf)
        })
}

/// A sequence of summation regions.
#[derive(Debug, Clone, PartialEq)]
pub struct SetSequence {
    pub regions: Vec<Region>,
    pub certificate: Option<GrowthCertificate>,
}

impl SetSequence {
    pub fn new(regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Input("empty region sequence".into()));
        }
        let d = regions[0].dim();
        if regions.iter().any(|r| r.dim() != d) {
            return Err(Error::Input("regions of mixed dimension".into()));
        }
        Ok(SetSequence { regions, certificate: None })
    }

    pub fn dim(&self) -> usize {
        self.regions[0].dim()
    }

    pub fn cardinalities(&self) -> Vec<u64> {
        self.regions.iter().map(Region::cardinality).collect()
    }

    /// Attach a growth certificate over the whole sequence.
    pub fn certify(mut self) -> Result<Self> {
        let cards = self.cardinalities();
        self.certificate = Some(validate_growth(&cards, cards.len())?);
        Ok(self)
    }

    pub fn bounding_box(&self) -> Rect {
        self.regions[1..].iter().fold(self.regions[0].bounding_box(), |acc, r| acc.hull(&r.bounding_box()))
    }
}

/// Nested boxes `[1, side(n)]` whose cardinalities track `c a^n`, with every
/// side at least 5 points. `c` is the smallest integer making the first box
/// feasible. The result carries a growth certificate.
pub fn geometric_union_sequence(d: usize, a: f64, count: usize) -> Result<SetSequence> {
    if !(a > 1.0) || !a.is_finite() {
        return Err(Error::Domain(format!("growth ratio must exceed 1, got {a}")));
    }
    if d == 0 || count == 0 {
        return Err(Error::Input("dimension and count must be positive".into()));
    }
    let min_card = powi(5.0, d as i32);
    let c = ceil(min_card / a).max(1.0);
    let mut sides = vec![5u64; d];
    let mut regions = Vec::with_capacity(count);
    for n in 1..=count {
        let target = c * powf(a, n as f64);
        if !(target < 9.0e15) {
            return Err(Error::Construction(format!("target cardinality {target} at n = {n} is too large")));
        }
        let target = floor(target) as u64;
        let root = floor(powf(target as f64, 1.0 / d as f64)) as u64;
        let mut next = vec![root.max(5); d];
        let head: u64 = next[..d - 1].iter().product();
        next[d - 1] = target.div_ceil(head).max(5);
        for (s, t) in sides.iter_mut().zip(&next) {
            *s = (*s).max(*t);
        }
        let hi = LatticeIndex::new(sides.iter().map(|&s| s as i64).collect());
        regions.push(Region::Boxes(RectUnion::single(Rect::anchored(&hi)?)));
    }
    let seq = SetSequence::new(regions)?;
    if count == 1 {
        let cards = seq.cardinalities();
        let cert = validate_growth(&cards, 1)
            .map_err(|e| Error::Construction(format!("single region fails the growth check: {e}")))?;
        return Ok(SetSequence { certificate: Some(cert), ..seq });
    }
    seq.certify().map_err(|e| Error::Construction(format!("generated sequence fails the growth check: {e}")))
}

fn floor_div(a: i64, m: i64) -> i64 {
    a.div_euclid(m)
}

fn ceil_div(a: i64, m: i64) -> i64 {
    -(-a).div_euclid(m)
}

fn check_residue(d: usize, j: u64, a: &LatticeIndex) -> Result<i64> {
    if j == 0 {
        return Err(Error::Domain("residue partitions need j >= 1".into()));
    }
    let m = 4 * j as i64 + 2;
    if a.dim() != d || a.coords().iter().any(|&c| c < 0 || c >= m) {
        return Err(Error::Domain(format!("residue {a} outside [0, {}]^{d}", m - 1)));
    }
    Ok(m)
}

/// Range of `i` with `lo <= m i + a <= hi`.
fn residue_range(lo: i64, hi: i64, m: i64, a: i64) -> (i64, i64) {
    (ceil_div(lo - a, m), floor_div(hi - a, m))
}

/// `{i : (4j+2) i + a in u}`, lexicographic within each box, boxes in order.
pub fn residue_partition(u: &RectUnion, j: u64, a: &LatticeIndex) -> Result<Vec<LatticeIndex>> {
    let m = check_residue(u.dim(), j, a)?;
    let mut out = Vec::new();
    for b in u.boxes() {
        let ranges: Vec<(i64, i64)> = (0..u.dim())
            .map(|q| residue_range(b.lo().coords()[q], b.hi().coords()[q], m, a.coords()[q]))
            .collect();
        if ranges.iter().any(|(l, h)| l > h) {
            continue;
        }
        let r = Rect::new(
            LatticeIndex::new(ranges.iter().map(|r| r.0).collect()),
            LatticeIndex::new(ranges.iter().map(|r| r.1).collect()),
        )?;
        out.extend(r.points());
    }
    Ok(out)
}

/// Exact size of the residue class of `a` inside one box:
/// `prod_q (floor((hi_q - a_q)/m) - ceil((lo_q - a_q)/m) + 1)`, clamped at 0.
pub fn residue_count(b: &Rect, j: u64, a: &LatticeIndex) -> Result<u64> {
    let m = check_residue(b.dim(), j, a)?;
    let mut n = 1u64;
    for q in 0..b.dim() {
        let (l, h) = residue_range(b.lo().coords()[q], b.hi().coords()[q], m, a.coords()[q]);
        n *= (h - l + 1).max(0) as u64;
    }
    Ok(n)
}

/// The count with both ends rounded down,
/// `prod_q (floor((hi_q - a_q)/m) - floor((lo_q - a_q)/m) + 1)`.
/// It agrees with [`residue_count`] exactly when `lo_q = a_q (mod m)` on every
/// axis and overcounts by one per axis otherwise.
pub fn residue_count_floor_form(b: &Rect, j: u64, a: &LatticeIndex) -> Result<u64> {
    let m = check_residue(b.dim(), j, a)?;
    let mut n = 1u64;
    for q in 0..b.dim() {
        let (lo, hi, aq) = (b.lo().coords()[q], b.hi().coords()[q], a.coords()[q]);
        n *= (floor_div(hi - aq, m) - floor_div(lo - aq, m) + 1).max(0) as u64;
    }
    Ok(n)
}

/// All residues `a` in `[0, 4j+1]^d`, lexicographic.
pub fn residues(d: usize, j: u64) -> Vec<LatticeIndex> {
    let m = 4 * j as i64 + 2;
    Rect::new(LatticeIndex::zeros(d), LatticeIndex::splat(d, m - 1)).expect("nonempty").points().collect()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ResidueCheck {
    pub residue: LatticeIndex,
    pub count: u64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Residue class sizes against `l / ((4j+2)^d 4^d) <= l^{a,j} <= l / (4j+2)^d`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionReport {
    pub j: u64,
    pub modulus: u64,
    pub cardinality: u64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub residues: Vec<ResidueCheck>,
    pub all_lower_ok: bool,
    pub all_upper_ok: bool,
    /// Every box has a point count divisible by `4j+2` on every axis, the
    /// regime where the upper bound holds with equality.
    pub divisible_regime: bool,
    /// Every box has at least `4j+2` points on every axis.
    pub sides_at_least_modulus: bool,
    /// Every box satisfies `hi_q - lo_q >= 4`.
    pub spans_at_least_four: bool,
    /// Class sizes add up to the cardinality.
    pub partition_complete: bool,
}

pub fn check_partition_bounds(u: &RectUnion, j: u64) -> Result<PartitionReport> {
    if j == 0 {
        return Err(Error::Domain("residue partitions need j >= 1".into()));
    }
    let d = u.dim();
    let m = 4 * j + 2;
    let ell = u.cardinality();
    let md = powf(m as f64, d as f64);
    let upper = ell as f64 / md;
    let lower = upper / powf(4.0, d as f64);
    let mut checks = Vec::new();
    let mut total = 0u64;
    for a in residues(d, j) {
        let mut count = 0;
        for b in u.boxes() {
            count += residue_count(b, j, &a)?;
        }
        total += count;
        let c = count as f64;
        checks.push(ResidueCheck { residue: a, count, lower_ok: c >= lower, upper_ok: c <= upper });
    }
    let per_axis = |pred: &dyn Fn(u64) -> bool| u.boxes().iter().all(|b| b.extents().iter().all(|&e| pred(e as u64)));
    Ok(PartitionReport {
        j,
        modulus: m,
        cardinality: ell,
        lower_bound: lower,
        upper_bound: upper,
        all_lower_ok: checks.iter().all(|c| c.lower_ok),
        all_upper_ok: checks.iter().all(|c| c.upper_ok),
        residues: checks,
        divisible_regime: per_axis(&|e| e % m == 0),
        sides_at_least_modulus: per_axis(&|e| e >= m),
        spans_at_least_four: u.spans_at_least(4),
        partition_complete: total == ell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(lo: &[i64], hi: &[i64]) -> Rect {
        Rect::new(LatticeIndex::new(lo.to_vec()), LatticeIndex::new(hi.to_vec())).unwrap()
    }

    #[test]
    fn growth_of_powers_of_four() {
        let cards: Vec<u64> = (1..=30).map(|n| 4u64.pow(n)).collect();
        let cert = validate_growth(&cards, 50).unwrap();
        assert_eq!(cert.delta, 1.0);
        assert!(cert.c_sqrt.is_finite() && cert.c_linear.is_finite());
        assert!(certificate_replays(&cards, &cert));
    }

    #[test]
    fn powers_of_two_fail_at_one() {
        let cards: Vec<u64> = (1..=30).map(|n| 2u64.pow(n)).collect();
        assert!(matches!(validate_growth(&cards, 50), Err(Error::Validation { index: 1, .. })));
        let cert = validate_growth_reindexed(&cards, 50).unwrap();
        assert_eq!(cert.offset, 1);
    }

    #[test]
    fn constant_and_decreasing_fail() {
        assert!(validate_growth(&[10; 20], 20).is_err());
        match validate_growth(&[5, 9, 8, 20], 4) {
            Err(Error::Validation { index, .. }) => assert_eq!(index, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn residue_counts_small_box() {
        let b = rect(&[0, 0], &[9, 9]);
        let u = RectUnion::single(b.clone());
        let a0 = LatticeIndex::zeros(2);
        assert_eq!(residue_partition(&u, 1, &a0).unwrap().len(), 4);
        assert_eq!(residue_count(&b, 1, &a0).unwrap(), 4);
        let a1 = LatticeIndex::from([1, 1]);
        assert_eq!(residue_count(&b, 1, &a1).unwrap(), 4);
        // lo - a = -1 is not a multiple of 6: the floor form overcounts
        assert_eq!(residue_count_floor_form(&b, 1, &a1).unwrap(), 9);
        assert!(residue_partition(&u, 1, &LatticeIndex::from([6, 0])).is_err());
    }

    #[test]
    fn documented_upper_bound_counterexample() {
        let u = RectUnion::single(rect(&[0, 0], &[9, 9]));
        let rep = check_partition_bounds(&u, 1).unwrap();
        let r0 = &rep.residues[0];
        assert_eq!((r0.count, r0.upper_ok), (4, false));
        assert!(!rep.divisible_regime && rep.sides_at_least_modulus && rep.partition_complete);
    }

    #[test]
    fn large_box_bounds() {
        let u = RectUnion::single(rect(&[0, 0], &[99, 99]));
        let rep = check_partition_bounds(&u, 1).unwrap();
        assert!(rep.all_lower_ok);
        assert!(rep.residues.iter().all(|c| (256..=289).contains(&c.count)));
        assert!(rep.residues.iter().any(|c| c.count == 289 && !c.upper_ok));
    }

    #[test]
    fn geometric_sequences() {
        let s = geometric_union_sequence(2, 4.0, 8).unwrap();
        assert_eq!(s.certificate.unwrap().delta, 1.0);
        let t = geometric_union_sequence(1, 2.0, 12).unwrap();
        assert!(t.certificate.is_some());
        assert!(t.cardinalities()[0] >= 3);
        assert_eq!(geometric_union_sequence(3, 1.5, 1).unwrap().regions.len(), 1);
    }

    #[test]
    fn overlapping_boxes_rejected() {
        assert!(RectUnion::new(2, vec![rect(&[0, 0], &[4, 4]), rect(&[4, 4], &[8, 8])]).is_err());
        assert!(RectUnion::new(2, vec![rect(&[0, 0], &[4, 4]), rect(&[5, 0], &[8, 8])]).is_ok());
    }
}
