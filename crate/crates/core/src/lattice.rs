//! Points and boxes of `Z^d`, dense value grids, and prefix-sum tables.
//!
//! Grids are stored row-major with coordinate 1 as the slowest-varying axis
//! ("dimension-1-major"). A [`PrefixTable`] answers any box sum with `2^d`
//! lookups.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// A point of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct LatticeIndex(pub Vec<i64>);

impl LatticeIndex {
    pub fn new(coords: Vec<i64>) -> Self {
        LatticeIndex(coords)
    }

    pub fn zeros(d: usize) -> Self {
        LatticeIndex(vec![0; d])
    }

    /// `(c, c, ..., c)`.
    pub fn splat(d: usize, c: i64) -> Self {
        LatticeIndex(vec![c; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn sup_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// Coordinatewise order `self <= other`.
    pub fn precedes(&self, other: &LatticeIndex) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &LatticeIndex) -> LatticeIndex {
        LatticeIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &LatticeIndex) -> LatticeIndex {
        LatticeIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> LatticeIndex {
        LatticeIndex(self.0.iter().map(|a| -a).collect())
    }

    /// Product of the coordinates (the cardinality `|n|` of the box `[1, n]`).
    pub fn volume(&self) -> u64 {
        self.0.iter().map(|&c| c.max(0) as u64).product()
    }
}

impl From<Vec<i64>> for LatticeIndex {
    fn from(v: Vec<i64>) -> Self {
        LatticeIndex(v)
    }
}

impl<const N: usize> From<[i64; N]> for LatticeIndex {
    fn from(v: [i64; N]) -> Self {
        LatticeIndex(v.to_vec())
    }
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A nonempty box `lo <= i <= hi` of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RectRepr", into = "RectRepr"))]
pub struct Rect {
    lo: LatticeIndex,
    hi: LatticeIndex,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct RectRepr {
    lo: LatticeIndex,
    hi: LatticeIndex,
}

#[cfg(feature = "serde")]
impl TryFrom<RectRepr> for Rect {
    type Error = Error;
    fn try_from(r: RectRepr) -> Result<Self> {
        Rect::new(r.lo, r.hi)
    }
}

#[cfg(feature = "serde")]
impl From<Rect> for RectRepr {
    fn from(r: Rect) -> Self {
        RectRepr { lo: r.lo, hi: r.hi }
    }
}

impl Rect {
    pub fn new(lo: LatticeIndex, hi: LatticeIndex) -> Result<Self> {
        if lo.dim() != hi.dim() || lo.dim() == 0 {
            return Err(Error::Input(format!(
                "box corners must share a positive dimension, got {} and {}",
                lo.dim(),
                hi.dim()
            )));
        }
        if let Some(q) = (0..lo.dim()).find(|&q| lo.0[q] > hi.0[q]) {
            return Err(Error::Input(format!(
                "empty box: coordinate {} has lo {} > hi {}",
                q + 1,
                lo.0[q],
                hi.0[q]
            )));
        }
        Ok(Rect { lo, hi })
    }

    /// The anchored box `[1, n]`.
    pub fn anchored(n: &LatticeIndex) -> Result<Self> {
        Rect::new(LatticeIndex::splat(n.dim(), 1), n.clone())
    }

    /// The cube `[lo, lo + side - 1]^d`.
    pub fn cube(d: usize, lo: i64, side: u64) -> Result<Self> {
        if side == 0 {
            return Err(Error::Input("cube side must be positive".into()));
        }
        Rect::new(LatticeIndex::splat(d, lo), LatticeIndex::splat(d, lo + side as i64 - 1))
    }

    pub fn point(p: LatticeIndex) -> Self {
        Rect { lo: p.clone(), hi: p }
    }

    pub fn lo(&self) -> &LatticeIndex {
        &self.lo
    }

    pub fn hi(&self) -> &LatticeIndex {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    /// Number of points along each axis.
    pub fn extents(&self) -> Vec<usize> {
        self.lo.0.iter().zip(&self.hi.0).map(|(a, b)| (b - a + 1) as usize).collect()
    }

    pub fn cardinality(&self) -> u64 {
        self.extents().iter().map(|&e| e as u64).product()
    }

    pub fn contains(&self, p: &LatticeIndex) -> bool {
        self.lo.precedes(p) && p.precedes(&self.hi)
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|q| self.lo.0[q] <= other.hi.0[q] && other.lo.0[q] <= self.hi.0[q])
    }

    /// The box grown by `r` in every direction.
    pub fn inflate(&self, r: u64) -> Rect {
        let r = r as i64;
        Rect {
            lo: LatticeIndex(self.lo.0.iter().map(|c| c - r).collect()),
            hi: LatticeIndex(self.hi.0.iter().map(|c| c + r).collect()),
        }
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &Rect) -> Rect {
        Rect {
            lo: LatticeIndex(self.lo.0.iter().zip(&other.lo.0).map(|(a, b)| *a.min(b)).collect()),
            hi: LatticeIndex(self.hi.0.iter().zip(&other.hi.0).map(|(a, b)| *a.max(b)).collect()),
        }
    }

    /// Points in lexicographic order (last coordinate fastest).
    pub fn points(&self) -> RectPoints<'_> {
        RectPoints { rect: self, next: Some(self.lo.clone()) }
    }
}

pub struct RectPoints<'a> {
    rect: &'a Rect,
    next: Option<LatticeIndex>,
}

impl Iterator for RectPoints<'_> {
    type Item = LatticeIndex;

    fn next(&mut self) -> Option<LatticeIndex> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let d = succ.dim();
        let mut q = d;
        while q > 0 {
            q -= 1;
            if succ.0[q] < self.rect.hi.0[q] {
                succ.0[q] += 1;
                self.next = Some(succ);
                return Some(current);
            }
            succ.0[q] = self.rect.lo.0[q];
        }
        Some(current)
    }
}

/// Row-major strides for the given extents.
pub(crate) fn strides(extents: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; extents.len()];
    for q in (0..extents.len().saturating_sub(1)).rev() {
        s[q] = s[q + 1] * extents[q + 1];
    }
    s
}

/// Real values on a dense block of `Z^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGrid {
    rect: Rect,
    extents: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl ValueGrid {
    pub fn zeros(rect: Rect) -> Self {
        let extents = rect.extents();
        let n = extents.iter().product();
        ValueGrid { strides: strides(&extents), extents, rect, values: vec![0.0; n] }
    }

    /// Grid over `rect` from values in row-major order.
    pub fn from_values(rect: Rect, values: Vec<f64>) -> Result<Self> {
        let extents = rect.extents();
        let n: usize = extents.iter().product();
        if values.len() != n {
            return Err(Error::Input(format!("grid needs {n} values, got {}", values.len())));
        }
        Ok(ValueGrid { strides: strides(&extents), extents, rect, values })
    }

    pub fn from_fn<F: FnMut(&LatticeIndex) -> f64>(rect: Rect, mut f: F) -> Self {
        let values = rect.points().map(|p| f(&p)).collect();
        let extents = rect.extents();
        ValueGrid { strides: strides(&extents), extents, rect, values }
    }

    pub fn rect(&self) -> &Rect {
        &self.rect
    }

    pub fn origin(&self) -> &LatticeIndex {
        self.rect.lo()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn dim(&self) -> usize {
        self.rect.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Linear offset of a lattice point, if inside the grid.
    pub fn offset(&self, p: &LatticeIndex) -> Option<usize> {
        if p.dim() != self.dim() {
            return None;
        }
        let mut off = 0;
        for q in 0..self.dim() {
            let rel = p.0[q] - self.rect.lo.0[q];
            if rel < 0 || rel as usize >= self.extents[q] {
                return None;
            }
            off += rel as usize * self.strides[q];
        }
        Some(off)
    }

    pub fn get(&self, p: &LatticeIndex) -> Result<f64> {
        match self.offset(p) {
            Some(k) => Ok(self.values[k]),
            None => Err(Error::Domain(format!("point {p} outside grid {:?}..{:?}", self.rect.lo.0, self.rect.hi.0))),
        }
    }

    /// Lattice point of a linear offset.
    pub fn index_of(&self, mut off: usize) -> LatticeIndex {
        let mut c = vec![0; self.dim()];
        for q in 0..self.dim() {
            c[q] = self.rect.lo.0[q] + (off / self.strides[q]) as i64;
            off %= self.strides[q];
        }
        LatticeIndex(c)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> ValueGrid {
        ValueGrid { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn scale(&self, alpha: f64) -> ValueGrid {
        self.map(|v| alpha * v)
    }

    /// Copy of the values on a sub-box.
    pub fn restrict(&self, sub: &Rect) -> Result<ValueGrid> {
        if !self.rect.contains_rect(sub) {
            return Err(Error::Domain(format!("sub-box {:?}..{:?} leaves the grid", sub.lo.0, sub.hi.0)));
        }
        Ok(ValueGrid::from_fn(sub.clone(), |p| self.values[self.offset(p).expect("inside")]))
    }
}

/// Anchored partial sums: entry at `n` is the sum of the source grid over
/// `[origin, n]`.
///
/// Each entry is kept as an unevaluated pair `hi + lo` (double-double), so a
/// rectangle sum formed from large anchored sums keeps full relative accuracy
/// even when the rectangle is small.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixTable {
    grid: ValueGrid,
    lo: Vec<f64>,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn dd_add(ah: f64, al: f64, bh: f64, bl: f64) -> (f64, f64) {
    let (s, e) = two_sum(ah, bh);
    let e = e + al + bl;
    let h = s + e;
    (h, e - (h - s))
}

/// Build the table with one cumulative sweep per axis, axis 1 first.
pub fn build_prefix_table(grid: &ValueGrid) -> PrefixTable {
    let mut t = grid.clone();
    let n = t.values.len();
    let mut lo = vec![0.0; n];
    for q in 0..t.dim() {
        let s = t.strides[q];
        let e = t.extents[q];
        for k in 0..n {
            if (k / s) % e > 0 {
                let (h, l) = dd_add(t.values[k], lo[k], t.values[k - s], lo[k - s]);
                t.values[k] = h;
                lo[k] = l;
            }
        }
    }
    PrefixTable { grid: t, lo }
}

impl PrefixTable {
    pub fn new(grid: &ValueGrid) -> Self {
        build_prefix_table(grid)
    }

    pub fn rect(&self) -> &Rect {
        self.grid.rect()
    }

    /// Anchored sum over `[origin, n]` for a point `n` of the domain.
    pub fn anchored_sum(&self, n: &LatticeIndex) -> Result<f64> {
        self.grid.get(n)
    }

    /// Anchored sums in grid order, rounded to `f64`.
    pub fn entries(&self) -> &[f64] {
        self.grid.values()
    }

    pub fn as_grid(&self) -> &ValueGrid {
        &self.grid
    }

    /// Sum over `r` by `2^d`-term inclusion-exclusion.
    pub fn sum_over_rect(&self, r: &Rect) -> Result<f64> {
        let dom = self.grid.rect();
        if r.dim() != dom.dim() {
            return Err(Error::Domain(format!("box has dimension {}, table has {}", r.dim(), dom.dim())));
        }
        for q in 0..r.dim() {
            if r.lo.0[q] < dom.lo.0[q] || r.hi.0[q] > dom.hi.0[q] {
                return Err(Error::Domain(format!(
                    "coordinate {} of box [{}, {}] leaves table range [{}, {}]",
                    q + 1,
                    r.lo.0[q],
                    r.hi.0[q],
                    dom.lo.0[q],
                    dom.hi.0[q]
                )));
            }
        }
        Ok(self.sum_unchecked(r.lo.coords(), r.hi.coords()))
    }

    /// Inclusion-exclusion on raw corner coordinates already known to be in range.
    pub(crate) fn sum_unchecked(&self, lo: &[i64], hi: &[i64]) -> f64 {
        let d = lo.len();
        let origin = self.grid.rect.lo.coords();
        let (mut th, mut tl) = (0.0, 0.0);
        'corners: for mask in 0u32..(1 << d) {
            let mut off = 0usize;
            for q in 0..d {
                let c = if mask & (1 << q) != 0 {
                    let c = lo[q] - 1;
                    if c < origin[q] {
                        continue 'corners;
                    }
                    c
                } else {
                    hi[q]
                };
                off += (c - origin[q]) as usize * self.grid.strides[q];
            }
            let (h, l) = (self.grid.values[off], self.lo[off]);
            (th, tl) = if mask.count_ones() % 2 == 0 { dd_add(th, tl, h, l) } else { dd_add(th, tl, -h, -l) };
        }
        th + tl
    }
}

/// All `n` with every coordinate in `{2^0, ..., 2^max_exponent}`, lexicographic.
pub fn dyadic_indices(max_exponent: u32, d: usize) -> Vec<LatticeIndex> {
    let exps = Rect::new(LatticeIndex::zeros(d), LatticeIndex::splat(d, max_exponent as i64))
        .expect("nonempty exponent box");
    exps.points().map(|e| LatticeIndex(e.0.iter().map(|&k| 1i64 << k).collect())).collect()
}

/// Points with `||i||_inf == j` in lexicographic order.
pub fn shell(d: usize, j: u64) -> Vec<LatticeIndex> {
    let j = j as i64;
    Rect::new(LatticeIndex::splat(d, -j), LatticeIndex::splat(d, j))
        .expect("nonempty")
        .points()
        .filter(|p| p.sup_norm() == j as u64)
        .collect()
}

/// Points with `||i||_inf <= j`.
pub fn ball(d: usize, j: u64) -> Vec<LatticeIndex> {
    let j = j as i64;
    Rect::new(LatticeIndex::splat(d, -j), LatticeIndex::splat(d, j)).expect("nonempty").points().collect()
}
