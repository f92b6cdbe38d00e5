//! The bootstrap dynamics on tori and on bounded regions of `Z^d`.
//!
//! Closures are computed by a frontier sweep: whenever a site `y` becomes
//! infected, every site `y - x` (for `x` an element of some rule) is checked
//! by a full scan of the rules.

use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;
use thiserror::Error;

use crate::exactgeom::{linalg, QVec, Q};
use crate::family::{IntVec, UpdateFamily};
use crate::induced::InducedFamily;

/// Upper bound on the number of sites of a torus or region.
pub const MAX_SITES: usize = 1 << 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("{0} sites exceed the limit of {MAX_SITES}")]
    TooManySites(u128),
    #[error("side length must be at least 1")]
    EmptyTorus,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty interval on axis {0}")]
    EmptyInterval(usize),
    #[error("site {0:?} lies outside the region")]
    OutsideRegion(Vec<i64>),
    #[error("site set has {found} slots, region has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("rule element {0} is not in the region's lattice")]
    NotInLattice(String),
    #[error("zero direction")]
    ZeroDirection,
    #[error("window half-width {0} must exceed four times the family radius")]
    WindowTooSmall(i64),
}

type Result<T> = std::result::Result<T, SimError>;

/// Dense set of site indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SiteSet {
    bits: FixedBitSet,
}

impl SiteSet {
    pub fn new(len: usize) -> Self {
        SiteSet { bits: FixedBitSet::with_capacity(len) }
    }

    pub fn full(len: usize) -> Self {
        let mut s = SiteSet::new(len);
        s.bits.insert_range(..);
        s
    }

    pub fn from_indices(len: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = SiteSet::new(len);
        for i in idx {
            s.bits.insert(i);
        }
        s
    }

    /// Number of slots.
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Inserts `i`; true if it was absent.
    pub fn insert(&mut self, i: usize) -> bool {
        !self.bits.put(i)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.bits.contains(i)
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_full(&self) -> bool {
        self.bits.is_full()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn union_with(&mut self, other: &SiteSet) {
        self.bits.union_with(&other.bits);
    }

    /// Maximal runs of members as `(start, length)` pairs.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for i in self.iter() {
            match out.last_mut() {
                Some((s, l)) if *s + *l == i => *l += 1,
                _ => out.push((i, 1)),
            }
        }
        out
    }
}

/// `Z_n^d` with row-major site indices (axis 0 varies fastest).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Torus {
    pub d: usize,
    pub n: usize,
}

impl Torus {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(SimError::EmptyTorus);
        }
        let sites = (n as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        if sites > MAX_SITES as u128 {
            return Err(SimError::TooManySites(sites));
        }
        Ok(Torus { d, n })
    }

    pub fn sites(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Index of a point, coordinates reduced mod `n`.
    pub fn index(&self, x: &[i64]) -> usize {
        let n = self.n as i64;
        x.iter().rev().fold(0usize, |acc, &c| acc * self.n + c.rem_euclid(n) as usize)
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        (0..self.d)
            .map(|_| {
                let c = idx % self.n;
                idx /= self.n;
                c as i64
            })
            .collect()
    }

    pub fn empty_set(&self) -> SiteSet {
        SiteSet::new(self.sites())
    }

    pub fn full_set(&self) -> SiteSet {
        SiteSet::full(self.sites())
    }
}

/// Rules as plain integer vectors; the empty rule is allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    pub dim: usize,
    pub rules: Vec<Vec<IntVec>>,
}

impl RuleSet {
    pub fn from_family(u: &UpdateFamily) -> Self {
        RuleSet {
            dim: u.dimension(),
            rules: u.rules().iter().map(|r| r.elements().to_vec()).collect(),
        }
    }

    pub fn from_induced(f: &InducedFamily) -> Self {
        RuleSet { dim: f.dimension(), rules: f.rules().to_vec() }
    }

    /// Distinct elements over all rules.
    pub fn elements(&self) -> Vec<IntVec> {
        let mut e: Vec<IntVec> = self.rules.iter().flatten().cloned().collect();
        e.sort();
        e.dedup();
        e
    }

    pub fn radius_sq(&self) -> i64 {
        self.rules.iter().flatten().map(IntVec::norm_sq).max().unwrap_or(0)
    }
}

impl From<&UpdateFamily> for RuleSet {
    fn from(u: &UpdateFamily) -> Self {
        RuleSet::from_family(u)
    }
}

impl From<&InducedFamily> for RuleSet {
    fn from(f: &InducedFamily) -> Self {
        RuleSet::from_induced(f)
    }
}

/// The dynamics of a fixed rule set on a fixed torus, with rule offsets
/// reduced mod `n` once up front.
#[derive(Clone, Debug)]
pub struct TorusDynamics {
    torus: Torus,
    strides: Vec<usize>,
    rules: Vec<Vec<Vec<usize>>>,
    back: Vec<Vec<usize>>,
    has_empty_rule: bool,
}

impl TorusDynamics {
    pub fn new(rules: &RuleSet, torus: Torus) -> Result<Self> {
        if rules.dim != torus.d {
            return Err(SimError::DimensionMismatch { expected: torus.d, found: rules.dim });
        }
        let n = torus.n as i64;
        let r_sq = rules.radius_sq();
        if r_sq > 0 && n * n <= 4 * r_sq {
            log::warn!("torus side {n} is at most twice the family radius; rules wrap around the torus");
        }
        let reduce = |x: &IntVec| -> Vec<usize> { x.0.iter().map(|c| c.rem_euclid(n) as usize).collect() };
        let strides = (0..torus.d).map(|i| torus.n.pow(i as u32)).collect();
        Ok(TorusDynamics {
            torus,
            strides,
            rules: rules.rules.iter().map(|r| r.iter().map(reduce).collect()).collect(),
            back: rules.elements().iter().map(|x| reduce(&x.scaled(-1))).collect(),
            has_empty_rule: rules.rules.iter().any(Vec::is_empty),
        })
    }

    pub fn torus(&self) -> Torus {
        self.torus
    }

    #[inline]
    fn shift(&self, idx: usize, off: &[usize]) -> usize {
        let n = self.torus.n;
        let mut out = 0;
        for (axis, &o) in off.iter().enumerate() {
            let c = (idx / self.strides[axis]) % n;
            out += ((c + o) % n) * self.strides[axis];
        }
        out
    }

    #[inline]
    fn fires(&self, a: &SiteSet, y: usize) -> bool {
        self.rules.iter().any(|r| r.iter().all(|x| a.contains(self.shift(y, x))))
    }

    /// Closure of `a` in place, starting from the frontier `stack`. Returns
    /// the number of newly infected sites.
    fn spread(&self, a: &mut SiteSet, stack: &mut Vec<usize>) -> usize {
        let mut added = 0;
        while let Some(y) = stack.pop() {
            for x in &self.back {
                let z = self.shift(y, x);
                if !a.contains(z) && self.fires(a, z) {
                    a.insert(z);
                    stack.push(z);
                    added += 1;
                }
            }
        }
        added
    }

    pub fn close(&self, a: &SiteSet) -> SiteSet {
        if self.has_empty_rule {
            return self.torus.full_set();
        }
        let mut out = a.clone();
        let mut stack: Vec<usize> = a.iter().collect();
        self.spread(&mut out, &mut stack);
        out
    }

    pub fn percolates(&self, a: &SiteSet) -> bool {
        self.close(a).is_full()
    }

    /// Adds sites in the given order, keeping the set closed, and returns the
    /// position in `order` of the site whose addition makes the torus fully
    /// infected (`None` if it never does).
    pub fn completion_step(&self, order: &[usize]) -> Option<usize> {
        let total = self.torus.sites();
        if self.has_empty_rule {
            return if order.is_empty() { None } else { Some(0) };
        }
        let mut a = self.torus.empty_set();
        let mut infected = 0;
        let mut stack = Vec::new();
        for (pos, &site) in order.iter().enumerate() {
            if a.insert(site) {
                stack.push(site);
                infected += 1 + self.spread(&mut a, &mut stack);
            }
            if infected == total {
                return Some(pos);
            }
        }
        None
    }
}

pub fn close(u: &UpdateFamily, torus: Torus, a: &SiteSet) -> Result<SiteSet> {
    Ok(TorusDynamics::new(&RuleSet::from_family(u), torus)?.close(a))
}

pub fn percolates(u: &UpdateFamily, n: usize, a: &SiteSet) -> Result<bool> {
    let torus = Torus::new(u.dimension(), n)?;
    Ok(TorusDynamics::new(&RuleSet::from_family(u), torus)?.percolates(a))
}

type Predicate = Arc<dyn Fn(&[i64]) -> bool + Send + Sync>;

/// A finite window of a lattice: a box of local coordinates, optionally cut
/// down by a predicate, optionally placed in `Z^d` through `origin + sum c_i
/// basis_i`.
#[derive(Clone)]
pub struct Region {
    lo: Vec<i64>,
    hi: Vec<i64>,
    predicate: Option<Predicate>,
    lattice: Option<(IntVec, Vec<IntVec>)>,
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Region")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("predicate", &self.predicate.is_some())
            .field("lattice", &self.lattice)
            .finish()
    }
}

impl Region {
    /// The box `prod [lo_i, hi_i]` (inclusive).
    pub fn new_box(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(SimError::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if let Some(axis) = (0..lo.len()).find(|&i| lo[i] > hi[i]) {
            return Err(SimError::EmptyInterval(axis));
        }
        let sites = lo
            .iter()
            .zip(&hi)
            .try_fold(1u128, |acc, (l, h)| acc.checked_mul((h - l + 1) as u128))
            .unwrap_or(u128::MAX);
        if sites > MAX_SITES as u128 {
            return Err(SimError::TooManySites(sites));
        }
        Ok(Region { lo, hi, predicate: None, lattice: None })
    }

    /// `[-half, half]^d`.
    pub fn cube(d: usize, half: i64) -> Result<Self> {
        Region::new_box(vec![-half; d], vec![half; d])
    }

    pub fn with_predicate(mut self, pred: impl Fn(&[i64]) -> bool + Send + Sync + 'static) -> Self {
        self.predicate = Some(Arc::new(pred));
        self
    }

    /// Places local coordinates on the lattice `origin + span_Z(basis)`.
    pub fn with_lattice(mut self, origin: IntVec, basis: Vec<IntVec>) -> Result<Self> {
        if basis.len() != self.dim() {
            return Err(SimError::DimensionMismatch { expected: self.dim(), found: basis.len() });
        }
        self.lattice = Some((origin, basis));
        Ok(self)
    }

    /// Dimension of the local coordinates.
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Number of box slots (including those the predicate excludes).
    pub fn slots(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l + 1) as usize).product()
    }

    pub fn index(&self, x: &[i64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut idx = 0usize;
        for axis in (0..self.dim()).rev() {
            let (l, h) = (self.lo[axis], self.hi[axis]);
            if x[axis] < l || x[axis] > h {
                return None;
            }
            idx = idx * (h - l + 1) as usize + (x[axis] - l) as usize;
        }
        Some(idx)
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        (0..self.dim())
            .map(|axis| {
                let w = (self.hi[axis] - self.lo[axis] + 1) as usize;
                let c = (idx % w) as i64 + self.lo[axis];
                idx /= w;
                c
            })
            .collect()
    }

    /// Whether the local point belongs to the region.
    pub fn contains(&self, x: &[i64]) -> bool {
        self.index(x).is_some() && self.predicate.as_ref().is_none_or(|p| p(x))
    }

    /// The point of `Z^d` at local coordinates `x`.
    pub fn to_ambient(&self, x: &[i64]) -> Vec<i64> {
        match &self.lattice {
            None => x.to_vec(),
            Some((origin, basis)) => {
                let mut out = origin.0.clone();
                for (c, b) in x.iter().zip(basis) {
                    for (o, bi) in out.iter_mut().zip(&b.0) {
                        *o += c * bi;
                    }
                }
                out
            }
        }
    }

    /// Mask of slots inside the region.
    pub fn mask(&self) -> SiteSet {
        match &self.predicate {
            None => SiteSet::full(self.slots()),
            Some(p) => SiteSet::from_indices(self.slots(), (0..self.slots()).filter(|&i| p(&self.coords(i)))),
        }
    }

    /// A site set from local points, all of which must lie in the region.
    pub fn set_from_points(&self, points: &[Vec<i64>]) -> Result<SiteSet> {
        let mut s = SiteSet::new(self.slots());
        for x in points {
            if !self.contains(x) {
                return Err(SimError::OutsideRegion(x.clone()));
            }
            s.insert(self.index(x).expect("contained"));
        }
        Ok(s)
    }

    /// Rule elements in local coordinates.
    fn local_rules(&self, rules: &RuleSet) -> Result<Vec<Vec<Vec<i64>>>> {
        let Some((_, basis)) = &self.lattice else {
            if rules.dim != self.dim() {
                return Err(SimError::DimensionMismatch { expected: self.dim(), found: rules.dim });
            }
            return Ok(rules.rules.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect());
        };
        let cols: Vec<Vec<Q>> = basis.iter().map(|b| QVec::from_int_vec(b).0).collect();
        let convert = |x: &IntVec| -> Result<Vec<i64>> {
            if x.dim() != rules.dim || basis.first().is_some_and(|b| b.dim() != x.dim()) {
                return Err(SimError::DimensionMismatch { expected: rules.dim, found: x.dim() });
            }
            let c = linalg::solve_in_span(&cols, &QVec::from_int_vec(x).0)
                .ok_or_else(|| SimError::NotInLattice(x.to_string()))?;
            c.iter()
                .map(|q| if q.is_integer() { q.to_integer().to_i64() } else { None })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| SimError::NotInLattice(x.to_string()))
        };
        rules
            .rules
            .iter()
            .map(|r| r.iter().map(convert).collect())
            .collect()
    }
}

/// Closure of `a` under the process restricted to `region`: a site is
/// infected only if it lies in the region and some rule's translate is
/// fully infected inside the region.
pub fn close_restricted(rules: &RuleSet, region: &Region, a: &SiteSet) -> Result<SiteSet> {
    if a.len() != region.slots() {
        return Err(SimError::SizeMismatch { expected: region.slots(), found: a.len() });
    }
    let mask = region.mask();
    if let Some(i) = a.iter().find(|&i| !mask.contains(i)) {
        return Err(SimError::OutsideRegion(region.coords(i)));
    }
    let local = region.local_rules(rules)?;
    if local.iter().any(Vec::is_empty) {
        return Ok(mask);
    }
    let mut back: Vec<Vec<i64>> = local.iter().flatten().map(|x| x.iter().map(|c| -c).collect()).collect();
    back.sort();
    back.dedup();

    let shifted = |y: &[i64], x: &[i64]| -> Option<usize> {
        let z: Vec<i64> = y.iter().zip(x).map(|(a, b)| a + b).collect();
        region.index(&z).filter(|&i| mask.contains(i))
    };
    let mut out = a.clone();
    let mut stack: Vec<usize> = a.iter().collect();
    while let Some(yi) = stack.pop() {
        let y = region.coords(yi);
        for x in &back {
            let Some(zi) = shifted(&y, x) else { continue };
            if out.contains(zi) {
                continue;
            }
            let z = region.coords(zi);
            let fires = local
                .iter()
                .any(|r| r.iter().all(|e| shifted(&z, e).is_some_and(|i| out.contains(i))));
            if fires {
                out.insert(zi);
                stack.push(zi);
            }
        }
    }
    Ok(out)
}

/// Whether the restricted closure of `a` covers the whole region.
pub fn internally_filled(rules: &RuleSet, region: &Region, a: &SiteSet) -> Result<bool> {
    let closed = close_restricted(rules, region, a)?;
    Ok(region.mask().is_subset(&closed))
}

/// Finite-window test of whether the discrete half-space `<x, u> < 0` is
/// closed under the dynamics.
///
/// Runs the restricted process on `[-half, half]^d` and reports whether any
/// site with `<x, u> >= 0` within sup-distance `half - 2 R_0` of the origin
/// gets infected.
pub fn probe_stability(u: &UpdateFamily, dir: &QVec, half: i64) -> Result<bool> {
    let d = u.dimension();
    if dir.dim() != d {
        return Err(SimError::DimensionMismatch { expected: d, found: dir.dim() });
    }
    if dir.is_zero() {
        return Err(SimError::ZeroDirection);
    }
    let r_sq = u.radius_sq_int();
    // half > 4 R_0 and half >= 0.
    if half <= 0 || half * half <= 16 * r_sq {
        return Err(SimError::WindowTooSmall(half));
    }
    // Largest integer margin m with m <= half - 2 R_0.
    let mut margin = half;
    while margin >= 0 && (half - margin) * (half - margin) < 4 * r_sq {
        margin -= 1;
    }
    let region = Region::cube(d, half)?;
    let below = |x: &[i64]| QVec::from_ints(x).dot(dir).is_negative();
    let a = SiteSet::from_indices(region.slots(), (0..region.slots()).filter(|&i| below(&region.coords(i))));
    let closed = close_restricted(&RuleSet::from_family(u), &region, &a)?;
    let leaked = closed.iter().any(|i| {
        let x = region.coords(i);
        !below(&x) && x.iter().all(|c| c.abs() <= margin)
    });
    Ok(!leaked)
}
