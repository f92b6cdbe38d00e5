//! Resistance of a hemisphere formula on a sphere, and of an update family.
//!
//! The sphere of an ambient subspace is cut into cells by the hyperplanes
//! orthogonal to a finite set of lines (see [`cell_basis`]). Every cell is a
//! relatively open convex cone, the induced resistance is constant on it, and
//! the minimum over open hemispheres of the maximum induced resistance is
//! found by closed-cone separation.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactgeom::{
    separate_generators, sign_witness, sign_witness_coords, GeomError, QSubspace, QVec, SignSystem, Q,
};
use crate::family::{IntVec, UpdateFamily};
use crate::induced::{induced_family, triviality, Triviality};
use crate::stableset::{formula_of_induced, stable_formula, HemisphereFormula, StableSetError};

/// Largest ambient dimension handled by the cell enumeration.
pub const MAX_AMBIENT_DIM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ResistanceError {
    #[error("ambient dimension {0} exceeds the supported envelope (at most 4)")]
    Unsupported(usize),
    #[error("ambient subspace is zero-dimensional")]
    ZeroAmbient,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Formula(#[from] StableSetError),
}

type Result<T> = std::result::Result<T, ResistanceError>;

/// A formula on the unit sphere of its ambient subspace.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SphereProblem {
    formula: HemisphereFormula,
}

impl SphereProblem {
    pub fn new(formula: HemisphereFormula) -> Result<Self> {
        let m = formula.ambient().dim();
        if m == 0 {
            return Err(ResistanceError::ZeroAmbient);
        }
        Ok(SphereProblem { formula: formula.simplify() })
    }

    pub fn of_family(family: &UpdateFamily) -> Result<Self> {
        SphereProblem::new(stable_formula(family))
    }

    /// The problem of `U[W]` on the sphere of `W^⊥`.
    pub fn of_induced(family: &UpdateFamily, w: &[QVec]) -> Result<Self> {
        SphereProblem::new(formula_of_induced(&induced_family(family, w)))
    }

    pub fn ambient(&self) -> &QSubspace {
        self.formula.ambient()
    }

    pub fn formula(&self) -> &HemisphereFormula {
        &self.formula
    }

    /// Dimension `m` of the ambient subspace.
    pub fn dim(&self) -> usize {
        self.ambient().dim()
    }
}

/// The lines cutting the sphere into cells, as canonical representatives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellBasis {
    pub lines: Vec<QVec>,
}

/// Formula centers, a basis of the ambient `V` and a basis of `V^⊥`.
pub fn cell_basis(p: &SphereProblem) -> CellBasis {
    let amb = p.ambient();
    let mut lines: Vec<QVec> = p
        .formula
        .centers()
        .iter()
        .chain(amb.basis())
        .chain(amb.complement().basis())
        .map(QVec::canonical_line)
        .collect();
    lines.sort();
    lines.dedup();
    CellBasis { lines }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cell {
    /// Sign of `<b, x>` for each line `b` of the cell basis.
    pub signs: Vec<i8>,
    pub witness: QVec,
    pub rho: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", content = "r", rename_all = "lowercase")]
pub enum Class {
    Supercritical,
    Critical(u32),
    Subcritical,
}

impl Class {
    pub fn from_resistance(r: u32, d: usize) -> Class {
        if r <= 1 {
            Class::Supercritical
        } else if (r as usize) <= d {
            Class::Critical(r)
        } else {
            Class::Subcritical
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Class::Supercritical => "supercritical",
            Class::Critical(_) => "critical",
            Class::Subcritical => "subcritical",
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Class::Critical(r) => write!(f, "critical({r})"),
            c => f.write_str(c.name()),
        }
    }
}

/// Full result of the top-level computation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Analysis {
    pub resistance: u32,
    pub class: Class,
    /// Pole of an open hemisphere on which every induced resistance is at
    /// most `resistance - 1`.
    pub easy_direction: QVec,
    pub cell_count: usize,
}

struct Solved {
    r: u32,
    pole: QVec,
}

/// Resistance calculator with a memo of solved sub-sphere problems.
///
/// Sub-problems are keyed by their canonical formula (ambient basis plus
/// sorted clauses). The lock is never held while computing, so two threads
/// may solve the same key; both store the same value.
#[derive(Default)]
pub struct Analyzer {
    memo: Mutex<HashMap<HemisphereFormula, u32>>,
}

impl Analyzer {
    pub fn new() -> Self {
        Analyzer::default()
    }

    /// Number of memoized sub-problems.
    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("memo poisoned").len()
    }

    /// Cells of the arrangement, with their induced resistances.
    pub fn cells(&self, p: &SphereProblem) -> Result<Vec<Cell>> {
        let basis = cell_basis(p);
        let raw = sign_cells(p, &basis)?;
        raw.into_par_iter()
            .map(|(signs, witness)| {
                let rho = self.rho(p, &witness)?;
                Ok(Cell { signs, witness, rho })
            })
            .collect()
    }

    /// Induced resistance of the direction `u`.
    pub fn rho(&self, p: &SphereProblem, u: &QVec) -> Result<u32> {
        if !p.formula.contains(u)? {
            return Ok(0);
        }
        if p.dim() == 1 {
            return Ok(1);
        }
        let sub = SphereProblem::new(p.formula.restrict_at(u)?)?;
        self.resistance_of(&sub)
    }

    pub fn resistance_of(&self, p: &SphereProblem) -> Result<u32> {
        if let Some(&r) = self.memo.lock().expect("memo poisoned").get(&p.formula) {
            return Ok(r);
        }
        let r = self.solve(p)?.r;
        self.memo.lock().expect("memo poisoned").insert(p.formula.clone(), r);
        Ok(r)
    }

    fn solve(&self, p: &SphereProblem) -> Result<Solved> {
        let cells = self.cells(p)?;
        Ok(self.solve_with(p, &cells))
    }

    fn solve_with(&self, p: &SphereProblem, cells: &[Cell]) -> Solved {
        let m = p.dim() as u32;
        let lines = cell_basis(p).lines;
        let mut closures: Vec<Option<Vec<QVec>>> = vec![None; cells.len()];
        for s in 0..=m {
            let bad: Vec<usize> = (0..cells.len()).filter(|&i| cells[i].rho > s).collect();
            if bad.is_empty() {
                return Solved { r: s + 1, pole: p.ambient().basis()[0].clone() };
            }
            let mut gens = Vec::new();
            for &i in &bad {
                let g = closures[i].get_or_insert_with(|| {
                    SignSystem::from_signs(p.ambient().clone(), &lines, &cells[i].signs).closure_generators()
                });
                gens.extend(g.iter().cloned());
            }
            if let Some(w) = separate_generators(&gens, p.ambient()) {
                return Solved { r: s + 1, pole: w };
            }
        }
        unreachable!("rho never exceeds the ambient dimension")
    }

    /// Maximum induced resistance over the open halfspace `<., w> > 0`.
    pub fn max_rho_halfspace(&self, p: &SphereProblem, w: &QVec) -> Result<u32> {
        let cells = self.cells(p)?;
        max_rho_on_halfspace(p, &cells, w)
    }

    pub fn analyze(&self, p: &SphereProblem) -> Result<Analysis> {
        let cells = self.cells(p)?;
        let solved = self.solve_with(p, &cells);
        self.memo.lock().expect("memo poisoned").insert(p.formula.clone(), solved.r);
        Ok(Analysis {
            resistance: solved.r,
            class: Class::from_resistance(solved.r, p.dim()),
            easy_direction: solved.pole,
            cell_count: cells.len(),
        })
    }
}

fn max_rho_on_halfspace(p: &SphereProblem, cells: &[Cell], w: &QVec) -> Result<u32> {
    if w.is_zero() {
        return Err(GeomError::ZeroVector.into());
    }
    if !p.ambient().contains(w) {
        return Err(GeomError::OutsideAmbient.into());
    }
    let lines = cell_basis(p).lines;
    let amb = p.ambient();
    let w_row = amb.row_of(w);
    let mut best = 0;
    for c in cells {
        if c.rho <= best {
            continue;
        }
        let mut pos: Vec<Vec<Q>> = vec![w_row.clone()];
        let mut zero = Vec::new();
        for (b, &s) in lines.iter().zip(&c.signs) {
            let row = amb.row_of(b);
            match s {
                0 => zero.push(row),
                1 => pos.push(row),
                _ => pos.push(row.into_iter().map(|a| -a).collect()),
            }
        }
        if sign_witness_coords(amb.dim(), &pos, &zero).is_some() {
            best = c.rho;
        }
    }
    Ok(best)
}

fn check_envelope(p: &SphereProblem) -> Result<()> {
    let m = p.dim();
    if m > MAX_AMBIENT_DIM || p.ambient().ambient_dim() > MAX_AMBIENT_DIM {
        return Err(ResistanceError::Unsupported(m.max(p.ambient().ambient_dim())));
    }
    Ok(())
}

/// Sign vectors of all nonempty cells, each with a primitive witness.
///
/// Hyperplanes are added one at a time; a partial cell keeps the sign its
/// witness already has for free and is probed for the other two signs.
fn sign_cells(p: &SphereProblem, basis: &CellBasis) -> Result<Vec<(Vec<i8>, QVec)>> {
    check_envelope(p)?;
    let amb = p.ambient();
    let m = amb.dim();
    let rows: Vec<Vec<Q>> = basis.lines.iter().map(|b| amb.row_of(b)).collect();
    let mut partial: Vec<(Vec<i8>, Vec<Q>)> = vec![(Vec::new(), {
        let mut y = vec![Q::zero(); m];
        y[0] = Q::from_integer(1.into());
        y
    })];
    for (k, row) in rows.iter().enumerate() {
        let mut next = Vec::with_capacity(partial.len() * 2);
        for (signs, y) in partial {
            let own = crate::exactgeom::sign_of(&crate::exactgeom::linalg::dot(row, &y));
            for s in [-1i8, 0, 1] {
                if s == own {
                    let mut sg = signs.clone();
                    sg.push(s);
                    next.push((sg, y.clone()));
                    continue;
                }
                let mut sg = signs.clone();
                sg.push(s);
                if let Some(y2) = witness_for(&rows[..=k], &sg, m) {
                    next.push((sg, y2));
                }
            }
        }
        partial = next;
    }
    let mut cells: Vec<(Vec<i8>, QVec)> = partial
        .into_iter()
        .map(|(s, y)| (s, amb.from_coordinates(&y).primitive()))
        .collect();
    cells.sort();
    Ok(cells)
}

fn witness_for(rows: &[Vec<Q>], signs: &[i8], m: usize) -> Option<Vec<Q>> {
    let mut pos = Vec::new();
    let mut zero = Vec::new();
    for (row, &s) in rows.iter().zip(signs) {
        match s {
            0 => zero.push(row.clone()),
            1 => pos.push(row.clone()),
            _ => pos.push(row.iter().map(|a| -a).collect()),
        }
    }
    sign_witness_coords(m, &pos, &zero)
}

/// All nonempty cells with their induced resistances.
pub fn enumerate_cells(p: &SphereProblem) -> Result<Vec<Cell>> {
    Analyzer::new().cells(p)
}

pub fn rho(p: &SphereProblem, u: &QVec) -> Result<u32> {
    check_envelope(p)?;
    Analyzer::new().rho(p, u)
}

pub fn resistance_of(p: &SphereProblem) -> Result<u32> {
    check_envelope(p)?;
    Analyzer::new().resistance_of(p)
}

pub fn resistance(family: &UpdateFamily) -> Result<u32> {
    resistance_of(&SphereProblem::of_family(family)?)
}

pub fn analyze(family: &UpdateFamily) -> Result<Analysis> {
    let p = SphereProblem::of_family(family)?;
    check_envelope(&p)?;
    Analyzer::new().analyze(&p)
}

pub fn classify(family: &UpdateFamily) -> Result<Class> {
    Ok(Class::from_resistance(resistance(family)?, family.dimension()))
}

/// Direct supercriticality test: is there an open hemisphere missing every
/// stable direction?
pub fn supercritical_by_hemisphere(family: &UpdateFamily) -> Result<bool> {
    let p = SphereProblem::of_family(family)?;
    let basis = cell_basis(&p);
    let mut gens = Vec::new();
    for (signs, witness) in sign_cells(&p, &basis)? {
        if p.formula.eval(&witness) {
            gens.extend(SignSystem::from_signs(p.ambient().clone(), &basis.lines, &signs).closure_generators());
        }
    }
    Ok(separate_generators(&gens, p.ambient()).is_some())
}

pub fn max_rho_halfspace(p: &SphereProblem, w: &QVec) -> Result<u32> {
    Analyzer::new().max_rho_halfspace(p, w)
}

fn goodness_problem(family: &UpdateFamily, w: &[QVec], s: u32) -> Result<SphereProblem> {
    let p = SphereProblem::of_induced(family, w)?;
    let k = p.dim() as u32;
    if s < 1 || s > k {
        return Err(ResistanceError::Precondition(format!("s = {s} outside 1..={k}")));
    }
    check_envelope(&p)?;
    Ok(p)
}

/// Every direction of the open halfspace `<., pole> > 0` in `W^⊥` has induced
/// resistance at most `s - 1`.
pub fn is_semi_good(family: &UpdateFamily, w: &[QVec], s: u32, pole: &QVec) -> Result<bool> {
    let p = goodness_problem(family, w, s)?;
    Ok(max_rho_halfspace(&p, pole)? < s)
}

/// A semi-good pole if `W` is `s`-good, `None` otherwise.
pub fn good_witness(family: &UpdateFamily, w: &[QVec], s: u32) -> Result<Option<QVec>> {
    let p = goodness_problem(family, w, s)?;
    let k = p.dim() as u32;
    let an = Analyzer::new();
    let cells = an.cells(&p)?;
    let solved = an.solve_with(&p, &cells);
    let global = cells.iter().map(|c| c.rho).max().unwrap_or(0);
    if solved.r <= s && global <= s.min(k - 1) {
        Ok(Some(solved.pole))
    } else {
        Ok(None)
    }
}

pub fn is_good(family: &UpdateFamily, w: &[QVec], s: u32) -> Result<bool> {
    Ok(good_witness(family, w, s)?.is_some())
}

/// Searches primitive integer vectors of `W^⊥` with norm at most `radius`,
/// ordered by squared norm and then lexicographically, for a semi-good pole.
pub fn find_easy_direction(family: &UpdateFamily, w: &[QVec], s: u32, radius: &Q) -> Result<Option<IntVec>> {
    let f = induced_family(family, w);
    if triviality(&f) != Triviality::Nontrivial {
        return Err(ResistanceError::Precondition("induced family is trivial".into()));
    }
    let p = goodness_problem(family, w, s)?;
    let an = Analyzer::new();
    let cells = an.cells(&p)?;
    let r = an.solve_with(&p, &cells).r;
    if r > s {
        return Err(ResistanceError::Precondition(format!("resistance {r} exceeds s = {s}")));
    }
    let d = family.dimension();
    let bound = radius.floor().to_integer();
    let bound: i64 = num_traits::ToPrimitive::to_i64(&bound).unwrap_or(i64::MAX).max(0);
    let r_sq = radius * radius;
    let side = 2 * bound + 1;
    let total = (0..d).try_fold(1i64, |acc, _| acc.checked_mul(side)).ok_or_else(|| {
        ResistanceError::Precondition(format!("search radius {radius} too large"))
    })?;
    let mut candidates: Vec<IntVec> = Vec::new();
    for mut idx in 0..total {
        let mut x = vec![0i64; d];
        for c in x.iter_mut() {
            *c = idx % side - bound;
            idx /= side;
        }
        let v = IntVec(x);
        if !v.is_zero()
            && Q::from_integer(v.norm_sq().into()) <= r_sq
            && gcd_all(&v.0) == 1
            && p.ambient().contains(&QVec::from_int_vec(&v))
        {
            candidates.push(v);
        }
    }
    candidates.sort_by(|a, b| a.norm_sq().cmp(&b.norm_sq()).then_with(|| a.cmp(b)));
    for c in candidates {
        if max_rho_on_halfspace(&p, &cells, &QVec::from_int_vec(&c))? < s {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

fn gcd_all(xs: &[i64]) -> i64 {
    xs.iter().fold(0i64, |g, &x| num_integer::gcd(g, x))
}

/// Convenience for property tests: a witness of a sign system over a problem's
/// cell basis.
pub fn cell_witness(p: &SphereProblem, signs: &[i8]) -> Option<QVec> {
    let basis = cell_basis(p);
    sign_witness(&SignSystem::from_signs(p.ambient().clone(), &basis.lines, signs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{duarte, east, r_neighbour};

    fn v(xs: &[i64]) -> QVec {
        QVec::from_ints(xs)
    }

    fn taut(d: usize) -> SphereProblem {
        SphereProblem::new(HemisphereFormula::tautology(QSubspace::full(d))).unwrap()
    }

    #[test]
    fn cell_counts() {
        let p = SphereProblem::of_family(&east(2).unwrap()).unwrap();
        assert_eq!(enumerate_cells(&p).unwrap().len(), 8);
        assert_eq!(enumerate_cells(&taut(1)).unwrap().len(), 2);
        // Three coordinate planes cut S^2 into 8 + 12 + 6 cells.
        assert_eq!(enumerate_cells(&taut(3)).unwrap().len(), 26);
    }

    #[test]
    fn rho_examples() {
        let p = SphereProblem::of_family(&r_neighbour(3, 2).unwrap()).unwrap();
        assert_eq!(rho(&p, &v(&[1, 0, 0])).unwrap(), 1);
        assert_eq!(rho(&taut(2), &v(&[3, -1])).unwrap(), 2);
        let e = SphereProblem::of_family(&east(2).unwrap()).unwrap();
        assert_eq!(rho(&e, &v(&[1, 0])).unwrap(), 0);
    }

    #[test]
    fn resistance_examples() {
        for d in 1..=3 {
            assert_eq!(resistance_of(&taut(d)).unwrap(), d as u32 + 1);
            let empty = SphereProblem::new(HemisphereFormula::empty_set(QSubspace::full(d))).unwrap();
            assert_eq!(resistance_of(&empty).unwrap(), 1);
        }
        assert_eq!(resistance(&r_neighbour(2, 2).unwrap()).unwrap(), 2);
        assert_eq!(resistance(&east(2).unwrap()).unwrap(), 1);
        let pair = UpdateFamily::from_vecs(2, vec![vec![vec![1, 0], vec![-1, 0]]]).unwrap();
        assert_eq!(resistance(&pair).unwrap(), 3);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&r_neighbour(2, 1).unwrap()).unwrap(), Class::Supercritical);
        assert_eq!(classify(&duarte()).unwrap(), Class::Critical(2));
        assert_eq!(classify(&r_neighbour(2, 3).unwrap()).unwrap(), Class::Subcritical);
        assert!(supercritical_by_hemisphere(&east(2).unwrap()).unwrap());
        assert!(!supercritical_by_hemisphere(&duarte()).unwrap());
    }

    #[test]
    fn halfspace_examples() {
        let e = SphereProblem::of_family(&east(2).unwrap()).unwrap();
        assert_eq!(max_rho_halfspace(&e, &v(&[1, 0])).unwrap(), 0);
        assert_eq!(max_rho_halfspace(&e, &v(&[-1, 0])).unwrap(), 2);
        assert_eq!(max_rho_halfspace(&taut(2), &v(&[1, 2])).unwrap(), 2);
    }

    #[test]
    fn goodness_examples() {
        let n22 = r_neighbour(2, 2).unwrap();
        assert!(is_semi_good(&n22, &[], 2, &v(&[1, 0])).unwrap());
        let pair = UpdateFamily::from_vecs(2, vec![vec![vec![1, 0], vec![-1, 0]]]).unwrap();
        assert!(!is_good(&pair, &[], 1).unwrap());
        if let Some(w) = good_witness(&n22, &[], 2).unwrap() {
            assert!(is_semi_good(&n22, &[], 2, &w).unwrap());
        }
    }

    #[test]
    fn easy_direction_examples() {
        let one = Q::from_integer(1.into());
        let x = find_easy_direction(&r_neighbour(2, 2).unwrap(), &[], 2, &one).unwrap().unwrap();
        assert_eq!(x.norm_sq(), 1);
        let x = find_easy_direction(&east(2).unwrap(), &[], 1, &one).unwrap();
        assert_eq!(x, Some(IntVec(vec![1, 0])));
        let pair = UpdateFamily::from_vecs(2, vec![vec![vec![1, 0], vec![-1, 0]]]).unwrap();
        assert!(matches!(
            find_easy_direction(&pair, &[], 2, &one),
            Err(ResistanceError::Precondition(_))
        ));
    }

    #[test]
    fn envelope() {
        let p = taut(5);
        assert_eq!(resistance_of(&p), Err(ResistanceError::Unsupported(5)));
    }
}
