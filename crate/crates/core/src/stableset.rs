//! Stable sets as CNF formulas over closed hemispheres.
//!
//! A [`HemisphereFormula`] over an ambient subspace `V` denotes the set of
//! unit directions `u` of `V` such that every clause has some center `c` with
//! `<c, u> >= 0`. No clauses means the whole sphere; a single empty clause
//! means the empty set.

use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::exactgeom::{QSubspace, QVec};
use crate::family::UpdateFamily;
use crate::induced::{induced_family, InducedFamily};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StableSetError {
    #[error("zero vector where a direction is required")]
    ZeroVector,
    #[error("direction {0} does not lie in the ambient subspace")]
    OutsideAmbient(String),
    #[error("restriction would leave a zero-dimensional ambient space")]
    ZeroAmbient,
    #[error("ambient dimensions differ ({0} vs {1}) and no linear map was supplied")]
    AmbientMismatch(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HemisphereFormula {
    ambient: QSubspace,
    clauses: Vec<Vec<QVec>>,
}

impl HemisphereFormula {
    /// Builds a formula in simplified canonical form.
    pub fn new(ambient: QSubspace, clauses: Vec<Vec<QVec>>) -> Self {
        HemisphereFormula { ambient, clauses }.simplify()
    }

    pub fn tautology(ambient: QSubspace) -> Self {
        HemisphereFormula { ambient, clauses: Vec::new() }
    }

    pub fn empty_set(ambient: QSubspace) -> Self {
        HemisphereFormula { ambient, clauses: vec![Vec::new()] }
    }

    pub fn ambient(&self) -> &QSubspace {
        &self.ambient
    }

    pub fn clauses(&self) -> &[Vec<QVec>] {
        &self.clauses
    }

    /// Syntactically the whole sphere.
    pub fn is_tautology(&self) -> bool {
        self.clauses.is_empty()
    }

    /// Syntactically the empty set.
    pub fn is_empty_set(&self) -> bool {
        self.clauses.iter().any(Vec::is_empty)
    }

    /// All distinct centers (with sign).
    pub fn centers(&self) -> Vec<QVec> {
        let mut cs: Vec<QVec> = self.clauses.iter().flatten().cloned().collect();
        cs.sort();
        cs.dedup();
        cs
    }

    /// Canonical form: primitive centers, sorted and deduplicated clauses;
    /// clauses holding both `c` and `-c` are dropped (always satisfied); an
    /// empty clause collapses the whole formula to the empty set.
    pub fn simplify(self) -> Self {
        let mut clauses: Vec<Vec<QVec>> = Vec::with_capacity(self.clauses.len());
        for clause in self.clauses {
            let mut cl: Vec<QVec> = clause.iter().map(QVec::primitive).collect();
            cl.sort();
            cl.dedup();
            if cl.is_empty() {
                return HemisphereFormula::empty_set(self.ambient);
            }
            let tautological = cl.iter().any(|c| cl.binary_search(&c.neg()).is_ok());
            if !tautological {
                clauses.push(cl);
            }
        }
        clauses.sort();
        clauses.dedup();
        HemisphereFormula { ambient: self.ambient, clauses }
    }

    fn check_direction(&self, u: &QVec) -> Result<(), StableSetError> {
        if u.dim() != self.ambient.ambient_dim() || !self.ambient.contains(u) {
            return Err(StableSetError::OutsideAmbient(u.to_string()));
        }
        if u.is_zero() {
            return Err(StableSetError::ZeroVector);
        }
        Ok(())
    }

    /// Membership of the direction `u`.
    pub fn contains(&self, u: &QVec) -> Result<bool, StableSetError> {
        self.check_direction(u)?;
        Ok(self.eval(u))
    }

    /// Membership without the ambient check.
    pub(crate) fn eval(&self, u: &QVec) -> bool {
        self.clauses
            .iter()
            .all(|clause| clause.iter().any(|c| !c.dot(u).is_negative()))
    }

    /// The formula seen on an infinitesimal sphere around `u`, carried to
    /// the ambient `V ∩ {u}^⊥`.
    ///
    /// Literals positive at `u` satisfy their clause, negative ones drop out,
    /// and centers orthogonal to `u` survive unchanged.
    pub fn restrict_at(&self, u: &QVec) -> Result<HemisphereFormula, StableSetError> {
        self.check_direction(u)?;
        let ambient = self.ambient.intersect_perp(u);
        if ambient.dim() == 0 {
            return Err(StableSetError::ZeroAmbient);
        }
        let mut clauses = Vec::with_capacity(self.clauses.len());
        for clause in &self.clauses {
            let mut kept = Vec::new();
            let mut satisfied = false;
            for c in clause {
                match c.sign_dot(u) {
                    1 => {
                        satisfied = true;
                        break;
                    }
                    0 => kept.push(c.clone()),
                    _ => {}
                }
            }
            if !satisfied {
                clauses.push(kept);
            }
        }
        Ok(HemisphereFormula::new(ambient, clauses))
    }
}

/// The stable set of `U`: one clause per rule, centers the rule elements.
pub fn stable_formula(family: &UpdateFamily) -> HemisphereFormula {
    let d = family.dimension();
    let clauses = family
        .rules()
        .iter()
        .map(|rule| rule.elements().iter().map(QVec::from_int_vec).collect())
        .collect();
    HemisphereFormula::new(QSubspace::full(d), clauses)
}

/// Stable set of an induced family, on the sphere of its ambient `W^⊥`.
pub fn formula_of_induced(f: &InducedFamily) -> HemisphereFormula {
    let clauses = f
        .rules()
        .iter()
        .map(|rule| rule.iter().map(QVec::from_int_vec).collect())
        .collect();
    HemisphereFormula::new(f.ambient().clone(), clauses)
}

/// Stable set of `U[W]` on the sphere of `W^⊥`.
pub fn stable_formula_induced(family: &UpdateFamily, w: &[QVec]) -> HemisphereFormula {
    formula_of_induced(&induced_family(family, w))
}

/// A rational linear map given by its matrix rows (`x -> (row . x)_i`).
#[derive(Clone, Debug)]
pub struct LinearMap {
    pub rows: Vec<QVec>,
}

impl LinearMap {
    pub fn apply(&self, x: &QVec) -> QVec {
        QVec(self.rows.iter().map(|r| r.dot(x)).collect())
    }

    /// The inclusion of `Q^k` into `Q^d` sending `e_i` to `e_i`.
    pub fn pad(k: usize, d: usize) -> LinearMap {
        LinearMap {
            rows: (0..d)
                .map(|i| if i < k { QVec::unit(k, i) } else { QVec::zeros(k) })
                .collect(),
        }
    }
}

/// Whether `contains` agrees on every sample, after carrying samples of `f1`
/// through `map` when the ambients differ.
pub fn equivalent_on_samples(
    f1: &HemisphereFormula,
    f2: &HemisphereFormula,
    samples: &[QVec],
    map: Option<&LinearMap>,
) -> Result<bool, StableSetError> {
    if map.is_none() && f1.ambient().ambient_dim() != f2.ambient().ambient_dim() {
        return Err(StableSetError::AmbientMismatch(
            f1.ambient().ambient_dim(),
            f2.ambient().ambient_dim(),
        ));
    }
    for s in samples {
        let image = match map {
            Some(m) => m.apply(s),
            None => s.clone(),
        };
        if f1.contains(s)? != f2.contains(&image)? {
            return Ok(false);
        }
    }
    Ok(true)
}
