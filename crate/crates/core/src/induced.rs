//! Induced update families `U[W]` and their bookkeeping.

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactgeom::{integer_kernel_basis, QSubspace, QVec};
use crate::family::{IntVec, UpdateFamily};
use crate::stableset::{formula_of_induced, HemisphereFormula, StableSetError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InducedError {
    #[error("direction {0} is not orthogonal to W")]
    NotInComplement(String),
    #[error("direction {0} lies in the span of W")]
    InSpan(String),
    #[error("zero vector where a direction is required")]
    ZeroVector,
    #[error("sample {0} is not in {{u}}^⊥ ∩ W^⊥")]
    BadSample(String),
    #[error(transparent)]
    Formula(#[from] StableSetError),
}

/// `U[W]`: rules `X ∩ W^⊥` for `X ⊂ H(W)`. The empty rule is allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InducedFamily {
    dimension: usize,
    ambient: QSubspace,
    rules: Vec<Vec<IntVec>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Triviality {
    Empty,
    ContainsEmptyRule,
    Nontrivial,
}

impl InducedFamily {
    pub fn new(dimension: usize, ambient: QSubspace, mut rules: Vec<Vec<IntVec>>) -> Self {
        for r in rules.iter_mut() {
            r.sort();
            r.dedup();
        }
        rules.sort();
        rules.dedup();
        InducedFamily { dimension, ambient, rules }
    }

    /// The family itself viewed as induced by `W = {}`.
    pub fn from_family(family: &UpdateFamily) -> Self {
        InducedFamily::new(
            family.dimension(),
            QSubspace::full(family.dimension()),
            family.rules().iter().map(|r| r.elements().to_vec()).collect(),
        )
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn ambient(&self) -> &QSubspace {
        &self.ambient
    }

    pub fn rules(&self) -> &[Vec<IntVec>] {
        &self.rules
    }

    pub fn stable_formula(&self) -> HemisphereFormula {
        formula_of_induced(self)
    }

    /// `F[u]` for this family: rules `X ∩ u^⊥` over `X ⊂ H(u)`, on the
    /// ambient `ambient ∩ u^⊥`.
    pub fn induce(&self, u: &QVec) -> InducedFamily {
        let w = [u.clone()];
        let rules = self
            .rules
            .iter()
            .filter(|x| x.iter().all(|e| in_hw(e, &w)))
            .map(|x| x.iter().filter(|e| QVec::from_int_vec(e).dot(u).is_zero()).cloned().collect())
            .collect();
        InducedFamily::new(self.dimension, self.ambient.intersect_perp(u), rules)
    }
}

/// `x ∈ H(W)`: `<x, u> <= 0` for every `u ∈ W`.
pub fn in_hw(x: &IntVec, w: &[QVec]) -> bool {
    let xq = QVec::from_int_vec(x);
    w.iter().all(|u| !xq.dot(u).is_positive())
}

pub fn induced_family(family: &UpdateFamily, w: &[QVec]) -> InducedFamily {
    let d = family.dimension();
    let ambient = QSubspace::perp(w, d);
    let rules = family
        .rules()
        .iter()
        .filter(|rule| rule.elements().iter().all(|x| in_hw(x, w)))
        .map(|rule| {
            rule.elements()
                .iter()
                .filter(|x| {
                    let xq = QVec::from_int_vec(x);
                    w.iter().all(|u| xq.dot(u).is_zero())
                })
                .cloned()
                .collect()
        })
        .collect();
    InducedFamily::new(d, ambient, rules)
}

pub fn triviality(f: &InducedFamily) -> Triviality {
    if f.rules().is_empty() {
        Triviality::Empty
    } else if f.rules().iter().any(Vec::is_empty) {
        Triviality::ContainsEmptyRule
    } else {
        Triviality::Nontrivial
    }
}

/// Span of all rule elements.
pub fn span_of_rules<'a>(d: usize, rules: impl IntoIterator<Item = &'a [IntVec]>) -> QSubspace {
    let vs: Vec<QVec> = rules.into_iter().flatten().map(QVec::from_int_vec).collect();
    QSubspace::span(&vs, d)
}

pub fn span_of(f: &InducedFamily) -> QSubspace {
    span_of_rules(f.dimension(), f.rules().iter().map(Vec::as_slice))
}

pub fn span_of_family(u: &UpdateFamily) -> QSubspace {
    span_of_rules(u.dimension(), u.rules().iter().map(|r| r.elements()))
}

/// Lattice basis of `L(W) = W^⊥ ∩ Z^d`.
pub fn lattice_basis(w: &[QVec], d: usize) -> Vec<IntVec> {
    integer_kernel_basis(w, d)
}

/// Checks, on each sample `v ∈ {u}^⊥ ∩ W^⊥`, that the `U[W]` stable set
/// restricted at `u` agrees with the stable set of `U[W][u]`.
pub fn check_projection_equivalence(
    family: &UpdateFamily,
    w: &[QVec],
    u: &QVec,
    samples: &[QVec],
) -> Result<bool, InducedError> {
    if u.is_zero() {
        return Err(InducedError::ZeroVector);
    }
    let f = induced_family(family, w);
    if !f.ambient().contains(u) {
        return Err(InducedError::NotInComplement(u.to_string()));
    }
    if QSubspace::span(w, family.dimension()).contains(u) {
        return Err(InducedError::InSpan(u.to_string()));
    }
    let restricted = f.stable_formula().restrict_at(u)?;
    let fu = f.induce(u).stable_formula();
    debug_assert_eq!(restricted.ambient(), fu.ambient());
    for v in samples {
        if v.is_zero() || !fu.ambient().contains(v) {
            return Err(InducedError::BadSample(v.to_string()));
        }
        if restricted.contains(v)? != fu.contains(v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `(U[W])[u] = U[W ∪ {u}]` holds for this instance.
pub fn commutes(family: &UpdateFamily, w: &[QVec], u: &QVec) -> bool {
    let mut w2 = w.to_vec();
    w2.push(u.clone());
    let lhs = induced_family(family, w).induce(u);
    let rhs = induced_family(family, &w2);
    lhs.rules() == rhs.rules()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{east, r_neighbour};

    fn v(xs: &[i64]) -> QVec {
        QVec::from_ints(xs)
    }

    fn iv(xs: &[i64]) -> IntVec {
        IntVec(xs.to_vec())
    }

    #[test]
    fn hw_examples() {
        let w = [v(&[1, 0])];
        assert!(in_hw(&iv(&[-1, 0]), &w));
        assert!(!in_hw(&iv(&[1, 0]), &w));
        assert!(in_hw(&iv(&[0, 5]), &w));
    }

    #[test]
    fn induced_examples() {
        let u = r_neighbour(2, 2).unwrap();
        let f = induced_family(&u, &[v(&[1, 0])]);
        assert_eq!(
            f.rules(),
            &[vec![iv(&[0, -1])], vec![iv(&[0, -1]), iv(&[0, 1])], vec![iv(&[0, 1])]]
        );
        assert_eq!(f.ambient().basis(), &[v(&[0, 1])]);
        assert_eq!(triviality(&f), Triviality::Nontrivial);

        let same = induced_family(&u, &[]);
        assert_eq!(same, InducedFamily::from_family(&u));
    }

    #[test]
    fn triviality_cases() {
        let amb = QSubspace::full(2);
        assert_eq!(triviality(&InducedFamily::new(2, amb.clone(), vec![])), Triviality::Empty);
        assert_eq!(
            triviality(&InducedFamily::new(2, amb, vec![vec![], vec![iv(&[1, 0])]])),
            Triviality::ContainsEmptyRule
        );
        // East at W = {e_1}: {-e_1} lies in H(e_1) and meets e_1^⊥ in nothing.
        let f = induced_family(&east(2).unwrap(), &[v(&[1, 0])]);
        assert_eq!(triviality(&f), Triviality::ContainsEmptyRule);
        assert!(f.stable_formula().is_empty_set());
    }

    #[test]
    fn spans() {
        assert_eq!(span_of_family(&r_neighbour(2, 2).unwrap()), QSubspace::full(2));
        let g = UpdateFamily::from_vecs(2, vec![vec![vec![2, 0]], vec![vec![4, 0]]]).unwrap();
        assert_eq!(span_of_family(&g).basis(), &[v(&[1, 0])]);
    }

    #[test]
    fn projection_equivalence_examples() {
        let n23 = r_neighbour(3, 2).unwrap();
        let samples: Vec<QVec> = (-3..=3)
            .flat_map(|a| (-3..=3).map(move |b| v(&[a, b, 0])))
            .filter(|s| !s.is_zero())
            .collect();
        assert!(check_projection_equivalence(&n23, &[], &v(&[0, 0, 1]), &samples).unwrap());

        let e = east(2).unwrap();
        assert!(
            check_projection_equivalence(&e, &[], &v(&[0, 1]), &[v(&[1, 0]), v(&[-1, 0])]).unwrap()
        );
        assert!(matches!(
            check_projection_equivalence(&e, &[v(&[1, 0])], &v(&[2, 0]), &[]),
            Err(InducedError::NotInComplement(_)) | Err(InducedError::InSpan(_))
        ));
    }
}
