//! Exact rational geometry: vectors, subspaces, sign systems, linear
//! feasibility and polyhedral cones.
//!
//! Nothing in here touches floating point. Directions are rays through
//! rational points; wherever a canonical key is needed they are rescaled to
//! primitive integer vectors.

pub mod cone;
pub mod lattice;
pub mod linalg;
pub mod lp;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::family::IntVec;

pub use cone::{double_description, ConeGenerators};
pub use lattice::integer_kernel_basis;
pub use lp::{Constraint, Relation};

pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("input vectors are linearly dependent")]
    DependentInput,
    #[error("zero vector where a direction is required")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector does not lie in the ambient subspace")]
    OutsideAmbient,
    #[error("cone {0} is empty")]
    EmptyCone(usize),
    #[error("ambient dimension {0} exceeds the supported envelope (at most 4)")]
    Unsupported(usize),
}

/// An exact rational vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QVec(pub Vec<Q>);

impl QVec {
    pub fn zeros(d: usize) -> Self {
        QVec(vec![Q::zero(); d])
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        QVec(xs.iter().map(|&x| Q::from_integer(BigInt::from(x))).collect())
    }

    pub fn from_int_vec(v: &IntVec) -> Self {
        QVec::from_ints(v.coords())
    }

    pub fn unit(d: usize, i: usize) -> Self {
        let mut v = QVec::zeros(d);
        v.0[i] = Q::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &QVec) -> Q {
        linalg::dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> Q {
        self.dot(self)
    }

    pub fn add(&self, other: &QVec) -> QVec {
        QVec(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &QVec) -> QVec {
        QVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &Q) -> QVec {
        QVec(self.0.iter().map(|a| a * k).collect())
    }

    pub fn neg(&self) -> QVec {
        QVec(self.0.iter().map(|a| -a).collect())
    }

    /// Positive multiple that is a primitive integer vector.
    pub fn primitive(&self) -> QVec {
        QVec(linalg::primitive(&self.0))
    }

    /// Canonical key of the line through this vector (sign forgotten).
    pub fn canonical_line(&self) -> QVec {
        QVec(linalg::canonical_line(&self.0))
    }

    /// Exact integer coordinates if every entry is an integer that fits `i64`.
    pub fn to_int_vec(&self) -> Option<IntVec> {
        self.0
            .iter()
            .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
            .collect::<Option<Vec<_>>>()
            .map(IntVec)
    }

    /// Sign of `<self, other>` as -1, 0 or 1.
    pub fn sign_dot(&self, other: &QVec) -> i8 {
        sign_of(&self.dot(other))
    }
}

pub fn sign_of(x: &Q) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

impl fmt::Display for QVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Integers serialize as JSON numbers, other rationals as `"p/q"` strings.
impl Serialize for QVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let vals: Vec<serde_json::Value> = self
            .0
            .iter()
            .map(|x| match x.to_integer().to_i64() {
                Some(i) if x.is_integer() => serde_json::Value::from(i),
                _ => serde_json::Value::from(x.to_string()),
            })
            .collect();
        vals.serialize(s)
    }
}

/// Parses a rational from `"p/q"`, an integer or a finite decimal.
pub fn parse_rational(text: &str) -> Option<Q> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Q::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            s => s.parse().ok()?,
        };
        if !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let frac_part: BigInt = if frac.is_empty() { BigInt::zero() } else { frac.parse().ok()? };
        let mag = Q::new(int_part * &scale + frac_part, scale);
        return Some(if neg { -mag } else { mag });
    }
    t.parse::<BigInt>().ok().map(Q::from_integer)
}

/// A rational linear subspace of `Q^d`, stored by its canonical basis (rows
/// of the reduced echelon form, each rescaled to a primitive integer vector).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QSubspace {
    ambient_dim: usize,
    basis: Vec<QVec>,
}

impl QSubspace {
    pub fn full(d: usize) -> Self {
        QSubspace {
            ambient_dim: d,
            basis: (0..d).map(|i| QVec::unit(d, i)).collect(),
        }
    }

    pub fn zero(d: usize) -> Self {
        QSubspace { ambient_dim: d, basis: Vec::new() }
    }

    /// The span of `vectors`.
    pub fn span(vectors: &[QVec], d: usize) -> Self {
        let (rows, _) = linalg::rref(&linalg::to_rows(vectors), d);
        QSubspace {
            ambient_dim: d,
            basis: rows.iter().map(|r| QVec(linalg::primitive(r))).collect(),
        }
    }

    /// `{x : <x, w> = 0 for all w in vectors}`.
    pub fn perp(vectors: &[QVec], d: usize) -> Self {
        let k = linalg::kernel(&linalg::to_rows(vectors), d);
        QSubspace::span(&k.into_iter().map(QVec).collect::<Vec<_>>(), d)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[QVec] {
        &self.basis
    }

    pub fn complement(&self) -> QSubspace {
        QSubspace::perp(&self.basis, self.ambient_dim)
    }

    /// `self ∩ {x}^⊥`.
    pub fn intersect_perp(&self, x: &QVec) -> QSubspace {
        let mut normals = self.complement().basis;
        normals.push(x.clone());
        QSubspace::perp(&normals, self.ambient_dim)
    }

    pub fn contains(&self, v: &QVec) -> bool {
        v.dim() == self.ambient_dim
            && self.complement().basis.iter().all(|n| n.dot(v).is_zero())
    }

    pub fn contains_subspace(&self, other: &QSubspace) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    /// Coordinates of `v` with respect to the stored basis.
    pub fn coordinates(&self, v: &QVec) -> Option<Vec<Q>> {
        linalg::solve_in_span(&linalg::to_rows(&self.basis), &v.0)
    }

    /// The vector with the given basis coordinates.
    pub fn from_coordinates(&self, y: &[Q]) -> QVec {
        let mut x = QVec::zeros(self.ambient_dim);
        for (yi, b) in y.iter().zip(&self.basis) {
            if !yi.is_zero() {
                x = x.add(&b.scale(yi));
            }
        }
        x
    }

    /// The functional `y -> <c, sum y_i b_i>` as a coefficient row.
    pub fn row_of(&self, c: &QVec) -> Vec<Q> {
        self.basis.iter().map(|b| c.dot(b)).collect()
    }
}

impl Serialize for QSubspace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.basis.serialize(s)
    }
}

/// Extends linearly independent `vectors` to a rational basis of `Q^d`; the
/// appended vectors are orthogonal to the input and to each other.
pub fn gram_schmidt_complete(vectors: &[QVec], d: usize) -> Result<Vec<QVec>, GeomError> {
    for v in vectors {
        if v.dim() != d {
            return Err(GeomError::DimensionMismatch { expected: d, found: v.dim() });
        }
    }
    if linalg::rank(&linalg::to_rows(vectors), d) < vectors.len() {
        return Err(GeomError::DependentInput);
    }
    let mut ortho = orthogonalize(vectors);
    let mut out: Vec<QVec> = vectors.to_vec();
    for i in 0..d {
        if out.len() == d {
            break;
        }
        let r = residual(&QVec::unit(d, i), &ortho);
        if !r.is_zero() {
            let r = r.primitive();
            ortho.push(r.clone());
            out.push(r);
        }
    }
    Ok(out)
}

/// Rational Gram–Schmidt without normalization; dependent vectors vanish.
fn orthogonalize(vectors: &[QVec]) -> Vec<QVec> {
    let mut ortho: Vec<QVec> = Vec::new();
    for v in vectors {
        let r = residual(v, &ortho);
        if !r.is_zero() {
            ortho.push(r);
        }
    }
    ortho
}

/// `v` minus its orthogonal projection onto the span of pairwise orthogonal
/// `ortho`.
fn residual(v: &QVec, ortho: &[QVec]) -> QVec {
    let mut r = v.clone();
    for o in ortho {
        let c = r.dot(o) / o.norm_sq();
        if !c.is_zero() {
            r = r.sub(&o.scale(&c));
        }
    }
    r
}

/// Rational basis of `W^⊥`.
pub fn rational_complement(w: &[QVec], d: usize) -> QSubspace {
    QSubspace::perp(w, d)
}

/// A positive multiple of the projection of `u` onto `W^⊥`, or `None` when
/// `u` lies in the span of `W`.
pub fn project_ray(u: &QVec, w: &[QVec]) -> Result<Option<QVec>, GeomError> {
    if u.is_zero() {
        return Err(GeomError::ZeroVector);
    }
    let r = residual(u, &orthogonalize(w));
    Ok(if r.is_zero() { None } else { Some(r.primitive()) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn as_q(self) -> Q {
        match self {
            Sign::Pos => Q::one(),
            Sign::Neg => -Q::one(),
        }
    }
}

/// Sign conditions `sgn<c, x>` on points `x` of an ambient subspace.
#[derive(Clone, Debug)]
pub struct SignSystem {
    pub strict: Vec<(QVec, Sign)>,
    pub zero: Vec<QVec>,
    pub ambient: QSubspace,
}

impl SignSystem {
    pub fn new(ambient: QSubspace) -> Self {
        SignSystem { strict: Vec::new(), zero: Vec::new(), ambient }
    }

    /// Builds the system from a sign vector over `centers`.
    pub fn from_signs(ambient: QSubspace, centers: &[QVec], signs: &[i8]) -> Self {
        let mut sys = SignSystem::new(ambient);
        for (c, &s) in centers.iter().zip(signs) {
            match s {
                0 => sys.zero.push(c.clone()),
                s if s > 0 => sys.strict.push((c.clone(), Sign::Pos)),
                _ => sys.strict.push((c.clone(), Sign::Neg)),
            }
        }
        sys
    }

    /// True iff the nonzero point `x` of the ambient realizes every sign.
    pub fn satisfied_by(&self, x: &QVec) -> bool {
        !x.is_zero()
            && self.ambient.contains(x)
            && self.strict.iter().all(|(c, s)| match s {
                Sign::Pos => c.sign_dot(x) > 0,
                Sign::Neg => c.sign_dot(x) < 0,
            })
            && self.zero.iter().all(|c| c.dot(x).is_zero())
    }

    fn strict_rows(&self) -> Vec<Vec<Q>> {
        self.strict
            .iter()
            .map(|(c, s)| {
                let sg = s.as_q();
                self.ambient.row_of(c).into_iter().map(|a| a * &sg).collect()
            })
            .collect()
    }

    fn zero_rows(&self) -> Vec<Vec<Q>> {
        self.zero.iter().map(|c| self.ambient.row_of(c)).collect()
    }

    /// Generators of the closed cone obtained by relaxing strict signs.
    /// Lineality directions are returned with both signs.
    pub fn closure_generators(&self) -> Vec<QVec> {
        let m = self.ambient.dim();
        let mut ineqs = self.strict_rows();
        for z in self.zero_rows() {
            ineqs.push(z.iter().map(|a| -a).collect());
            ineqs.push(z);
        }
        let gens = double_description(m, &ineqs);
        let mut out = Vec::new();
        for l in &gens.lineality {
            let x = self.ambient.from_coordinates(l).primitive();
            out.push(x.neg());
            out.push(x);
        }
        for r in &gens.rays {
            out.push(self.ambient.from_coordinates(r).primitive());
        }
        out
    }
}

/// A nonzero rational point of the ambient realizing every sign condition,
/// or `None` if the system is infeasible.
pub fn sign_witness(sys: &SignSystem) -> Option<QVec> {
    let y = sign_witness_coords(sys.ambient.dim(), &sys.strict_rows(), &sys.zero_rows())?;
    let x = sys.ambient.from_coordinates(&y).primitive();
    debug_assert!(sys.satisfied_by(&x));
    Some(x)
}

/// Coordinate form of [`sign_witness`]: a nonzero `y` in `Q^m` with
/// `a . y > 0` for every row of `positive` and `a . y = 0` for every row of
/// `zero`.
pub fn sign_witness_coords(m: usize, positive: &[Vec<Q>], zero: &[Vec<Q>]) -> Option<Vec<Q>> {
    if m == 0 {
        return None;
    }
    if positive.is_empty() {
        return linalg::kernel(zero, m).into_iter().next();
    }
    // Homogeneous strict system: scale so every strict row is >= 1.
    let mut cons: Vec<Constraint> = positive
        .iter()
        .map(|row| Constraint::new(row.clone(), Relation::Ge, Q::one()))
        .collect();
    cons.extend(zero.iter().map(|row| Constraint::new(row.clone(), Relation::Eq, Q::zero())));
    lp::feasible_point(m, &cons)
}

/// Finds a nonzero `w` in `ambient` with `<x, w> <= 0` for every point `x` of
/// every closed cone, i.e. the pole of an open hemisphere missing all cones.
///
/// Each cone is the closure of the sign system's solution set. Generators are
/// computed by double description, then the polar cone of all generators is
/// enumerated the same way; any nonzero polar generator is a valid answer.
pub fn cone_separating_direction(
    cones: &[SignSystem],
    ambient: &QSubspace,
) -> Result<Option<QVec>, GeomError> {
    let mut gens = Vec::new();
    for (i, cone) in cones.iter().enumerate() {
        if sign_witness(cone).is_none() {
            return Err(GeomError::EmptyCone(i));
        }
        gens.extend(cone.closure_generators());
    }
    Ok(separate_generators(&gens, ambient))
}

/// Polar step of [`cone_separating_direction`] on explicit generators.
pub fn separate_generators(generators: &[QVec], ambient: &QSubspace) -> Option<QVec> {
    let m = ambient.dim();
    if m == 0 {
        return None;
    }
    let mut gens: Vec<QVec> = generators.iter().map(QVec::primitive).filter(|g| !g.is_zero()).collect();
    gens.sort();
    gens.dedup();
    let rows: Vec<Vec<Q>> = gens
        .iter()
        .map(|g| ambient.row_of(g).into_iter().map(|a| -a).collect())
        .collect();
    let polar = double_description(m, &rows);
    let mut candidates: Vec<QVec> = Vec::new();
    for l in &polar.lineality {
        let w = ambient.from_coordinates(l).primitive();
        candidates.push(w.neg());
        candidates.push(w);
    }
    for r in &polar.rays {
        candidates.push(ambient.from_coordinates(r).primitive());
    }
    candidates.retain(|w| !w.is_zero());
    candidates.into_iter().min_by(|a, b| a.norm_sq().cmp(&b.norm_sq()).then_with(|| a.cmp(b)))
}

/// Whether every point of the closed cone generated by `generators` is
/// nonpositive against `w`.
pub fn separates(generators: &[QVec], w: &QVec) -> bool {
    generators.iter().all(|g| !g.dot(w).is_positive())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> QVec {
        QVec::from_ints(xs)
    }

    #[test]
    fn gram_schmidt_examples() {
        let out = gram_schmidt_complete(&[v(&[1, 1, 0])], 3).unwrap();
        assert_eq!(out.len(), 3);
        for i in 0..3 {
            for j in 0..i {
                assert!(out[i].dot(&out[j]).is_zero(), "{} {}", out[i], out[j]);
            }
        }
        let out = gram_schmidt_complete(&[v(&[1, 0, 0]), v(&[0, 1, 0])], 3).unwrap();
        assert_eq!(out[2], v(&[0, 0, 1]));
        let out = gram_schmidt_complete(&[], 2).unwrap();
        assert_eq!(out, vec![v(&[1, 0]), v(&[0, 1])]);
        assert_eq!(
            gram_schmidt_complete(&[v(&[1, 2]), v(&[2, 4])], 2),
            Err(GeomError::DependentInput)
        );
    }

    #[test]
    fn complement_examples() {
        let c = rational_complement(&[v(&[1, 1])], 2);
        assert_eq!(c.basis(), &[v(&[1, -1])]);
        assert_eq!(rational_complement(&[], 2), QSubspace::full(2));
    }

    #[test]
    fn project_examples() {
        let p = project_ray(&v(&[1, 1]), &[v(&[1, 0])]).unwrap().unwrap();
        assert_eq!(p, v(&[0, 1]));
        assert_eq!(project_ray(&v(&[3, 0]), &[v(&[1, 0])]).unwrap(), None);
        assert_eq!(project_ray(&v(&[0, 0]), &[]), Err(GeomError::ZeroVector));
    }

    #[test]
    fn sign_witness_examples() {
        let mut sys = SignSystem::new(QSubspace::full(2));
        sys.strict.push((v(&[1, 0]), Sign::Pos));
        sys.zero.push(v(&[0, 1]));
        assert_eq!(sign_witness(&sys), Some(v(&[1, 0])));

        let mut bad = SignSystem::new(QSubspace::full(2));
        bad.strict.push((v(&[1, 0]), Sign::Pos));
        bad.strict.push((v(&[1, 0]), Sign::Neg));
        assert_eq!(sign_witness(&bad), None);

        let mut all_zero = SignSystem::new(QSubspace::full(2));
        all_zero.zero.push(v(&[1, 0]));
        all_zero.zero.push(v(&[0, 1]));
        assert_eq!(sign_witness(&all_zero), None);
    }

    fn ray(x: &[i64]) -> SignSystem {
        // The open ray through x in R^2.
        let d = x.len();
        let xv = v(x);
        let mut sys = SignSystem::new(QSubspace::full(d));
        sys.strict.push((xv.clone(), Sign::Pos));
        for n in QSubspace::perp(&[xv], d).basis() {
            sys.zero.push(n.clone());
        }
        sys
    }

    #[test]
    fn separation_examples() {
        let amb = QSubspace::full(2);
        let w = cone_separating_direction(&[ray(&[1, 0])], &amb).unwrap().unwrap();
        assert!(!w.dot(&v(&[1, 0])).is_positive());

        let w = cone_separating_direction(&[ray(&[1, 0]), ray(&[-1, 0])], &amb)
            .unwrap()
            .unwrap();
        assert!(w == v(&[0, 1]) || w == v(&[0, -1]));

        let quadrants: Vec<SignSystem> = [[1, 1], [1, -1], [-1, 1], [-1, -1]]
            .iter()
            .map(|s| {
                let mut sys = SignSystem::new(amb.clone());
                sys.strict.push((v(&[1, 0]), if s[0] > 0 { Sign::Pos } else { Sign::Neg }));
                sys.strict.push((v(&[0, 1]), if s[1] > 0 { Sign::Pos } else { Sign::Neg }));
                sys
            })
            .collect();
        assert_eq!(cone_separating_direction(&quadrants, &amb).unwrap(), None);

        let mut empty = SignSystem::new(amb.clone());
        empty.strict.push((v(&[1, 0]), Sign::Pos));
        empty.strict.push((v(&[-1, 0]), Sign::Pos));
        assert_eq!(
            cone_separating_direction(&[empty], &amb),
            Err(GeomError::EmptyCone(0))
        );
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("1/10"), Some(Q::new(1.into(), 10.into())));
        assert_eq!(parse_rational("0.25"), Some(Q::new(1.into(), 4.into())));
        assert_eq!(parse_rational("-.5"), Some(Q::new((-1).into(), 2.into())));
        assert_eq!(parse_rational("3"), Some(Q::from_integer(3.into())));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
    }
}
