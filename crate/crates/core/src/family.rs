//! Update families: the rule sets driving U-bootstrap percolation.
//!
//! A family is stored in canonical form: every rule is a sorted,
//! deduplicated list of nonzero integer vectors, and the rule list itself is
//! sorted and deduplicated. Two families with the same rules in any order
//! therefore compare equal, which downstream memo tables rely on.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An integer lattice vector.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntVec(pub Vec<i64>);

impl IntVec {
    pub fn new(coords: Vec<i64>) -> Self {
        IntVec(coords)
    }

    /// The `i`-th standard basis vector of `Z^d`, times `sign`.
    pub fn unit(d: usize, i: usize, sign: i64) -> Self {
        let mut v = vec![0; d];
        v[i] = sign;
        IntVec(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn scaled(&self, k: i64) -> IntVec {
        IntVec(self.0.iter().map(|c| c * k).collect())
    }

    pub fn dot(&self, other: &IntVec) -> i64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for IntVec {
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

/// A single update rule: a non-empty set of nonzero offsets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule(Vec<IntVec>);

impl Rule {
    /// Builds a rule, sorting and deduplicating its elements.
    pub fn new(mut elements: Vec<IntVec>) -> Result<Self, FamilyError> {
        if elements.is_empty() {
            return Err(FamilyError::EmptyRule);
        }
        if elements.iter().any(IntVec::is_zero) {
            return Err(FamilyError::ZeroVector);
        }
        elements.sort();
        elements.dedup();
        Ok(Rule(elements))
    }

    pub fn elements(&self) -> &[IntVec] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("malformed family JSON: {0}")]
    Json(String),
    #[error("zero vector in rule")]
    ZeroVector,
    #[error("empty rule")]
    EmptyRule,
    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("family has no rules")]
    NoRules,
    #[error("dimension must be positive")]
    ZeroDimension,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unknown family {name:?}; known: {known}")]
    UnknownZoo { name: String, known: String },
}

/// A `d`-dimensional update family in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UpdateFamily {
    dimension: usize,
    rules: Vec<Rule>,
}

impl UpdateFamily {
    pub fn new(dimension: usize, mut rules: Vec<Rule>) -> Result<Self, FamilyError> {
        if dimension == 0 {
            return Err(FamilyError::ZeroDimension);
        }
        if rules.is_empty() {
            return Err(FamilyError::NoRules);
        }
        for rule in &rules {
            for x in rule.elements() {
                if x.dim() != dimension {
                    return Err(FamilyError::DimensionMismatch {
                        expected: dimension,
                        found: x.dim(),
                    });
                }
            }
        }
        rules.sort();
        rules.dedup();
        Ok(UpdateFamily { dimension, rules })
    }

    /// Convenience constructor from raw coordinate lists.
    pub fn from_vecs(dimension: usize, rules: Vec<Vec<Vec<i64>>>) -> Result<Self, FamilyError> {
        let rules = rules
            .into_iter()
            .map(|r| Rule::new(r.into_iter().map(IntVec).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        UpdateFamily::new(dimension, rules)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// All distinct rule elements.
    pub fn elements(&self) -> Vec<IntVec> {
        let mut all: Vec<IntVec> = self
            .rules
            .iter()
            .flat_map(|r| r.elements().iter().cloned())
            .collect();
        all.sort();
        all.dedup();
        all
    }

    /// Squared radius `R_0^2 = max |x|^2` over rule elements.
    ///
    /// Kept squared so that it stays an exact (integer) value.
    pub fn radius_sq(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.radius_sq_int()))
    }

    pub fn radius_sq_int(&self) -> i64 {
        self.rules
            .iter()
            .flat_map(|r| r.elements())
            .map(IntVec::norm_sq)
            .max()
            .unwrap_or(0)
    }

    /// Smallest integer at least the radius.
    pub fn radius_ceil(&self) -> i64 {
        let r2 = self.radius_sq_int();
        let mut r = (r2 as f64).sqrt() as i64;
        while r * r < r2 {
            r += 1;
        }
        while r > 0 && (r - 1) * (r - 1) >= r2 {
            r -= 1;
        }
        r
    }

    /// Adds a rule, keeping canonical form.
    pub fn with_rule(&self, rule: Rule) -> Result<Self, FamilyError> {
        let mut rules = self.rules.clone();
        rules.push(rule);
        UpdateFamily::new(self.dimension, rules)
    }
}

impl fmt::Display for UpdateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serialize_family(self))
    }
}

/// The `r`-neighbour family `N_r^d`: every `r`-subset of the `2d` unit vectors.
pub fn r_neighbour(d: usize, r: usize) -> Result<UpdateFamily, FamilyError> {
    if d == 0 {
        return Err(FamilyError::ZeroDimension);
    }
    if r == 0 || r > 2 * d {
        return Err(FamilyError::Parameter(format!(
            "r must lie in 1..={} for d = {d}, got {r}",
            2 * d
        )));
    }
    let neighbours: Vec<IntVec> = (0..d)
        .flat_map(|i| [IntVec::unit(d, i, -1), IntVec::unit(d, i, 1)])
        .collect();
    let mut rules = Vec::new();
    let mut chosen = Vec::with_capacity(r);
    subsets(&neighbours, r, 0, &mut chosen, &mut rules);
    UpdateFamily::new(d, rules)
}

fn subsets(
    pool: &[IntVec],
    r: usize,
    start: usize,
    chosen: &mut Vec<IntVec>,
    out: &mut Vec<Rule>,
) {
    if chosen.len() == r {
        out.push(Rule::new(chosen.clone()).expect("unit vectors are nonzero"));
        return;
    }
    for i in start..pool.len() {
        chosen.push(pool[i].clone());
        subsets(pool, r, i + 1, chosen, out);
        chosen.pop();
    }
}

/// Replaces every element `x` of every rule by `{x, 2x, ..., kx}`.
pub fn stretch(family: &UpdateFamily, k: i64) -> Result<UpdateFamily, FamilyError> {
    if k < 1 {
        return Err(FamilyError::Parameter(format!("stretch factor must be >= 1, got {k}")));
    }
    let rules = family
        .rules()
        .iter()
        .map(|rule| {
            let elements = rule
                .elements()
                .iter()
                .flat_map(|x| (1..=k).map(move |j| x.scaled(j)))
                .collect();
            Rule::new(elements)
        })
        .collect::<Result<Vec<_>, _>>()?;
    UpdateFamily::new(family.dimension(), rules)
}

/// `{{-e_1}}` in dimension `d`: the East model.
pub fn east(d: usize) -> Result<UpdateFamily, FamilyError> {
    if d == 0 {
        return Err(FamilyError::ZeroDimension);
    }
    UpdateFamily::new(d, vec![Rule::new(vec![IntVec::unit(d, 0, -1)])?])
}

/// The two-dimensional Duarte model `{{-e_1,e_2},{-e_1,-e_2},{e_2,-e_2}}`.
pub fn duarte() -> UpdateFamily {
    UpdateFamily::from_vecs(
        2,
        vec![
            vec![vec![-1, 0], vec![0, 1]],
            vec![vec![-1, 0], vec![0, -1]],
            vec![vec![0, 1], vec![0, -1]],
        ],
    )
    .expect("duarte is well formed")
}

/// The single-rule family `{{e_1,-e_1}}` in dimension `d`.
pub fn pair_rule(d: usize) -> Result<UpdateFamily, FamilyError> {
    if d == 0 {
        return Err(FamilyError::ZeroDimension);
    }
    UpdateFamily::new(
        d,
        vec![Rule::new(vec![IntVec::unit(d, 0, 1), IntVec::unit(d, 0, -1)])?],
    )
}

pub const ZOO_NAMES: &str = "n-neighbour:<d>:<r>, east:<d>, duarte, pair:<d>";

/// Looks up a built-in family by name.
///
/// Accepted names: `n-neighbour:d:r`, `east:d`, `duarte`, `pair:d`.
pub fn zoo(name: &str) -> Result<UpdateFamily, FamilyError> {
    let unknown = || FamilyError::UnknownZoo {
        name: name.to_string(),
        known: ZOO_NAMES.to_string(),
    };
    let parts: Vec<&str> = name.split(':').collect();
    let num = |s: &str| s.parse::<usize>().map_err(|_| unknown());
    match parts.as_slice() {
        ["n-neighbour", d, r] | ["n-neighbor", d, r] => r_neighbour(num(d)?, num(r)?),
        ["east", d] => east(num(d)?),
        ["east"] => east(2),
        ["duarte"] => Ok(duarte()),
        ["pair", d] => pair_rule(num(d)?),
        ["pair"] => pair_rule(2),
        _ => Err(unknown()),
    }
}

/// The named families used throughout the tests: together they cover all
/// three universality classes.
pub fn zoo_catalogue() -> Vec<(String, UpdateFamily)> {
    let mut out = Vec::new();
    for d in 1..=3 {
        for r in 1..=d + 1 {
            out.push((format!("n-neighbour:{d}:{r}"), r_neighbour(d, r).unwrap()));
        }
    }
    out.push(("east:2".into(), east(2).unwrap()));
    out.push(("east:3".into(), east(3).unwrap()));
    out.push(("duarte".into(), duarte()));
    out.push(("pair:2".into(), pair_rule(2).unwrap()));
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    dimension: usize,
    rules: Vec<Vec<Vec<i64>>>,
}

/// Parses the JSON family format `{"dimension": d, "rules": [[[..],..],..]}`.
pub fn parse_family(text: &str) -> Result<UpdateFamily, FamilyError> {
    let file: FamilyFile =
        serde_json::from_str(text).map_err(|e| FamilyError::Json(e.to_string()))?;
    if file.dimension == 0 {
        return Err(FamilyError::ZeroDimension);
    }
    for rule in &file.rules {
        if rule.is_empty() {
            return Err(FamilyError::EmptyRule);
        }
        for x in rule {
            if x.len() != file.dimension {
                return Err(FamilyError::DimensionMismatch {
                    expected: file.dimension,
                    found: x.len(),
                });
            }
            if x.iter().all(|&c| c == 0) {
                return Err(FamilyError::ZeroVector);
            }
        }
    }
    UpdateFamily::from_vecs(file.dimension, file.rules)
}

/// Serializes to the canonical single-line JSON form.
pub fn serialize_family(family: &UpdateFamily) -> String {
    let file = FamilyFile {
        dimension: family.dimension,
        rules: family
            .rules
            .iter()
            .map(|r| r.elements().iter().map(|x| x.0.clone()).collect())
            .collect(),
    };
    serde_json::to_string(&file).expect("family serializes")
}
