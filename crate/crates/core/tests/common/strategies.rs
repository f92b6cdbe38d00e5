//! Proptest strategies for families, vectors and site sets.

use bootlab::family::UpdateFamily;
use proptest::prelude::*;

/// A nonzero vector of `[-range, range]^d`.
pub fn nonzero_vec(d: usize, range: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-range..=range, d).prop_filter("nonzero", |v| v.iter().any(|&x| x != 0))
}

/// Families of dimension `d` with up to `max_rules` rules of 1 to 3 elements.
pub fn family(d: usize, max_rules: usize, range: i64) -> impl Strategy<Value = UpdateFamily> {
    prop::collection::vec(prop::collection::vec(nonzero_vec(d, range), 1..=3), 1..=max_rules)
        .prop_map(move |rules| UpdateFamily::from_vecs(d, rules).unwrap())
}

/// A family of dimension 1, 2 or 3.
pub fn any_family(max_rules: usize, range: i64) -> impl Strategy<Value = UpdateFamily> {
    (1usize..=3).prop_flat_map(move |d| family(d, max_rules, range))
}

/// A family of dimension 2 or 3 together with a nonzero direction.
pub fn family_and_dir(max_rules: usize, range: i64) -> impl Strategy<Value = (UpdateFamily, Vec<i64>)> {
    (2usize..=3).prop_flat_map(move |d| (family(d, max_rules, range), nonzero_vec(d, 3)))
}
