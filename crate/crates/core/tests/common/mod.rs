//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

pub mod strategies;

use bootlab::exactgeom::{integer_kernel_basis, QVec};
use bootlab::family::{IntVec, Rule, UpdateFamily};
use bootlab::resistance::{Analyzer, SphereProblem};
use bootlab::simulate::{SiteSet, Torus};
use bootlab::stableset::stable_formula;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut impl Rng, d: usize, range: i64) -> IntVec {
    loop {
        let v = IntVec((0..d).map(|_| rng.gen_range(-range..=range)).collect());
        if !v.is_zero() {
            return v;
        }
    }
}

/// Up to `max_rules` rules of 1 to 3 elements from `[-range, range]^d`.
pub fn random_family(rng: &mut impl Rng, d: usize, max_rules: usize, range: i64) -> UpdateFamily {
    let k = rng.gen_range(1..=max_rules);
    let rules = (0..k)
        .map(|_| {
            let size = rng.gen_range(1..=3);
            Rule::new((0..size).map(|_| random_vec(rng, d, range)).collect()).unwrap()
        })
        .collect();
    UpdateFamily::new(d, rules).unwrap()
}

pub fn random_set(rng: &mut impl Rng, len: usize, density: f64) -> SiteSet {
    SiteSet::from_indices(len, (0..len).filter(|_| rng.gen_bool(density)))
}

/// Literal synchronous dynamics: every round infects all sites at which some
/// rule is fully infected, until nothing changes.
pub fn naive_close(u: &UpdateFamily, torus: Torus, a: &SiteSet) -> SiteSet {
    let mut cur = a.clone();
    loop {
        let mut next = cur.clone();
        for i in 0..torus.sites() {
            if cur.contains(i) {
                continue;
            }
            let y = torus.coords(i);
            let fires = u.rules().iter().any(|r| {
                r.elements().iter().all(|x| {
                    let z: Vec<i64> = y.iter().zip(x.coords()).map(|(a, b)| a + b).collect();
                    cur.contains(torus.index(&z))
                })
            });
            if fires {
                next.insert(i);
            }
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// A nonzero integer point of `w^⊥` with small coefficients in a reduced
/// lattice basis, or `None` if `w^⊥` is zero.
pub fn random_perp_point(rng: &mut impl Rng, w: &[QVec], d: usize, range: i64) -> Option<IntVec> {
    let basis = integer_kernel_basis(w, d);
    if basis.is_empty() {
        return None;
    }
    loop {
        let mut x = vec![0i64; d];
        for b in &basis {
            let c = rng.gen_range(-range..=range);
            for (xi, bi) in x.iter_mut().zip(b.coords()) {
                *xi += c * bi;
            }
        }
        let v = IntVec(x);
        if !v.is_zero() {
            return Some(v);
        }
    }
}

/// `N u + v` with `N` large enough that every line of `lines` not orthogonal
/// to `u` has the same sign at the result as at `u`.
pub fn push_towards(u: &QVec, v: &QVec, lines: &[QVec]) -> QVec {
    let mut n: i64 = 1;
    for c in lines {
        let cu = c.dot(u);
        if cu.is_zero() {
            continue;
        }
        let ratio = (c.dot(v) / cu).abs().ceil().to_integer().to_i64().expect("small ratio");
        n = n.max(ratio + 1);
    }
    u.scale(&bootlab::exactgeom::Q::from_integer(n.into())).add(v)
}

/// Outcome of comparing the restricted and ambient induced resistances.
pub struct RestrictionCheck {
    pub restricted: u32,
    pub ambient: u32,
    pub dim: usize,
}

impl RestrictionCheck {
    /// Restricted never exceeds ambient.
    pub fn monotone(&self) -> bool {
        self.restricted <= self.ambient
    }

    /// Ambient below the top value forces restricted below its top value.
    pub fn non_subcritical(&self) -> bool {
        self.ambient as usize > self.dim - 1 || (self.restricted as usize) < self.dim - 1
    }
}

/// Restricts the stable set of `family` at `u` and compares the induced
/// resistance at `v` (orthogonal to `u`) with the ambient induced
/// resistance at a point close to `u` in the direction of `v`.
pub fn restriction_check(
    an: &Analyzer,
    family: &UpdateFamily,
    u: &IntVec,
    v: &IntVec,
) -> RestrictionCheck {
    let d = family.dimension();
    let f = stable_formula(family);
    let p = SphereProblem::new(f.clone()).unwrap();
    let uq = QVec::from_int_vec(u);
    let vq = QVec::from_int_vec(v);
    let lines = bootlab::resistance::cell_basis(&p).lines;
    let x = push_towards(&uq, &vq, &lines);
    let ambient = an.rho(&p, &x).unwrap();
    let restricted_problem = SphereProblem::new(f.restrict_at(&uq).unwrap()).unwrap();
    let restricted = an.rho(&restricted_problem, &vq).unwrap();
    RestrictionCheck { restricted, ambient, dim: d }
}

/// Random rational ray with a dense direction set.
pub fn random_ray(rng: &mut impl Rng, d: usize) -> QVec {
    QVec::from_int_vec(&random_vec(rng, d, 6))
}
