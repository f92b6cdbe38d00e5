mod common;

use bootlab::family::UpdateFamily;
use bootlab::simulate::{close, close_restricted, percolates, Region, RuleSet, SiteSet, Torus};
use common::strategies::family;
use common::{naive_close, random_family, random_set, rng};
use proptest::prelude::*;

fn instance() -> impl Strategy<Value = (UpdateFamily, usize, u64, f64)> {
    (1usize..=3).prop_flat_map(|d| {
        let n_max: usize = if d == 3 { 5 } else { 8 };
        (family(d, 4, 2), 1..=n_max, any::<u64>(), 0.0f64..0.6)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn frontier_matches_naive((u, n, seed, density) in instance()) {
        let t = Torus::new(u.dimension(), n).unwrap();
        let a = random_set(&mut rng(seed), t.sites(), density);
        prop_assert_eq!(close(&u, t, &a).unwrap(), naive_close(&u, t, &a));
    }

    #[test]
    fn closure_laws((u, n, seed, density) in instance()) {
        let t = Torus::new(u.dimension(), n).unwrap();
        let mut r = rng(seed);
        let a = random_set(&mut r, t.sites(), density);
        let mut b = random_set(&mut r, t.sites(), 0.2);
        b.union_with(&a);
        let ca = close(&u, t, &a).unwrap();
        prop_assert_eq!(close(&u, t, &ca).unwrap(), ca.clone());
        prop_assert!(ca.is_subset(&close(&u, t, &b).unwrap()));
        let extra = random_family(&mut r, u.dimension(), 1, 2).rules()[0].clone();
        let bigger = u.with_rule(extra).unwrap();
        prop_assert!(ca.is_subset(&close(&bigger, t, &a).unwrap()));
    }

    /// Closing inside a box and wrapping onto the torus stays inside the
    /// torus closure of the wrapped set.
    #[test]
    fn box_closure_projects_into_torus_closure(
        (u, n, seed, density) in instance(), side in 1i64..=9
    ) {
        let d = u.dimension();
        let t = Torus::new(d, n).unwrap();
        let region = Region::new_box(vec![0; d], vec![side - 1; d]).unwrap();
        let a = random_set(&mut rng(seed), region.slots(), density);
        let boxed = close_restricted(&RuleSet::from_family(&u), &region, &a).unwrap();
        let wrap = |s: &SiteSet| SiteSet::from_indices(t.sites(), s.iter().map(|i| t.index(&region.coords(i))));
        prop_assert!(wrap(&boxed).is_subset(&close(&u, t, &wrap(&a)).unwrap()));
    }

    /// A box embedded in a torus with room to spare: the restricted closure is
    /// contained in the torus closure.
    #[test]
    fn restricted_closure_is_smaller((u, _, seed, density) in instance(), side in 1i64..=5) {
        let d = u.dimension();
        let n = (side + 2 * u.radius_ceil() + 1) as usize;
        let t = Torus::new(d, n).unwrap();
        let region = Region::new_box(vec![0; d], vec![side - 1; d]).unwrap();
        let a = random_set(&mut rng(seed), region.slots(), density);
        let boxed = close_restricted(&RuleSet::from_family(&u), &region, &a).unwrap();
        let embed = |s: &SiteSet| SiteSet::from_indices(t.sites(), s.iter().map(|i| t.index(&region.coords(i))));
        prop_assert!(embed(&boxed).is_subset(&close(&u, t, &embed(&a)).unwrap()));
    }
}

#[test]
fn single_seed_spreads_on_the_ring() {
    let u = UpdateFamily::from_vecs(1, vec![vec![vec![-1]], vec![vec![1]]]).unwrap();
    for n in 1..20 {
        for s in 0..n {
            assert!(percolates(&u, n, &SiteSet::from_indices(n, [s])).unwrap());
        }
    }
}

/// Literal restricted dynamics on a box, by repeated full scans.
fn naive_box_close(u: &UpdateFamily, region: &Region, a: &SiteSet) -> SiteSet {
    let mut cur = a.clone();
    loop {
        let mut next = cur.clone();
        for i in 0..region.slots() {
            let y = region.coords(i);
            let fires = u.rules().iter().any(|r| {
                r.elements().iter().all(|x| {
                    let z: Vec<i64> = y.iter().zip(x.coords()).map(|(a, b)| a + b).collect();
                    region.index(&z).is_some_and(|j| cur.contains(j))
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

#[test]
fn corners_and_centre_of_a_small_box() {
    let u = bootlab::family::r_neighbour(2, 2).unwrap();
    let region = Region::new_box(vec![0, 0], vec![2, 2]).unwrap();
    let a = region
        .set_from_points(&[vec![0, 0], vec![0, 2], vec![2, 0], vec![2, 2], vec![1, 1]])
        .unwrap();
    let filled = bootlab::simulate::internally_filled(&RuleSet::from_family(&u), &region, &a).unwrap();
    assert_eq!(filled, naive_box_close(&u, &region, &a).is_full());
}

proptest! {
    #[test]
    fn restricted_matches_naive((u, _, seed, density) in instance(), side in 1i64..=6) {
        let d = u.dimension();
        let region = Region::new_box(vec![-1; d], vec![side - 2; d]).unwrap();
        let a = random_set(&mut rng(seed), region.slots(), density);
        let got = close_restricted(&RuleSet::from_family(&u), &region, &a).unwrap();
        prop_assert_eq!(got, naive_box_close(&u, &region, &a));
    }
}
