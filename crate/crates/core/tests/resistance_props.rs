mod common;

use bootlab::exactgeom::{QVec, SignSystem};
use bootlab::family::stretch;
use bootlab::resistance::{
    cell_basis, classify, enumerate_cells, good_witness, is_semi_good, max_rho_halfspace, resistance,
    supercritical_by_hemisphere, Analyzer, Class, SphereProblem,
};
use common::strategies::{family, family_and_dir, nonzero_vec};
use common::{random_perp_point, restriction_check, rng};
use proptest::prelude::*;

fn signs_of(lines: &[QVec], x: &QVec) -> Vec<i8> {
    lines.iter().map(|b| b.sign_dot(x)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn classification_matches_hemisphere_test((u, _) in family_and_dir(4, 2)) {
        let class = classify(&u).unwrap();
        prop_assert_eq!(supercritical_by_hemisphere(&u).unwrap(), class == Class::Supercritical);
    }

    #[test]
    fn cells_partition_the_sphere(
        (u, samples) in (2usize..=3).prop_flat_map(|d| (family(d, 4, 2), prop::collection::vec(nonzero_vec(d, 6), 40)))
    ) {
        let p = SphereProblem::of_family(&u).unwrap();
        let lines = cell_basis(&p).lines;
        let cells = enumerate_cells(&p).unwrap();
        let mut seen: Vec<&Vec<i8>> = cells.iter().map(|c| &c.signs).collect();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), cells.len());
        for c in &cells {
            prop_assert_eq!(&signs_of(&lines, &c.witness), &c.signs);
        }
        for s in samples {
            let x = QVec::from_ints(&s);
            let sg = signs_of(&lines, &x);
            prop_assert_eq!(cells.iter().filter(|c| c.signs == sg).count(), 1);
        }
    }

    #[test]
    fn rho_is_constant_on_cells(u in (2usize..=3).prop_flat_map(|d| family(d, 4, 2))) {
        let p = SphereProblem::of_family(&u).unwrap();
        let lines = cell_basis(&p).lines;
        let an = Analyzer::new();
        for c in an.cells(&p).unwrap() {
            // Relative interior plus closure stays in the relative interior.
            let gens = SignSystem::from_signs(p.ambient().clone(), &lines, &c.signs).closure_generators();
            let other = gens.iter().fold(c.witness.add(&c.witness), |acc, g| acc.add(g));
            prop_assert_eq!(&signs_of(&lines, &other), &c.signs);
            prop_assert_eq!(an.rho(&p, &other).unwrap(), c.rho);
        }
    }

    #[test]
    fn restriction_never_raises_rho(
        ((u, dir), seed) in (family_and_dir(4, 2), any::<u64>())
    ) {
        let d = u.dimension();
        let mut r = rng(seed);
        let v = random_perp_point(&mut r, &[QVec::from_ints(&dir)], d, 3).unwrap();
        let c = restriction_check(&Analyzer::new(), &u, &bootlab::IntVec(dir), &v);
        prop_assert!(c.monotone(), "restricted {} > ambient {}", c.restricted, c.ambient);
        prop_assert!(c.non_subcritical(), "ambient {} restricted {}", c.ambient, c.restricted);
    }

    #[test]
    fn stretching_keeps_resistance((u, k) in (family_and_dir(3, 2), 2i64..=3).prop_map(|((u, _), k)| (u, k))) {
        prop_assert_eq!(resistance(&stretch(&u, k).unwrap()).unwrap(), resistance(&u).unwrap());
    }

    #[test]
    fn halfspace_maximum_is_bounded((u, w) in family_and_dir(4, 2)) {
        let p = SphereProblem::of_family(&u).unwrap();
        let global = enumerate_cells(&p).unwrap().iter().map(|c| c.rho).max().unwrap();
        let h = max_rho_halfspace(&p, &QVec::from_ints(&w)).unwrap();
        prop_assert!(h <= global);
        prop_assert!(h <= u.dimension() as u32);
    }

    #[test]
    fn good_implies_semi_good((u, _) in family_and_dir(4, 2), s in 1u32..=3) {
        let d = u.dimension() as u32;
        prop_assume!(s <= d);
        if let Some(w) = good_witness(&u, &[], s).unwrap() {
            prop_assert!(is_semi_good(&u, &[], s, &w).unwrap());
        }
    }
}
