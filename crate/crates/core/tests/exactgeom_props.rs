mod common;

use bootlab::exactgeom::lp::{feasible_point, Constraint, Relation};
use bootlab::exactgeom::{
    cone_separating_direction, gram_schmidt_complete, project_ray, sign_witness, QSubspace, QVec, SignSystem, Q,
};
use common::strategies::nonzero_vec;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn qv(v: &[i64]) -> QVec {
    QVec::from_ints(v)
}

/// All nonzero points of `[-r, r]^d`.
fn grid(d: usize, r: i64) -> Vec<QVec> {
    let side = 2 * r + 1;
    (0..side.pow(d as u32))
        .map(|mut i| {
            let x: Vec<i64> = (0..d)
                .map(|_| {
                    let c = i % side - r;
                    i /= side;
                    c
                })
                .collect();
            qv(&x)
        })
        .filter(|x| !x.is_zero())
        .collect()
}

fn system(d: usize) -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<i8>)> {
    prop::collection::vec((nonzero_vec(d, 1), -1i8..=1), 1..=4)
        .prop_map(|pairs| pairs.into_iter().unzip())
}

/// Whether `t` is a nonnegative combination of `gens`.
fn in_cone(gens: &[QVec], t: &QVec) -> bool {
    let d = t.dim();
    let k = gens.len();
    let mut cons: Vec<Constraint> = (0..k)
        .map(|i| {
            let mut e = vec![Q::zero(); k];
            e[i] = Q::one();
            Constraint::new(e, Relation::Ge, Q::zero())
        })
        .collect();
    for row in 0..d {
        cons.push(Constraint::new(gens.iter().map(|g| g.0[row].clone()).collect(), Relation::Eq, t.0[row].clone()));
    }
    feasible_point(k, &cons).is_some()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn completed_basis_is_orthogonal(d in 2usize..=4, seed in prop::collection::vec(-3i64..=3, 4)) {
        let v = qv(&seed[..d]);
        prop_assume!(!v.is_zero());
        let out = gram_schmidt_complete(&[v.clone()], d).unwrap();
        prop_assert_eq!(out.len(), d);
        for i in 1..d {
            prop_assert!(out[i].dot(&v).is_zero());
            for j in 1..i {
                prop_assert!(out[i].dot(&out[j]).is_zero());
            }
        }
    }

    #[test]
    fn projection_preserves_signs_on_the_complement(
        (u, w, xs) in (2usize..=3).prop_flat_map(|d| (
            nonzero_vec(d, 3),
            nonzero_vec(d, 2),
            prop::collection::vec(nonzero_vec(d, 3), 10),
        ))
    ) {
        let (u, w) = (qv(&u), qv(&w));
        let d = u.dim();
        match project_ray(&u, &[w.clone()]).unwrap() {
            None => prop_assert!(QSubspace::span(&[w], d).contains(&u)),
            Some(pu) => {
                let perp = QSubspace::perp(&[w.clone()], d);
                for x in xs {
                    // Project the sample onto the complement first.
                    let Some(px) = project_ray(&qv(&x), &[w.clone()]).unwrap() else { continue };
                    prop_assert!(perp.contains(&px));
                    prop_assert_eq!(px.sign_dot(&u), px.sign_dot(&pu));
                }
            }
        }
    }

    #[test]
    fn witness_agrees_with_grid_search((centers, signs) in (1usize..=3).prop_flat_map(system)) {
        let d = centers[0].len();
        let cs: Vec<QVec> = centers.iter().map(|c| qv(c)).collect();
        let sys = SignSystem::from_signs(QSubspace::full(d), &cs, &signs);
        let found = grid(d, 6).into_iter().any(|x| sys.satisfied_by(&x));
        match sign_witness(&sys) {
            Some(x) => {
                prop_assert!(sys.satisfied_by(&x));
                prop_assert!(found);
            }
            None => prop_assert!(!found),
        }
    }

    #[test]
    fn separation_is_certified(
        systems in (2usize..=3).prop_flat_map(|d| prop::collection::vec(system(d), 1..=3))
    ) {
        let d = systems[0].0[0].len();
        let amb = QSubspace::full(d);
        let cones: Vec<SignSystem> = systems
            .iter()
            .map(|(c, s)| SignSystem::from_signs(amb.clone(), &c.iter().map(|c| qv(c)).collect::<Vec<_>>(), s))
            .filter(|sys| sign_witness(sys).is_some())
            .collect();
        prop_assume!(!cones.is_empty());
        let gens: Vec<QVec> = cones.iter().flat_map(SignSystem::closure_generators).collect();
        match cone_separating_direction(&cones, &amb).unwrap() {
            Some(w) => {
                prop_assert!(!w.is_zero());
                for g in &gens {
                    prop_assert!(g.dot(&w) <= Q::zero());
                }
            }
            None => {
                for i in 0..d {
                    for s in [1, -1] {
                        let mut t = vec![0; d];
                        t[i] = s;
                        prop_assert!(in_cone(&gens, &qv(&t)), "generators do not span");
                    }
                }
            }
        }
    }
}
