//! Double description for polyhedral cones `{y : a_i . y >= 0}`.

use num_traits::{Signed, Zero};

use super::linalg::{dot, primitive, rank};
use super::Q;

/// Generator form of a cone: `span(lineality) + cone(rays)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConeGenerators {
    pub lineality: Vec<Vec<Q>>,
    pub rays: Vec<Vec<Q>>,
}

impl ConeGenerators {
    pub fn is_zero_cone(&self) -> bool {
        self.lineality.is_empty() && self.rays.is_empty()
    }
}

/// Incremental double description (Motzkin et al.) of `{y in Q^n : a . y >= 0
/// for every a in ineqs}`.
///
/// Rays are kept as primitive integer vectors. Adjacency of a positive and a
/// negative ray is decided by the algebraic rank test on the constraints
/// processed so far, modulo the current lineality space.
pub fn double_description(n: usize, ineqs: &[Vec<Q>]) -> ConeGenerators {
    let mut lineality: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut e = vec![Q::zero(); n];
            e[i] = Q::from_integer(1.into());
            e
        })
        .collect();
    let mut rays: Vec<Vec<Q>> = Vec::new();
    let mut processed: Vec<Vec<Q>> = Vec::new();

    for a in ineqs {
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        if let Some(pos) = lineality.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l = lineality.remove(pos);
            let mut al = dot(a, &l);
            if al.is_negative() {
                l = l.iter().map(|x| -x).collect();
                al = -al;
            }
            for other in lineality.iter_mut() {
                let f = dot(a, other) / &al;
                if !f.is_zero() {
                    *other = primitive(&sub_scaled(other, &l, &f));
                }
            }
            for r in rays.iter_mut() {
                let f = dot(a, r) / &al;
                if !f.is_zero() {
                    *r = primitive(&sub_scaled(r, &l, &f));
                }
            }
            rays.push(primitive(&l));
            processed.push(a.clone());
            dedup(&mut rays);
            continue;
        }

        let vals: Vec<Q> = rays.iter().map(|r| dot(a, r)).collect();
        let plus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let minus: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut next: Vec<Vec<Q>> = (0..rays.len())
            .filter(|&i| !vals[i].is_negative())
            .map(|i| rays[i].clone())
            .collect();
        if !minus.is_empty() {
            let pointed_dim = n - lineality.len();
            let zero_sets: Vec<Vec<usize>> = rays
                .iter()
                .map(|r| (0..processed.len()).filter(|&k| dot(&processed[k], r).is_zero()).collect())
                .collect();
            for &p in &plus {
                for &m in &minus {
                    if adjacent(&zero_sets[p], &zero_sets[m], &processed, n, pointed_dim) {
                        // (a.p) m - (a.m) p lies on the hyperplane a . y = 0.
                        let ap = &vals[p];
                        let am = &vals[m];
                        let combo: Vec<Q> = rays[m]
                            .iter()
                            .zip(&rays[p])
                            .map(|(xm, xp)| ap * xm - am * xp)
                            .collect();
                        next.push(primitive(&combo));
                    }
                }
            }
        }
        rays = next;
        processed.push(a.clone());
        dedup(&mut rays);
    }
    rays.retain(|r| !r.iter().all(Zero::is_zero));
    ConeGenerators { lineality, rays }
}

fn adjacent(zp: &[usize], zm: &[usize], processed: &[Vec<Q>], n: usize, pointed_dim: usize) -> bool {
    if pointed_dim < 2 {
        return true;
    }
    let common: Vec<usize> = zp.iter().copied().filter(|k| zm.contains(k)).collect();
    if common.len() < pointed_dim - 2 {
        return false;
    }
    let rows: Vec<Vec<Q>> = common.iter().map(|&k| processed[k].clone()).collect();
    rank(&rows, n) == pointed_dim - 2
}

fn sub_scaled(v: &[Q], w: &[Q], f: &Q) -> Vec<Q> {
    v.iter().zip(w).map(|(x, y)| x - f * y).collect()
}

fn dedup(rays: &mut Vec<Vec<Q>>) {
    rays.sort();
    rays.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qv(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| Q::from_integer(x.into())).collect()
    }

    #[test]
    fn orthant() {
        let g = double_description(3, &[qv(&[1, 0, 0]), qv(&[0, 1, 0]), qv(&[0, 0, 1])]);
        assert!(g.lineality.is_empty());
        let mut rays = g.rays.clone();
        rays.sort();
        assert_eq!(rays, vec![qv(&[0, 0, 1]), qv(&[0, 1, 0]), qv(&[1, 0, 0])]);
    }

    #[test]
    fn halfspace_and_line() {
        let g = double_description(2, &[qv(&[1, 0])]);
        assert_eq!(g.lineality.len(), 1);
        assert_eq!(g.rays, vec![qv(&[1, 0])]);
        let g = double_description(2, &[qv(&[1, 0]), qv(&[-1, 0])]);
        assert_eq!(g.lineality.len(), 1);
        assert!(g.rays.is_empty());
        let g = double_description(2, &[qv(&[1, 0]), qv(&[-1, 0]), qv(&[0, 1]), qv(&[0, -1])]);
        assert!(g.is_zero_cone());
    }

    #[test]
    fn square_cone() {
        // Cone over a square: x3 >= |x1|, x3 >= |x2|.
        let g = double_description(
            3,
            &[qv(&[1, 0, 1]), qv(&[-1, 0, 1]), qv(&[0, 1, 1]), qv(&[0, -1, 1])],
        );
        assert!(g.lineality.is_empty());
        assert_eq!(g.rays.len(), 4);
        for r in &g.rays {
            assert_eq!(r[0].abs(), r[2]);
            assert_eq!(r[1].abs(), r[2]);
        }
    }
}
