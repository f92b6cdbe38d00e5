//! Dense exact linear algebra over the rationals.

use num_integer::Integer;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Q, QVec};

/// Row-reduces `rows` (each of length `ncols`) to reduced row echelon form.
///
/// Returns the nonzero reduced rows and the pivot column of each.
pub fn rref(rows: &[Vec<Q>], ncols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..ncols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[Vec<Q>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{x : row . x = 0 for every row}`, each vector scaled to a
/// primitive integer vector.
pub fn kernel(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let (m, pivots) = rref(rows, ncols);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); ncols];
        v[free] = Q::one();
        for (row, &pc) in m.iter().zip(&pivots) {
            v[pc] = -row[free].clone();
        }
        out.push(primitive(&v));
    }
    out
}

/// Solves `sum_i coeffs[i] * basis[i] = target` exactly, if possible.
pub fn solve_in_span(basis: &[Vec<Q>], target: &[Q]) -> Option<Vec<Q>> {
    let n = target.len();
    let k = basis.len();
    // Augmented system: n equations in k unknowns.
    let rows: Vec<Vec<Q>> = (0..n)
        .map(|i| {
            let mut row: Vec<Q> = basis.iter().map(|b| b[i].clone()).collect();
            row.push(target[i].clone());
            row
        })
        .collect();
    let (m, pivots) = rref(&rows, k + 1);
    if pivots.contains(&k) {
        return None;
    }
    let mut x = vec![Q::zero(); k];
    for (row, &pc) in m.iter().zip(&pivots) {
        x[pc] = row[k].clone();
    }
    Some(x)
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    let mut s = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

/// Positive rescaling to a primitive integer vector (the zero vector is
/// returned unchanged).
pub fn primitive(v: &[Q]) -> Vec<Q> {
    if v.iter().all(Zero::is_zero) {
        return v.to_vec();
    }
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Q::from_integer(lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    ints.into_iter().map(|x| Q::from_integer(x / &g)).collect()
}

/// Primitive integer representative of the line through `v`, with a positive
/// leading nonzero coordinate.
pub fn canonical_line(v: &[Q]) -> Vec<Q> {
    let mut p = primitive(v);
    if let Some(first) = p.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in p.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    p
}

pub fn to_rows(vs: &[QVec]) -> Vec<Vec<Q>> {
    vs.iter().map(|v| v.0.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    fn qv(xs: &[i64]) -> Vec<Q> {
        xs.iter().map(|&x| q(x)).collect()
    }

    #[test]
    fn rank_and_kernel() {
        let rows = vec![qv(&[1, 1, 0]), qv(&[2, 2, 0])];
        assert_eq!(rank(&rows, 3), 1);
        let k = kernel(&rows, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(dot(v, &rows[0]).is_zero());
        }
        assert_eq!(kernel(&[], 2).len(), 2);
    }

    #[test]
    fn solve_and_primitive() {
        let basis = vec![qv(&[1, 0, 1]), qv(&[0, 1, 1])];
        let x = solve_in_span(&basis, &qv(&[2, 3, 5])).unwrap();
        assert_eq!(x, qv(&[2, 3]));
        assert!(solve_in_span(&basis, &qv(&[1, 0, 0])).is_none());
        let v = vec![Q::new(1.into(), 2.into()), Q::new((-3).into(), 4.into())];
        assert_eq!(primitive(&v), qv(&[2, -3]));
        assert_eq!(canonical_line(&qv(&[0, -4, 6])), qv(&[0, 2, -3]));
    }
}
