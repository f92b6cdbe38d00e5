//! Integer lattices perpendicular to rational directions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::linalg::primitive;
use super::QVec;
use crate::family::IntVec;

/// A basis of the lattice `W^⊥ ∩ Z^d`.
///
/// Column operations by unimodular 2x2 blocks bring the (integer-scaled)
/// constraint matrix to echelon form; the columns of the accumulated
/// transform that end up zero span the integer kernel. The basis is then
/// pairwise size-reduced and each vector given a positive leading entry.
pub fn integer_kernel_basis(w: &[QVec], d: usize) -> Vec<IntVec> {
    let rows: Vec<Vec<BigInt>> = w
        .iter()
        .filter(|v| !v.is_zero())
        .map(|v| primitive(&v.0).iter().map(|x| x.to_integer()).collect())
        .collect();
    let mut h = rows.clone();
    // u[j] is the j-th column of the transform.
    let mut u: Vec<Vec<BigInt>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut col = 0;
    for i in 0..h.len() {
        if col == d {
            break;
        }
        for j in col + 1..d {
            if h[i][j].is_zero() {
                continue;
            }
            let a = h[i][col].clone();
            let b = h[i][j].clone();
            let ext = a.extended_gcd(&b);
            let (g, x, y) = (ext.gcd, ext.x, ext.y);
            let (ag, bg) = (&a / &g, &b / &g);
            // new_col = x*col + y*colj ; new_colj = ag*colj - bg*col
            combine(&mut h, &mut u, col, j, &x, &y, &ag, &bg);
        }
        if !h[i][col].is_zero() {
            col += 1;
        }
    }
    let mut basis: Vec<Vec<BigInt>> = u[col..].to_vec();
    size_reduce(&mut basis);
    basis
        .into_iter()
        .map(|mut v| {
            if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
                v = v.into_iter().map(|x| -x).collect();
            }
            IntVec(v.iter().map(|x| x.to_i64().expect("kernel entry fits i64")).collect())
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn combine(
    h: &mut [Vec<BigInt>],
    u: &mut [Vec<BigInt>],
    c: usize,
    j: usize,
    x: &BigInt,
    y: &BigInt,
    ag: &BigInt,
    bg: &BigInt,
) {
    for row in h.iter_mut() {
        let (p, q) = (row[c].clone(), row[j].clone());
        row[c] = x * &p + y * &q;
        row[j] = ag * &q - bg * &p;
    }
    let (pc, qc) = (u[c].clone(), u[j].clone());
    u[c] = pc.iter().zip(&qc).map(|(p, q)| x * p + y * q).collect();
    u[j] = pc.iter().zip(&qc).map(|(p, q)| ag * q - bg * p).collect();
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Repeated pairwise reduction `b_i -= round(<b_i,b_j>/<b_j,b_j>) b_j`.
fn size_reduce(basis: &mut [Vec<BigInt>]) {
    loop {
        let mut changed = false;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i == j {
                    continue;
                }
                let nj = dot(&basis[j], &basis[j]);
                if nj.is_zero() {
                    continue;
                }
                let ip = dot(&basis[i], &basis[j]);
                // Nearest integer to ip / nj.
                let two = BigInt::from(2);
                let k = (&ip * &two + &nj).div_floor(&(&nj * &two));
                if k.is_zero() {
                    continue;
                }
                let cand: Vec<BigInt> = basis[i].iter().zip(&basis[j]).map(|(a, b)| a - &k * b).collect();
                if dot(&cand, &cand) < dot(&basis[i], &basis[i]) {
                    basis[i] = cand;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}
