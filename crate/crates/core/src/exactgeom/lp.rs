//! Exact feasibility for small rational linear systems.
//!
//! Two independent solvers: Fourier–Motzkin elimination (handles strict
//! inequalities natively and is used for tiny systems) and a dense Phase I
//! simplex with Bland's rule (used once elimination would blow up).

use num_traits::{One, Signed, Zero};

use super::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    /// `a . x >= b`
    Ge,
    /// `a . x > b`
    Gt,
    /// `a . x = b`
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<Q>,
    pub rel: Relation,
    pub rhs: Q,
}

impl Constraint {
    pub fn new(coeffs: Vec<Q>, rel: Relation, rhs: Q) -> Self {
        Constraint { coeffs, rel, rhs }
    }

    pub fn holds(&self, x: &[Q]) -> bool {
        let lhs = super::linalg::dot(&self.coeffs, x);
        match self.rel {
            Relation::Ge => lhs >= self.rhs,
            Relation::Gt => lhs > self.rhs,
            Relation::Eq => lhs == self.rhs,
        }
    }
}

/// Inequalities above this count go to the simplex solver.
const FM_MAX_INEQUALITIES: usize = 10;

/// A feasible point of `constraints` over `n` free variables, if one exists.
///
/// Strict inequalities are only supported by Fourier–Motzkin; systems that
/// mix them with a large inequality count are still sent there.
pub fn feasible_point(n: usize, constraints: &[Constraint]) -> Option<Vec<Q>> {
    let ineqs = constraints.iter().filter(|c| c.rel != Relation::Eq).count();
    let has_strict = constraints.iter().any(|c| c.rel == Relation::Gt);
    if ineqs <= FM_MAX_INEQUALITIES || n <= 1 || has_strict {
        fourier_motzkin(n, constraints)
    } else {
        simplex_feasible(n, constraints)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Ineq {
    a: Vec<Q>,
    b: Q,
    strict: bool,
}

impl Ineq {
    /// Rescales by the first nonzero |coefficient| so duplicates collide.
    fn normalized(mut self) -> Ineq {
        if let Some(p) = self.a.iter().find(|x| !x.is_zero()).cloned() {
            let s = p.abs().recip();
            for x in self.a.iter_mut() {
                *x = &*x * &s;
            }
            self.b = &self.b * &s;
        }
        self
    }

    fn trivial(&self) -> Option<bool> {
        if self.a.iter().all(Zero::is_zero) {
            let z = Q::zero();
            Some(if self.strict { z > self.b } else { z >= self.b })
        } else {
            None
        }
    }
}

/// Fourier–Motzkin elimination with witness reconstruction.
pub fn fourier_motzkin(n: usize, constraints: &[Constraint]) -> Option<Vec<Q>> {
    let mut eqs: Vec<(Vec<Q>, Q)> = Vec::new();
    let mut ineqs: Vec<Ineq> = Vec::new();
    for c in constraints {
        assert_eq!(c.coeffs.len(), n, "constraint arity");
        match c.rel {
            Relation::Eq => eqs.push((c.coeffs.clone(), c.rhs.clone())),
            Relation::Ge => ineqs.push(Ineq { a: c.coeffs.clone(), b: c.rhs.clone(), strict: false }),
            Relation::Gt => ineqs.push(Ineq { a: c.coeffs.clone(), b: c.rhs.clone(), strict: true }),
        }
    }

    // Substitute equalities: x_j = (b - sum_{i != j} a_i x_i) / a_j.
    let mut substitutions: Vec<(usize, Vec<Q>, Q)> = Vec::new();
    while let Some((a, b)) = eqs.pop() {
        let Some(j) = a.iter().position(|x| !x.is_zero()) else {
            if !b.is_zero() {
                return None;
            }
            continue;
        };
        let inv = a[j].recip();
        let mut expr: Vec<Q> = a.iter().map(|x| -(x * &inv)).collect();
        expr[j] = Q::zero();
        let constant = &b * &inv;
        for (ea, eb) in eqs.iter_mut() {
            substitute(ea, eb, j, &expr, &constant);
        }
        for iq in ineqs.iter_mut() {
            substitute(&mut iq.a, &mut iq.b, j, &expr, &constant);
        }
        substitutions.push((j, expr, constant));
    }

    let mut system = simplify(ineqs)?;
    let eliminated: Vec<usize> = substitutions.iter().map(|s| s.0).collect();
    let mut remaining: Vec<usize> = (0..n).filter(|j| !eliminated.contains(j)).collect();
    let mut stages: Vec<(usize, Vec<Ineq>)> = Vec::new();
    while !remaining.is_empty() {
        // Cheapest variable first.
        let (pos, &var) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &j)| {
                let p = system.iter().filter(|iq| iq.a[j].is_positive()).count();
                let m = system.iter().filter(|iq| iq.a[j].is_negative()).count();
                p * m
            })
            .unwrap();
        remaining.remove(pos);
        let mut next = Vec::new();
        let (mut lower, mut upper) = (Vec::new(), Vec::new());
        for iq in &system {
            if iq.a[var].is_positive() {
                lower.push(iq);
            } else if iq.a[var].is_negative() {
                upper.push(iq);
            } else {
                next.push(iq.clone());
            }
        }
        for lo in &lower {
            for up in &upper {
                // lo: a_v x_v + r >= b  (a_v > 0); up: c_v x_v + s >= e (c_v < 0)
                let f = lo.a[var].clone();
                let g = -up.a[var].clone();
                let a: Vec<Q> = lo.a.iter().zip(&up.a).map(|(x, y)| x * &g + y * &f).collect();
                let b = &lo.b * &g + &up.b * &f;
                next.push(Ineq { a, b, strict: lo.strict || up.strict });
            }
        }
        stages.push((var, system));
        system = simplify(next)?;
    }

    // Back-substitute in reverse elimination order.
    let mut x = vec![Q::zero(); n];
    for (var, sys) in stages.iter().rev() {
        x[*var] = pick_value(*var, sys, &x)?;
    }
    for (j, expr, constant) in substitutions.iter().rev() {
        x[*j] = constant + super::linalg::dot(expr, &x);
    }
    debug_assert!(constraints.iter().all(|c| c.holds(&x)));
    Some(x)
}

fn substitute(a: &mut [Q], b: &mut Q, j: usize, expr: &[Q], constant: &Q) {
    let aj = std::mem::replace(&mut a[j], Q::zero());
    if aj.is_zero() {
        return;
    }
    for (ai, ei) in a.iter_mut().zip(expr) {
        if !ei.is_zero() {
            *ai += &aj * ei;
        }
    }
    *b -= &aj * constant;
}

fn simplify(ineqs: Vec<Ineq>) -> Option<Vec<Ineq>> {
    let mut out: Vec<Ineq> = Vec::with_capacity(ineqs.len());
    for iq in ineqs {
        match iq.trivial() {
            Some(true) => continue,
            Some(false) => return None,
            None => out.push(iq.normalized()),
        }
    }
    out.sort();
    // Among constraints with the same normal keep only the tightest bound.
    let mut dedup: Vec<Ineq> = Vec::with_capacity(out.len());
    for iq in out {
        if let Some(last) = dedup.last_mut() {
            if last.a == iq.a {
                // Same normal: a.x >= b with larger b (strict wins ties) dominates.
                if iq.b > last.b || (iq.b == last.b && iq.strict) {
                    *last = iq;
                }
                continue;
            }
        }
        dedup.push(iq);
    }
    Some(dedup)
}

fn pick_value(var: usize, sys: &[Ineq], x: &[Q]) -> Option<Q> {
    let mut lo: Option<(Q, bool)> = None;
    let mut hi: Option<(Q, bool)> = None;
    for iq in sys {
        let av = &iq.a[var];
        if av.is_zero() {
            continue;
        }
        let mut rest = Q::zero();
        for (j, aj) in iq.a.iter().enumerate() {
            if j != var && !aj.is_zero() {
                rest += aj * &x[j];
            }
        }
        let bound = (&iq.b - rest) / av;
        if av.is_positive() {
            let tighter = match &lo {
                None => true,
                Some((l, s)) => bound > *l || (bound == *l && iq.strict && !s),
            };
            if tighter {
                lo = Some((bound, iq.strict));
            }
        } else {
            let tighter = match &hi {
                None => true,
                Some((h, s)) => bound < *h || (bound == *h && iq.strict && !s),
            };
            if tighter {
                hi = Some((bound, iq.strict));
            }
        }
    }
    let two = Q::from_integer(2.into());
    match (lo, hi) {
        (None, None) => Some(Q::zero()),
        (Some((l, s)), None) => Some(if s { l + Q::one() } else { l }),
        (None, Some((h, s))) => Some(if s { h - Q::one() } else { h }),
        (Some((l, ls)), Some((h, hs))) => {
            if l < h {
                Some((l + h) / two)
            } else if l == h && !ls && !hs {
                Some(l)
            } else {
                None
            }
        }
    }
}

/// Phase I simplex over exact rationals. Strict inequalities are rejected.
pub fn simplex_feasible(n: usize, constraints: &[Constraint]) -> Option<Vec<Q>> {
    assert!(
        constraints.iter().all(|c| c.rel != Relation::Gt),
        "simplex handles only non-strict systems"
    );
    let m = constraints.len();
    if m == 0 {
        return Some(vec![Q::zero(); n]);
    }
    let slacks: Vec<usize> = constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.rel == Relation::Ge)
        .map(|(i, _)| i)
        .collect();
    // Columns: p (n), q (n), slacks, artificials (m), rhs.
    let ns = slacks.len();
    let art0 = 2 * n + ns;
    let cols = art0 + m;
    let mut t: Vec<Vec<Q>> = vec![vec![Q::zero(); cols + 1]; m];
    for (i, c) in constraints.iter().enumerate() {
        let flip = c.rhs.is_negative();
        let sg = if flip { -Q::one() } else { Q::one() };
        for j in 0..n {
            t[i][j] = &c.coeffs[j] * &sg;
            t[i][n + j] = -&c.coeffs[j] * &sg;
        }
        if let Some(k) = slacks.iter().position(|&s| s == i) {
            t[i][2 * n + k] = -sg.clone();
        }
        t[i][art0 + i] = Q::one();
        t[i][cols] = &c.rhs * &sg;
    }
    let mut basis: Vec<usize> = (0..m).map(|i| art0 + i).collect();
    // Reduced costs for minimizing the sum of artificials.
    let mut z: Vec<Q> = vec![Q::zero(); cols + 1];
    for row in &t {
        for j in 0..=cols {
            if j < art0 || j == cols {
                z[j] -= &row[j];
            }
        }
    }
    loop {
        let Some(enter) = (0..cols).find(|&j| z[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &t[i][cols] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            // Unbounded direction in Phase I cannot happen (objective >= 0).
            unreachable!("phase I objective is bounded below");
        };
        let piv = t[r][enter].recip();
        for v in t[r].iter_mut() {
            *v = &*v * &piv;
        }
        for i in 0..m {
            if i != r && !t[i][enter].is_zero() {
                let f = t[i][enter].clone();
                for j in 0..=cols {
                    if !t[r][j].is_zero() {
                        let delta = &f * &t[r][j];
                        t[i][j] -= delta;
                    }
                }
            }
        }
        if !z[enter].is_zero() {
            let f = z[enter].clone();
            for j in 0..=cols {
                if !t[r][j].is_zero() {
                    let delta = &f * &t[r][j];
                    z[j] -= delta;
                }
            }
        }
        basis[r] = enter;
    }
    if z[cols].is_negative() {
        return None;
    }
    let mut vals = vec![Q::zero(); cols];
    for (i, &b) in basis.iter().enumerate() {
        vals[b] = t[i][cols].clone();
    }
    let x: Vec<Q> = (0..n).map(|j| &vals[j] - &vals[n + j]).collect();
    debug_assert!(constraints.iter().all(|c| c.holds(&x)));
    Some(x)
}
