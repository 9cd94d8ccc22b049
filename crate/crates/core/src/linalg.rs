//! Exact linear algebra over arbitrary-precision rationals: Gaussian
//! elimination with full solution-set classification, and a small
//! Fourier–Motzkin feasibility routine for rank-deficient systems.

use num_traits::{One, Signed, Zero};

use crate::rational::Rat;

/// Outcome of solving `A x = b` exactly.
#[derive(Debug, Clone)]
pub enum Solve {
    Inconsistent,
    Unique(Vec<Rat>),
    /// Solution set `particular + span(nullspace)`.
    Underdetermined {
        particular: Vec<Rat>,
        nullspace: Vec<Vec<Rat>>,
    },
}

/// Reduced row echelon form in place; returns pivot column per pivot row.
fn rref(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].clone();
        for j in c..cols {
            m[r][j] = &m[r][j] / &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let sub = &m[r][j] * &f;
                    m[i][j] = &m[i][j] - sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

pub fn rank(a: &[Vec<Rat>]) -> usize {
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    rref(&mut m).len()
}

/// Solve `A x = b`, classifying the solution set exactly.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Solve {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    // Inconsistent iff a pivot lands in the augmented column.
    if pivots.last() == Some(&cols) {
        return Solve::Inconsistent;
    }
    let pivot_set: Vec<usize> = pivots;
    let mut particular = vec![Rat::zero(); cols];
    for (row, &pc) in pivot_set.iter().enumerate() {
        particular[pc] = m[row][cols].clone();
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_set.contains(c)).collect();
    if free.is_empty() {
        return Solve::Unique(particular);
    }
    let mut nullspace = Vec::with_capacity(free.len());
    for &fc in &free {
        let mut v = vec![Rat::zero(); cols];
        v[fc] = Rat::one();
        for (row, &pc) in pivot_set.iter().enumerate() {
            v[pc] = -m[row][fc].clone();
        }
        nullspace.push(v);
    }
    Solve::Underdetermined {
        particular,
        nullspace,
    }
}

/// A linear inequality `c . t + d >= 0` over the free parameters.
type Ineq = (Vec<Rat>, Rat);

/// Find any point of `{particular + N t : masked coords >= 0}`, or prove
/// none exists. Elimination order is last parameter first; the returned
/// point is deterministic (interval midpoints during back-substitution).
pub fn feasible_nonneg(
    particular: &[Rat],
    nullspace: &[Vec<Rat>],
    nonneg: &[bool],
) -> Option<Vec<Rat>> {
    let dim = nullspace.len();
    let n = particular.len();
    let mut system: Vec<Ineq> = Vec::new();
    for i in 0..n {
        if !nonneg[i] {
            continue;
        }
        let coefs: Vec<Rat> = (0..dim).map(|j| nullspace[j][i].clone()).collect();
        system.push((coefs, particular[i].clone()));
    }
    let mut stages: Vec<Vec<Ineq>> = Vec::with_capacity(dim);
    let mut current = system;
    for level in (0..dim).rev() {
        stages.push(current.clone());
        let mut lower: Vec<Ineq> = Vec::new(); // coef > 0: t >= bound
        let mut upper: Vec<Ineq> = Vec::new(); // coef < 0: t <= bound
        let mut rest: Vec<Ineq> = Vec::new();
        for (c, d) in current {
            if c[level].is_zero() {
                rest.push((c, d));
            } else if c[level].is_positive() {
                lower.push((c, d));
            } else {
                upper.push((c, d));
            }
        }
        // Combine each lower bound with each upper bound.
        for (cl, dl) in &lower {
            for (cu, du) in &upper {
                let scale_l = -cu[level].clone(); // positive
                let scale_u = cl[level].clone(); // positive
                let mut c = vec![Rat::zero(); dim];
                for j in 0..level {
                    c[j] = &cl[j] * &scale_l + &cu[j] * &scale_u;
                }
                let d = dl * &scale_l + du * &scale_u;
                rest.push((c, d));
            }
        }
        current = rest;
    }
    // Constant stage: every remaining inequality must hold with t = 0.
    if current.iter().any(|(_, d)| d.is_negative()) {
        return None;
    }
    // Back-substitute, choosing the midpoint of each feasible interval
    // (or the finite bound, or zero when unconstrained).
    stages.reverse(); // stages[level] holds the system before eliminating t_level
    let mut t = vec![Rat::zero(); dim];
    for level in 0..dim {
        let stage = &stages[dim - 1 - level];
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        for (c, d) in stage {
            if c[level].is_zero() {
                continue;
            }
            let mut rhs = -d.clone();
            for j in (level + 1)..dim {
                rhs -= &c[j] * &t[j];
            }
            let bound = rhs / c[level].clone();
            if c[level].is_positive() {
                lo = Some(match lo {
                    Some(v) if v >= bound => v,
                    _ => bound,
                });
            } else {
                hi = Some(match hi {
                    Some(v) if v <= bound => v,
                    _ => bound,
                });
            }
        }
        t[level] = match (lo, hi) {
            (Some(l), Some(h)) => {
                if l > h {
                    return None;
                }
                (l + h) / Rat::from_integer(2.into())
            }
            (Some(l), None) => l,
            (None, Some(h)) => h,
            (None, None) => Rat::zero(),
        };
    }
    let mut point = particular.to_vec();
    for j in 0..dim {
        for i in 0..n {
            point[i] += &nullspace[j][i] * &t[j];
        }
    }
    for (i, flag) in nonneg.iter().enumerate() {
        if *flag && point[i].is_negative() {
            return None; // numeric impossibility guard; elimination is exact
        }
    }
    Some(point)
}
