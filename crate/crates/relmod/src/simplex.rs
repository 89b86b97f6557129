//! A small exact-arithmetic simplex solver.
//!
//! Solves `max c'x  s.t.  A x = b, x >= 0` over the rationals, starting from
//! a given basic feasible solution whose basic columns already form an
//! identity in row order. Bland's rule is used throughout, so the method
//! terminates on every input.

use crate::exact::Rational;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub outcome: LpOutcome,
    pub value: Rational,
    pub x: Vec<Rational>,
    pub pivots: usize,
}

/// Maximizes `c'x` over `A x = b, x >= 0`.
///
/// `basis[r]` names the variable whose column is the r-th identity column of
/// the initial tableau; `b` must be componentwise nonnegative and the
/// objective coefficients of the initial basic variables must be zero.
pub fn maximize(
    a: &[Vec<Rational>],
    b: &[Rational],
    c: &[Rational],
    mut basis: Vec<usize>,
) -> LpSolution {
    let m = a.len();
    let n = c.len();
    debug_assert_eq!(basis.len(), m);
    debug_assert!(b.iter().all(|v| !v.is_negative()));
    debug_assert!(basis.iter().all(|&j| c[j].is_zero()));

    // Tableau rows carry the constraints with the right-hand side appended;
    // `z` carries the reduced costs and, in its last entry, minus the
    // objective value.
    let mut tab: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut z: Vec<Rational> = c.to_vec();
    z.push(Rational::zero());

    let mut pivots = 0usize;
    // Bland: enter on the first improving column.
    while let Some(enter) = (0..n).find(|&j| z[j].is_positive()) {
        // Ratio test; ties resolved toward the smallest basic variable.
        let mut leave: Option<usize> = None;
        let mut best: Option<Rational> = None;
        for r in 0..m {
            if tab[r][enter].is_positive() {
                let ratio = &tab[r][n] / &tab[r][enter];
                let better = match &best {
                    None => true,
                    Some(cur) => {
                        ratio < *cur || (ratio == *cur && basis[r] < basis[leave.unwrap()])
                    }
                };
                if better {
                    best = Some(ratio);
                    leave = Some(r);
                }
            }
        }
        let Some(leave) = leave else {
            return LpSolution {
                outcome: LpOutcome::Unbounded,
                value: Rational::zero(),
                x: vec![Rational::zero(); n],
                pivots,
            };
        };

        let pivot = tab[leave][enter].clone();
        for v in tab[leave].iter_mut() {
            *v /= pivot.clone();
        }
        let pivot_row = tab[leave].clone();
        for (r, other) in tab.iter_mut().enumerate() {
            if r != leave && !other[enter].is_zero() {
                let f = other[enter].clone();
                for (x, p) in other.iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        if !z[enter].is_zero() {
            let f = z[enter].clone();
            for (x, p) in z.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
        basis[leave] = enter;
        pivots += 1;
    }

    let mut x = vec![Rational::zero(); n];
    for r in 0..m {
        x[basis[r]] = tab[r][n].clone();
    }
    LpSolution {
        outcome: LpOutcome::Optimal,
        value: -z[n].clone(),
        x,
        pivots,
    }
}
