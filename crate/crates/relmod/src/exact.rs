//! Exact rational linear algebra for 0-1 model matrices.
//!
//! Ranks, row reduction and integer kernel bases are computed over the
//! rationals, never in floating point, so that kernel exponents and facial
//! certificates are exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn to_rational_matrix(rows: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    rows.iter()
        .map(|r| r.iter().map(|&x| rat(x)).collect())
        .collect()
}

/// Reduces `mat` to reduced row echelon form in place and returns the pivot
/// column of each nonzero row.
pub fn rref(mat: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = mat.len();
    let cols = if rows == 0 { 0 } else { mat[0].len() };
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let Some(pr) = (row..rows).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(row, pr);
        let inv = mat[row][col].clone();
        for x in mat[row].iter_mut() {
            *x /= inv.clone();
        }
        let pivot_row = mat[row].clone();
        for (r, other) in mat.iter_mut().enumerate() {
            if r != row && !other[col].is_zero() {
                let factor = other[col].clone();
                for (x, p) in other.iter_mut().zip(&pivot_row) {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Rank of an integer matrix over the rationals.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let mut mat = to_rational_matrix(rows);
    rref(&mut mat).len()
}

/// True iff `v` lies in the row space of `rows`.
pub fn in_row_space(rows: &[Vec<i64>], v: &[i64]) -> bool {
    let base = rank(rows);
    let mut stacked: Vec<Vec<i64>> = rows.to_vec();
    stacked.push(v.to_vec());
    rank(&stacked) == base
}

/// Divides a vector by the gcd of its entries and converts to `i64`.
fn primitive(v: Vec<BigInt>) -> Vec<i64> {
    let mut g = BigInt::zero();
    for x in &v {
        g = g.gcd(x);
    }
    if g.is_zero() {
        g = BigInt::one();
    }
    v.into_iter()
        .map(|x| {
            let q = x / &g;
            i64::try_from(q).expect("kernel entry exceeds i64")
        })
        .collect()
}

/// Integer basis of the kernel of `rows`, one primitive vector per free
/// column of the reduced form. Returns an empty list for a full-column-rank
/// matrix.
pub fn integer_kernel(rows: &[Vec<i64>], cols: usize) -> Vec<Vec<i64>> {
    if rows.is_empty() {
        // Kernel of the empty map is the whole space.
        return (0..cols)
            .map(|i| {
                let mut v = vec![0i64; cols];
                v[i] = 1;
                v
            })
            .collect();
    }
    let mut mat = to_rational_matrix(rows);
    let pivots = rref(&mut mat);
    let pivot_set: Vec<bool> = {
        let mut s = vec![false; cols];
        for &p in &pivots {
            s[p] = true;
        }
        s
    };
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_set[free] {
            continue;
        }
        // v[free] = 1, v[pivot_k] = -rref[k][free].
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (k, &p) in pivots.iter().enumerate() {
            v[p] = -mat[k][free].clone();
        }
        // Clear denominators, then reduce to a primitive integer vector.
        let mut denom = BigInt::one();
        for x in &v {
            denom = denom.lcm(x.denom());
        }
        let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&denom / x.denom())).collect();
        basis.push(primitive(ints));
    }
    basis
}

/// Greedily scans `candidates` in order, keeping those that enlarge the row
/// space of `base`; returns their indices.
pub fn greedy_independent(base: &[Vec<i64>], candidates: &[Vec<i64>]) -> Vec<usize> {
    let mut kept = Vec::new();
    let mut current: Vec<Vec<i64>> = base.to_vec();
    let mut r = rank(&current);
    for (idx, cand) in candidates.iter().enumerate() {
        current.push(cand.clone());
        let nr = rank(&current);
        if nr > r {
            kept.push(idx);
            r = nr;
        } else {
            current.pop();
        }
    }
    kept
}

/// Exact dot product of integer vectors.
pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
