//! Kernel bases, generalized odds ratios and the dual representation.

use crate::exact;
use crate::model::{has_overall_effect, Distribution, ModelError, ModelMatrix, SampleSpace};

/// Integer basis of Ker(A), stored row-wise.
///
/// In canonical form the first row is the unique row with a nonzero sum of
/// entries (present exactly when the model lacks the overall effect); every
/// other row sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis {
    rows: Vec<Vec<i64>>,
    canonical: bool,
}

impl KernelBasis {
    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// Degrees of freedom K.
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn canonical(&self) -> bool {
        self.canonical
    }

    /// Index of the first row with nonzero entry sum, if any.
    pub fn nonhomogeneous_index(&self) -> Option<usize> {
        self.rows.iter().position(|r| r.iter().sum::<i64>() != 0)
    }

    /// Entry sum d1' 1 of the non-homogeneous row.
    pub fn d1_dot_one(&self) -> Option<i64> {
        self.nonhomogeneous_index()
            .map(|i| self.rows[i].iter().sum())
    }

    /// `D log p`, the log-scale residuals of the dual representation.
    pub fn log_residuals(&self, log_p: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|d| d.iter().zip(log_p).map(|(&c, &l)| c as f64 * l).sum())
            .collect()
    }

    pub(crate) fn from_rows(rows: Vec<Vec<i64>>, canonical: bool) -> Self {
        KernelBasis { rows, canonical }
    }
}

fn primitive_in_place(v: &mut [i64]) {
    let mut g: i64 = 0;
    for &x in v.iter() {
        g = num_integer::gcd(g, x);
    }
    if g > 1 {
        for x in v.iter_mut() {
            *x /= g;
        }
    }
}

/// Canonical integer kernel basis of the model matrix.
///
/// The raw basis comes from exact rational elimination, cleared to primitive
/// integer rows. When the model lacks the overall effect, the first row with
/// nonzero sum is kept as d1 (sign-normalized so that d1' 1 < 0) and every
/// other such row d is replaced by the homogeneous combination
/// (d' 1) d1 - (d1' 1) d.
pub fn kernel_basis(model: &ModelMatrix) -> KernelBasis {
    let raw = exact::integer_kernel(model.rows(), model.n_cells());
    canonicalize(raw)
}

/// Applies the canonical sweep to a set of independent kernel rows.
pub(crate) fn canonicalize(raw: Vec<Vec<i64>>) -> KernelBasis {
    if raw.is_empty() {
        return KernelBasis::from_rows(raw, true);
    }
    let sums: Vec<i64> = raw.iter().map(|r| r.iter().sum()).collect();
    let Some(first) = sums.iter().position(|&s| s != 0) else {
        // Every row is already homogeneous: the model has the overall effect.
        return KernelBasis::from_rows(raw, true);
    };
    let mut d1 = raw[first].clone();
    let c1 = sums[first];
    if c1 > 0 {
        for x in d1.iter_mut() {
            *x = -*x;
        }
    }
    let c1 = -c1.abs();
    let mut rows = vec![d1.clone()];
    for (idx, row) in raw.iter().enumerate() {
        if idx == first {
            continue;
        }
        let c = sums[idx];
        if c == 0 {
            rows.push(row.clone());
        } else {
            let mut swept: Vec<i64> = d1
                .iter()
                .zip(row)
                .map(|(&a, &b)| c * a - c1 * b)
                .collect();
            primitive_in_place(&mut swept);
            rows.push(swept);
        }
    }
    KernelBasis::from_rows(rows, true)
}

/// One kernel row split as a generalized odds ratio p^{d+} / p^{d-} = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct OddsRatioSpec {
    pub plus: Vec<i64>,
    pub minus: Vec<i64>,
    pub homogeneous: bool,
}

impl OddsRatioSpec {
    pub fn from_row(d: &[i64]) -> Self {
        let plus: Vec<i64> = d.iter().map(|&x| x.max(0)).collect();
        let minus: Vec<i64> = d.iter().map(|&x| (-x).max(0)).collect();
        let homogeneous = d.iter().sum::<i64>() == 0;
        OddsRatioSpec {
            plus,
            minus,
            homogeneous,
        }
    }

    /// The underlying kernel vector d = plus - minus.
    pub fn row(&self) -> Vec<i64> {
        self.plus
            .iter()
            .zip(&self.minus)
            .map(|(&p, &m)| p - m)
            .collect()
    }

    /// p^{d+} / p^{d-} for a strictly positive vector.
    pub fn evaluate(&self, probs: &[f64]) -> f64 {
        let pow = |exps: &[i64]| -> f64 {
            exps.iter()
                .zip(probs)
                .filter(|(&e, _)| e != 0)
                .map(|(&e, &p)| p.powi(e as i32))
                .product()
        };
        pow(&self.plus) / pow(&self.minus)
    }

    fn side(exps: &[i64], names: &[String]) -> String {
        let terms: Vec<String> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, &e)| {
                if e == 1 {
                    names[i].clone()
                } else {
                    format!("{}^{}", names[i], e)
                }
            })
            .collect();
        if terms.is_empty() {
            "1".to_string()
        } else {
            terms.join("*")
        }
    }

    /// Monomial-ratio rendering with 1-based cell indices, e.g. "p3/(p1*p4)".
    pub fn to_index_string(&self) -> String {
        let names: Vec<String> = (1..=self.plus.len()).map(|i| format!("p{i}")).collect();
        self.render(&names)
    }

    /// Monomial-ratio rendering with cell labels.
    pub fn to_label_string(&self, space: &SampleSpace) -> String {
        let names: Vec<String> = space.labels().iter().map(|l| format!("p({l})")).collect();
        self.render(&names)
    }

    fn render(&self, names: &[String]) -> String {
        let num = Self::side(&self.plus, names);
        let den = Self::side(&self.minus, names);
        let den_terms = self.minus.iter().filter(|&&e| e != 0).count();
        if den == "1" {
            num
        } else if den_terms > 1 {
            format!("{num}/({den})")
        } else {
            format!("{num}/{den}")
        }
    }
}

/// One odds-ratio specification per basis row.
pub fn odds_ratio_specs(basis: &KernelBasis) -> Vec<OddsRatioSpec> {
    basis.rows().iter().map(|d| OddsRatioSpec::from_row(d)).collect()
}

/// `D log p`; the caller tests max |residual| against a membership tolerance.
pub fn membership_residuals(p: &Distribution, basis: &KernelBasis) -> Result<Vec<f64>, ModelError> {
    let log_p = p.log()?;
    Ok(basis.log_residuals(&log_p))
}

/// Solves a dense symmetric positive definite system by Gaussian elimination
/// with partial pivoting. Returns None for a singular system.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r1, &r2| {
            a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap()
        })?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let (pivot_rows, rest) = a.split_at_mut(col + 1);
        let pivot_row = &pivot_rows[col];
        let (b_pivot, b_rest) = b.split_at_mut(col + 1);
        for (row, rhs) in rest.iter_mut().zip(b_rest.iter_mut()) {
            let f = row[col] / pivot_row[col];
            if f == 0.0 {
                continue;
            }
            for (x, p) in row.iter_mut().zip(pivot_row).skip(col) {
                *x -= f * p;
            }
            *rhs -= f * b_pivot[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Least-squares solve of `log p = A' theta` for a matrix with full row rank.
fn solve_log_linear(rows: &[Vec<i64>], log_p: &[f64]) -> Option<(Vec<f64>, f64)> {
    let j = rows.len();
    let gram: Vec<Vec<f64>> = (0..j)
        .map(|r| {
            (0..j)
                .map(|c| exact::dot(&rows[r], &rows[c]) as f64)
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = rows
        .iter()
        .map(|row| row.iter().zip(log_p).map(|(&a, &l)| a as f64 * l).sum())
        .collect();
    let theta = solve_dense(gram, rhs)?;
    let residual = (0..log_p.len())
        .map(|i| {
            let fitted: f64 = rows.iter().zip(&theta).map(|(row, t)| row[i] as f64 * t).sum();
            (fitted - log_p[i]).abs()
        })
        .fold(0.0, f64::max);
    Some((theta, residual))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearParams {
    /// Coefficients for the model's own rows.
    pub theta: Vec<f64>,
    /// Coefficient of the all-ones direction, when the overall effect is
    /// present: log p = theta0 1 + (basis completion)' theta.
    pub theta0: Option<f64>,
    /// Max-norm residual of the least-squares solve.
    pub residual: f64,
}

/// Log-linear parameters of a strictly positive member of the model.
///
/// Fails with `NotInModel` when the solve residual exceeds `tol`.
pub fn log_linear_params(
    p: &Distribution,
    model: &ModelMatrix,
    tol: f64,
) -> Result<LogLinearParams, ModelError> {
    let log_p = p.log()?;
    let (theta, residual) = solve_log_linear(model.rows(), &log_p)
        .ok_or(ModelError::RankDeficient {
            rows: model.n_rows(),
            rank: 0,
        })?;
    if residual > tol {
        return Err(ModelError::NotInModel { residual, tol });
    }
    let theta0 = if has_overall_effect(model) {
        let ones = vec![vec![1i64; model.n_cells()]];
        let kept = exact::greedy_independent(&ones, model.rows());
        let mut basis = ones;
        for idx in kept {
            basis.push(model.row(idx).to_vec());
        }
        let (coeffs, _) = solve_log_linear(&basis, &log_p).expect("basis has full row rank");
        Some(coeffs[0])
    } else {
        None
    };
    Ok(LogLinearParams {
        theta,
        theta0,
        residual,
    })
}
