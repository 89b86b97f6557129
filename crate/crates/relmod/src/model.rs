//! Model matrices, sample spaces and probability distributions.

use crate::exact;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("matrix entry at row {row}, column {col} is {value}; entries must be 0 or 1")]
    NonBinaryEntry { row: usize, col: usize, value: i64 },
    #[error("cell {0} carries no parameter (zero column)")]
    ZeroColumn(usize),
    #[error("matrix has {rows} rows but rank {rank}; rows must be linearly independent")]
    RankDeficient { rows: usize, rank: usize },
    #[error("matrix rows have inconsistent lengths")]
    RaggedMatrix,
    #[error("{count} cell labels supplied for {cols} matrix columns")]
    LabelCountMismatch { count: usize, cols: usize },
    #[error("duplicate cell label {0:?}")]
    DuplicateLabel(String),
    #[error("sample space must have at least two cells")]
    TooFewCells,
    #[error("matrix must have at least one row")]
    NoRows,
    #[error("model already has the overall effect")]
    AlreadyHasOverallEffect,
    #[error("probability vector does not sum to one (sum = {0})")]
    NotNormalized(f64),
    #[error("probability at cell {0} is negative")]
    NegativeProbability(usize),
    #[error("probability at cell {cell} is not strictly positive ({value})")]
    NonPositiveProbability { cell: usize, value: f64 },
    #[error("distribution has {len} entries but the sample space has {cells} cells")]
    LengthMismatch { len: usize, cells: usize },
    #[error("log-linear solve residual {residual:.3e} exceeds tolerance {tol:.3e}; distribution is not in the model")]
    NotInModel { residual: f64, tol: f64 },
}

/// Ordered cell labels of a (possibly incomplete) discrete sample space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSpace {
    labels: Vec<String>,
}

impl SampleSpace {
    pub fn new(labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.len() < 2 {
            return Err(ModelError::TooFewCells);
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(ModelError::DuplicateLabel(l.clone()));
            }
        }
        Ok(SampleSpace { labels })
    }

    /// Labels "c1", "c2", ... for anonymous cells.
    pub fn numbered(n: usize) -> Self {
        SampleSpace {
            labels: (1..=n).map(|i| format!("c{i}")).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, cell: usize) -> &str {
        &self.labels[cell]
    }
}

/// A validated J x I model matrix with 0-1 entries, no zero column and full
/// row rank, together with its sample space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrix {
    entries: Vec<Vec<i64>>,
    space: SampleSpace,
    name: Option<String>,
}

/// Validates `entries` against `labels` and returns the model matrix.
///
/// Reported cell and row indices are 1-based.
pub fn validate_model(entries: Vec<Vec<i64>>, labels: Vec<String>) -> Result<ModelMatrix, ModelError> {
    ModelMatrix::new(entries, SampleSpace::new(labels)?)
}

impl ModelMatrix {
    pub fn new(entries: Vec<Vec<i64>>, space: SampleSpace) -> Result<Self, ModelError> {
        if entries.is_empty() {
            return Err(ModelError::NoRows);
        }
        let cols = entries[0].len();
        if entries.iter().any(|r| r.len() != cols) {
            return Err(ModelError::RaggedMatrix);
        }
        if space.len() != cols {
            return Err(ModelError::LabelCountMismatch {
                count: space.len(),
                cols,
            });
        }
        for (j, row) in entries.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if v != 0 && v != 1 {
                    return Err(ModelError::NonBinaryEntry {
                        row: j + 1,
                        col: i + 1,
                        value: v,
                    });
                }
            }
        }
        let rank = exact::rank(&entries);
        if rank != entries.len() {
            return Err(ModelError::RankDeficient {
                rows: entries.len(),
                rank,
            });
        }
        for i in 0..cols {
            if entries.iter().all(|r| r[i] == 0) {
                return Err(ModelError::ZeroColumn(i + 1));
            }
        }
        Ok(ModelMatrix {
            entries,
            space,
            name: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Number of rows J.
    pub fn n_rows(&self) -> usize {
        self.entries.len()
    }

    /// Number of cells I.
    pub fn n_cells(&self) -> usize {
        self.space.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.entries
    }

    pub fn row(&self, j: usize) -> &[i64] {
        &self.entries[j]
    }

    pub fn column(&self, i: usize) -> Vec<i64> {
        self.entries.iter().map(|r| r[i]).collect()
    }

    pub fn space(&self) -> &SampleSpace {
        &self.space
    }

    /// Cells whose parameter set includes row `j`.
    pub fn row_support(&self, j: usize) -> Vec<usize> {
        (0..self.n_cells()).filter(|&i| self.entries[j][i] == 1).collect()
    }

    /// Subset sums `A v`.
    pub fn subset_sums(&self, v: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(v).map(|(&a, &x)| a as f64 * x).sum())
            .collect()
    }

    /// J = I: the model places no restriction beyond positivity.
    pub fn is_saturated(&self) -> bool {
        self.n_rows() == self.n_cells()
    }
}

/// True iff the all-ones vector lies in the row space of the model matrix,
/// decided in exact rational arithmetic.
pub fn has_overall_effect(model: &ModelMatrix) -> bool {
    let ones = vec![1i64; model.n_cells()];
    exact::in_row_space(model.rows(), &ones)
}

/// A probability distribution on the sample space.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
    strictly_positive: bool,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, ModelError> {
        for (i, &p) in probs.iter().enumerate() {
            if p < 0.0 || !p.is_finite() {
                return Err(ModelError::NegativeProbability(i + 1));
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ModelError::NotNormalized(sum));
        }
        let strictly_positive = probs.iter().all(|&p| p > 0.0);
        Ok(Distribution {
            probs,
            strictly_positive,
        })
    }

    /// Normalizes nonnegative weights with positive total.
    pub fn from_weights(weights: &[f64]) -> Result<Self, ModelError> {
        for (i, &w) in weights.iter().enumerate() {
            if w < 0.0 || !w.is_finite() {
                return Err(ModelError::NegativeProbability(i + 1));
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(ModelError::NotNormalized(total));
        }
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let strictly_positive = probs.iter().all(|&p| p > 0.0);
        Ok(Distribution {
            probs,
            strictly_positive,
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    pub fn log(&self) -> Result<Vec<f64>, ModelError> {
        for (i, &p) in self.probs.iter().enumerate() {
            if p <= 0.0 {
                return Err(ModelError::NonPositiveProbability {
                    cell: i + 1,
                    value: p,
                });
            }
        }
        Ok(self.probs.iter().map(|p| p.ln()).collect())
    }
}

/// Observed frequencies (or probabilities) on the sample space.
#[derive(Debug, Clone, PartialEq)]
pub struct Observed {
    counts: Vec<f64>,
    q: Distribution,
    support: Vec<usize>,
    total: f64,
}

impl Observed {
    pub fn new(counts: Vec<f64>) -> Result<Self, ModelError> {
        let q = Distribution::from_weights(&counts)?;
        let total = counts.iter().sum();
        let support = (0..counts.len()).filter(|&i| counts[i] > 0.0).collect();
        Ok(Observed {
            counts,
            q,
            support,
            total,
        })
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    /// Normalized observed distribution q = counts / total.
    pub fn q(&self) -> &Distribution {
        &self.q
    }

    /// 0-based indices of the cells with positive count.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}
