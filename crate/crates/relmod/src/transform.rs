//! Adding and removing the overall effect, and homogenization by
//! sample-space augmentation.

use crate::exact;
use crate::kernel::{kernel_basis, KernelBasis};
use crate::model::{has_overall_effect, ModelError, ModelMatrix, SampleSpace};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("model already has the overall effect")]
    AlreadyHasOverallEffect,
    #[error("model does not have the overall effect")]
    NoOverallEffect,
    #[error("no 0-1 row-equivalent exposure of the all-ones row was found")]
    NonBinaryReduction,
    #[error("removing the overall effect leaves no proper model ({0})")]
    DegenerateReduction(ModelError),
    #[error("model has the overall effect, so there is no non-homogeneous constraint to homogenize")]
    NoNonHomogeneousConstraint,
    #[error("degree gap of the non-homogeneous constraint is {0}, not 1; single-variable homogenization is unavailable")]
    DegreeGapNotOne(i64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Prepends the all-ones row, turning the curved family into the smallest
/// regular exponential family containing it.
///
/// When J + 1 = I the returned model is valid but saturated (empty kernel).
pub fn add_overall(model: &ModelMatrix) -> Result<ModelMatrix, TransformError> {
    if has_overall_effect(model) {
        return Err(TransformError::AlreadyHasOverallEffect);
    }
    let mut entries = vec![vec![1i64; model.n_cells()]];
    entries.extend(model.rows().iter().cloned());
    let augmented = ModelMatrix::new(entries, model.space().clone())?;
    Ok(match model.name() {
        Some(name) => augmented.with_name(format!("{name}-bar")),
        None => augmented,
    })
}

/// Outcome of removing the overall effect.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    /// The reduced model on the surviving cells.
    pub reduced: ModelMatrix,
    /// 0-based indices of the removed cells: cells whose only parameter
    /// was the overall effect.
    pub removed_cells: Vec<usize>,
    /// Kernel basis of the reduced model, derived from the original basis by
    /// deleting the removed columns and dropping redundant rows.
    pub reduced_basis: KernelBasis,
    /// Whether dim Ker(A1) = dim Ker(A1-bar) - I0 + 1 held.
    pub dimension_check: bool,
}

impl ReductionReport {
    /// |I_0|, the number of removed cells.
    pub fn removed_count(&self) -> usize {
        self.removed_cells.len()
    }
}

/// Removes the overall effect: exposes an all-ones row, deletes it, and drops
/// the cells whose columns become zero.
///
/// The exposure keeps original matrix rows: the all-ones vector is extended
/// to a row-space basis by a greedy scan over the rows in order, so the
/// remaining rows are 0-1 by construction.
pub fn remove_overall(model: &ModelMatrix) -> Result<ReductionReport, TransformError> {
    if !has_overall_effect(model) {
        return Err(TransformError::NoOverallEffect);
    }
    let cells = model.n_cells();
    let ones = vec![vec![1i64; cells]];
    let kept = exact::greedy_independent(&ones, model.rows());
    let remaining: Vec<Vec<i64>> = kept.iter().map(|&j| model.row(j).to_vec()).collect();

    let removed_cells: Vec<usize> = (0..cells)
        .filter(|&i| remaining.iter().all(|r| r[i] == 0))
        .collect();
    let survivors: Vec<usize> = (0..cells).filter(|i| !removed_cells.contains(i)).collect();

    let reduced_entries: Vec<Vec<i64>> = remaining
        .iter()
        .map(|r| survivors.iter().map(|&i| r[i]).collect())
        .collect();
    let reduced_labels: Vec<String> = survivors
        .iter()
        .map(|&i| model.space().label(i).to_string())
        .collect();
    if reduced_entries.is_empty() || reduced_labels.len() < 2 {
        return Err(TransformError::DegenerateReduction(ModelError::TooFewCells));
    }
    let reduced = ModelMatrix::new(reduced_entries, SampleSpace::new(reduced_labels)?)
        .map_err(TransformError::DegenerateReduction)?;
    let reduced = match model.name() {
        Some(name) => reduced.with_name(format!("{name}-reduced")),
        None => reduced,
    };

    let reduced_basis = derive_reduced_basis(model, &reduced, &removed_cells, &survivors);
    let expected_k = kernel_basis(model).k() + 1 - removed_cells.len();
    let dimension_check = reduced_basis.k() == expected_k;

    Ok(ReductionReport {
        reduced,
        removed_cells,
        reduced_basis,
        dimension_check,
    })
}

/// Projects the original kernel basis onto the surviving cells, drops the
/// redundant rows by a greedy rank-preserving scan, and tops up with fresh
/// kernel vectors when the projection alone does not span (this happens
/// exactly when no cell was removed). The result is re-canonicalized.
fn derive_reduced_basis(
    original: &ModelMatrix,
    reduced: &ModelMatrix,
    removed: &[usize],
    survivors: &[usize],
) -> KernelBasis {
    let original_basis = kernel_basis(original);
    let projected: Vec<Vec<i64>> = original_basis
        .rows()
        .iter()
        .map(|d| survivors.iter().map(|&i| d[i]).collect())
        .collect();
    let kept = exact::greedy_independent(&[], &projected);
    let mut rows: Vec<Vec<i64>> = kept.iter().map(|&i| projected[i].clone()).collect();
    debug_assert!(removed.is_empty() || rows.len() == projected.len() - (removed.len() - 1));

    let target_k = reduced.n_cells() - reduced.n_rows();
    if rows.len() < target_k {
        let fresh = kernel_basis(reduced);
        for extra in exact::greedy_independent(&rows, fresh.rows()) {
            rows.push(fresh.rows()[extra].clone());
            if rows.len() == target_k {
                break;
            }
        }
    }
    crate::kernel::canonicalize(rows)
}

/// Augments the sample space with a leading "no feature present" cell that
/// carries only the overall effect:
///
/// ```text
/// A0 = | 1  1' |
///      | 0  A  |
/// ```
///
/// Requires the canonical non-homogeneous kernel row to satisfy d1' 1 = -1,
/// so that a single new variable homogenizes the defining constraints.
pub fn homogenize(model: &ModelMatrix) -> Result<ModelMatrix, TransformError> {
    if has_overall_effect(model) {
        return Err(TransformError::NoNonHomogeneousConstraint);
    }
    let basis = kernel_basis(model);
    let gap = basis
        .d1_dot_one()
        .expect("a model without the overall effect has a non-homogeneous kernel row");
    if gap != -1 {
        return Err(TransformError::DegreeGapNotOne(gap));
    }
    let cells = model.n_cells();
    let mut entries = Vec::with_capacity(model.n_rows() + 1);
    entries.push(vec![1i64; cells + 1]);
    for row in model.rows() {
        let mut r = vec![0i64];
        r.extend_from_slice(row);
        entries.push(r);
    }
    let mut labels = vec![zero_cell_label(model.space())];
    labels.extend(model.space().labels().iter().cloned());
    let homogenized = ModelMatrix::new(entries, SampleSpace::new(labels)?)?;
    Ok(match model.name() {
        Some(name) => homogenized.with_name(format!("{name}-homogenized")),
        None => homogenized,
    })
}

/// Label for the augmented all-zeros cell: a run of '0' matching the label
/// width when all labels share one, otherwise "0"; extended until unique.
fn zero_cell_label(space: &SampleSpace) -> String {
    let width = space.labels().first().map(|l| l.chars().count()).unwrap_or(1);
    let uniform = space.labels().iter().all(|l| l.chars().count() == width);
    let mut label = "0".repeat(if uniform { width } else { 1 });
    while space.labels().iter().any(|l| l == &label) {
        label.insert(0, '0');
    }
    label
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::odds_ratio_specs;
    use crate::model::validate_model;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("c{i}")).collect()
    }

    fn example_2_1() -> ModelMatrix {
        validate_model(vec![vec![1, 1, 1, 0], vec![0, 0, 1, 1]], labels(4)).unwrap()
    }

    fn crabs() -> ModelMatrix {
        validate_model(
            vec![vec![1, 0, 1], vec![0, 1, 1]],
            vec!["10".into(), "01".into(), "11".into()],
        )
        .unwrap()
    }

    #[test]
    fn add_overall_prepends_ones_row() {
        let a_bar = add_overall(&example_2_1()).unwrap();
        assert_eq!(
            a_bar.rows(),
            &[vec![1, 1, 1, 1], vec![1, 1, 1, 0], vec![0, 0, 1, 1]]
        );
        assert!(has_overall_effect(&a_bar));
        // The dual of the augmented model drops the non-homogeneous ratio.
        let basis = kernel_basis(&a_bar);
        let specs = odds_ratio_specs(&basis);
        assert_eq!(specs.len(), 1);
        assert!(specs[0].homogeneous);
        assert_eq!(specs[0].to_index_string(), "p2/p1");
    }

    #[test]
    fn add_overall_rejects_regular_models() {
        let a_bar = add_overall(&example_2_1()).unwrap();
        assert!(matches!(
            add_overall(&a_bar),
            Err(TransformError::AlreadyHasOverallEffect)
        ));
    }

    #[test]
    fn add_overall_may_saturate() {
        let crabs_bar = add_overall(&crabs()).unwrap();
        assert!(crabs_bar.is_saturated());
        assert!(kernel_basis(&crabs_bar).is_empty());
    }

    #[test]
    fn remove_overall_example_1() {
        let a1_bar = validate_model(
            vec![
                vec![1, 1, 1, 1, 1, 1],
                vec![1, 0, 1, 0, 0, 0],
                vec![0, 1, 1, 1, 0, 0],
            ],
            labels(6),
        )
        .unwrap();
        let report = remove_overall(&a1_bar).unwrap();
        assert_eq!(report.removed_cells, vec![4, 5]);
        assert_eq!(
            report.reduced.rows(),
            &[vec![1, 0, 1, 0], vec![0, 1, 1, 1]]
        );
        assert!(report.dimension_check);
        assert_eq!(report.reduced_basis.k(), 2);
        // Reduced dual: one non-homogeneous ratio p3/(p1 p2) and one
        // homogeneous ratio between p2 and p4.
        let specs = odds_ratio_specs(&report.reduced_basis);
        let nonhom: Vec<String> = specs
            .iter()
            .filter(|s| !s.homogeneous)
            .map(|s| s.to_index_string())
            .collect();
        assert_eq!(nonhom, vec!["p3/(p1*p2)"]);
        let hom: Vec<Vec<i64>> = specs
            .iter()
            .filter(|s| s.homogeneous)
            .map(|s| s.row())
            .collect();
        assert_eq!(hom.len(), 1);
        let h = &hom[0];
        assert!(h == &vec![0, 1, 0, -1] || h == &vec![0, -1, 0, 1]);
    }

    #[test]
    fn remove_overall_example_2() {
        let a1_bar = validate_model(
            vec![vec![1, 1, 1, 1], vec![1, 1, 1, 0], vec![1, 0, 1, 0]],
            labels(4),
        )
        .unwrap();
        let report = remove_overall(&a1_bar).unwrap();
        assert_eq!(report.removed_cells, vec![3]);
        assert_eq!(report.reduced.rows(), &[vec![1, 1, 1], vec![1, 0, 1]]);
        assert!(has_overall_effect(&report.reduced));
        // The dual constraint p1/p3 = 1 is unchanged.
        let specs = odds_ratio_specs(&report.reduced_basis);
        assert_eq!(specs.len(), 1);
        assert!(specs[0].homogeneous);
        let row = specs[0].row();
        assert!(row == vec![1, 0, -1] || row == vec![-1, 0, 1]);
    }

    #[test]
    fn remove_overall_wider_example_2() {
        let a1_bar = validate_model(
            vec![
                vec![1, 1, 1, 1, 1, 1],
                vec![1, 1, 1, 0, 0, 0],
                vec![1, 0, 1, 0, 0, 0],
            ],
            labels(6),
        )
        .unwrap();
        let report = remove_overall(&a1_bar).unwrap();
        assert_eq!(report.removed_cells, vec![3, 4, 5]);
        assert_eq!(report.reduced.rows(), &[vec![1, 1, 1], vec![1, 0, 1]]);
        assert!(report.dimension_check);
    }

    #[test]
    fn remove_overall_requires_overall_effect() {
        assert!(matches!(
            remove_overall(&example_2_1()),
            Err(TransformError::NoOverallEffect)
        ));
    }

    #[test]
    fn remove_after_add_recovers_model() {
        let model = example_2_1();
        let report = remove_overall(&add_overall(&model).unwrap()).unwrap();
        assert!(report.removed_cells.is_empty());
        assert_eq!(report.reduced.rows(), model.rows());
        assert!(report.dimension_check);
        // The derived basis spans Ker(A).
        let direct = kernel_basis(&model);
        let mut all = report.reduced_basis.rows().to_vec();
        all.extend(direct.rows().iter().cloned());
        assert_eq!(exact::rank(&all), direct.k());
        assert_eq!(report.reduced_basis.k(), direct.k());
    }

    #[test]
    fn homogenize_crabs_gives_two_by_two_independence() {
        let a0 = homogenize(&crabs()).unwrap();
        assert_eq!(
            a0.rows(),
            &[vec![1, 1, 1, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1]]
        );
        assert_eq!(
            a0.space().labels(),
            &["00".to_string(), "10".into(), "01".into(), "11".into()]
        );
        assert!(has_overall_effect(&a0));
    }

    #[test]
    fn homogenize_rejects_overall_effect_models() {
        let a_bar = add_overall(&example_2_1()).unwrap();
        assert!(matches!(
            homogenize(&a_bar),
            Err(TransformError::NoNonHomogeneousConstraint)
        ));
    }

    #[test]
    fn homogenize_requires_unit_degree_gap() {
        // Kernel spanned by (1,1,1,-1): the degree gap is 2.
        let m = validate_model(
            vec![vec![1, 0, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1]],
            labels(4),
        )
        .unwrap();
        assert!(!has_overall_effect(&m));
        match homogenize(&m) {
            Err(TransformError::DegreeGapNotOne(gap)) => assert_eq!(gap, -2),
            other => panic!("expected DegreeGapNotOne, got {other:?}"),
        }
    }

    #[test]
    fn dehomogenize_inverts_homogenize() {
        let model = crabs();
        let a0 = homogenize(&model).unwrap();
        let report = remove_overall(&a0).unwrap();
        assert_eq!(report.removed_cells, vec![0]);
        assert_eq!(report.reduced.rows(), model.rows());
        assert_eq!(report.reduced.space(), model.space());
    }
}
