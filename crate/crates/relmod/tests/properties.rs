//! Property tests for the structural invariants of the dual representation.

use proptest::prelude::*;
use relmod::exact;
use relmod::io::{model_from_str, model_to_value};
use relmod::kernel::{kernel_basis, odds_ratio_specs};
use relmod::model::{has_overall_effect, validate_model, Distribution};

fn labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("c{i}")).collect()
}

fn model_and_weights() -> impl Strategy<Value = (Vec<Vec<i64>>, Vec<f64>)> {
    (4usize..=9)
        .prop_flat_map(|cells| {
            (
                proptest::collection::vec(
                    proptest::collection::vec(0i64..=1, cells),
                    2..=cells - 2,
                ),
                proptest::collection::vec(0.05f64..1.0, cells),
            )
        })
        .prop_filter("valid model", |(entries, _)| {
            validate_model(entries.clone(), labels(entries[0].len())).is_ok()
        })
}

proptest! {
    #[test]
    fn kernel_basis_annihilates_and_has_full_rank((entries, _) in model_and_weights()) {
        let cells = entries[0].len();
        let model = validate_model(entries, labels(cells)).unwrap();
        let basis = kernel_basis(&model);
        prop_assert_eq!(basis.k(), cells - model.n_rows());
        for d in basis.rows() {
            for row in model.rows() {
                prop_assert_eq!(exact::dot(row, d), 0);
            }
        }
        if !basis.is_empty() {
            prop_assert_eq!(exact::rank(basis.rows()), basis.k());
        }

        let sums: Vec<i64> = basis.rows().iter().map(|r| r.iter().sum()).collect();
        if has_overall_effect(&model) {
            prop_assert!(sums.iter().all(|&s| s == 0));
        } else {
            prop_assert_eq!(sums.iter().filter(|&&s| s != 0).count(), 1);
            prop_assert!(sums[0] < 0);
        }
    }

    #[test]
    fn odds_ratio_evaluation_matches_log_form((entries, weights) in model_and_weights()) {
        let cells = entries[0].len();
        let model = validate_model(entries, labels(cells)).unwrap();
        let p = Distribution::from_weights(&weights).unwrap();
        let log_p = p.log().unwrap();
        for spec in odds_ratio_specs(&kernel_basis(&model)) {
            let direct = spec.evaluate(p.probs());
            let via_log: f64 = spec
                .row()
                .iter()
                .zip(&log_p)
                .map(|(&c, &l)| c as f64 * l)
                .sum::<f64>()
                .exp();
            let scale = direct.abs().max(via_log.abs()).max(1.0);
            prop_assert!(
                (direct - via_log).abs() <= 1e-10 * scale,
                "{direct} vs {via_log}"
            );
        }
    }

    #[test]
    fn members_pass_both_representations((entries, weights) in model_and_weights()) {
        // Build a family member from an arbitrary parameter vector by
        // sliding it along the all-ones direction until the mass is one;
        // the dual (membership) and primal (log-linear solve) views agree.
        let cells = entries[0].len();
        let model = validate_model(entries, labels(cells)).unwrap();
        let theta: Vec<f64> = weights[..model.n_rows()].iter().map(|w| w - 0.5).collect();
        let mass = |shift: f64| -> f64 {
            (0..cells)
                .map(|i| {
                    let e: f64 = model
                        .rows()
                        .iter()
                        .zip(&theta)
                        .map(|(row, &t)| row[i] as f64 * (t + shift))
                        .sum();
                    e.exp()
                })
                .sum()
        };
        let (mut lo, mut hi) = (-60.0f64, 60.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mass(mid) > 1.0 { hi = mid } else { lo = mid }
        }
        let shift = 0.5 * (lo + hi);
        let member: Vec<f64> = (0..cells)
            .map(|i| {
                let e: f64 = model
                    .rows()
                    .iter()
                    .zip(&theta)
                    .map(|(row, &t)| row[i] as f64 * (t + shift))
                    .sum();
                e.exp()
            })
            .collect();
        let p = Distribution::from_weights(&member).unwrap();
        let residuals =
            relmod::kernel::membership_residuals(&p, &kernel_basis(&model)).unwrap();
        let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        prop_assert!(max <= 1e-8, "membership residual {max}");
        let params = relmod::kernel::log_linear_params(&p, &model, 1e-8).unwrap();
        prop_assert!(params.residual <= 1e-8);
    }

    #[test]
    fn model_json_round_trips((entries, _) in model_and_weights()) {
        let cells = entries[0].len();
        let model = validate_model(entries, labels(cells)).unwrap().with_name("prop");
        let text = model_to_value(&model).to_string();
        let again = model_from_str(&text, "roundtrip").unwrap();
        prop_assert_eq!(model.rows(), again.rows());
        prop_assert_eq!(model.space().labels(), again.space().labels());
    }
}
