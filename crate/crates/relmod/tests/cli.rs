//! End-to-end checks of the command-line interface against the bundled
//! model and data files.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data_file(rel: &str) -> String {
    format!("{}/data/{rel}", env!("CARGO_MANIFEST_DIR"))
}

fn relmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relmod"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> Value {
    let out = relmod(args);
    assert!(
        out.status.success(),
        "relmod {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("relmod-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn inspect_reports_dual_representation() {
    let v = run_json(&["inspect", "--model", &data_file("models/example2-1.json")]);
    assert_eq!(v["I"], 4);
    assert_eq!(v["J"], 2);
    assert_eq!(v["K"], 2);
    assert_eq!(v["overall_effect"], false);
    let ratios = v["odds_ratios"].as_array().unwrap();
    let nonhom: Vec<&str> = ratios
        .iter()
        .filter(|r| !r["homogeneous"].as_bool().unwrap())
        .map(|r| r["ratio"].as_str().unwrap())
        .collect();
    assert_eq!(nonhom, vec!["p3/(p1*p4)"]);
}

#[test]
fn inspect_elp_shows_loss_constraints() {
    let v = run_json(&["inspect", "--model", &data_file("models/elp.json")]);
    assert_eq!(v["K"], 3);
    let ratios = v["odds_ratios"].as_array().unwrap();
    assert_eq!(ratios.len(), 3);
    let nonhom: Vec<&str> = ratios
        .iter()
        .filter(|r| !r["homogeneous"].as_bool().unwrap())
        .map(|r| r["ratio"].as_str().unwrap())
        .collect();
    // The product constraint "pairwise loss = product of single losses"
    // shows up as the non-homogeneous ratio p4/(p1*p2).
    assert_eq!(nonhom, vec!["p4/(p1*p2)"]);
}

#[test]
fn inspect_csi_separates_contexts() {
    let v = run_json(&["inspect", "--model", &data_file("models/csi.json")]);
    assert_eq!(v["K"], 2);
    let ratios = v["odds_ratios"].as_array().unwrap();
    let homogeneous: Vec<&Value> = ratios
        .iter()
        .filter(|r| r["homogeneous"].as_bool().unwrap())
        .collect();
    assert_eq!(homogeneous.len(), 1);
    // The homogeneous constraint is the conditional odds ratio given X3 = 1:
    // p001 p111 / (p011 p101) = 1, i.e. the kernel vector (1,0,-1,0,-1,0,1)
    // up to sign.
    let plus: Vec<i64> = homogeneous[0]["plus"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_i64().unwrap())
        .collect();
    let minus: Vec<i64> = homogeneous[0]["minus"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_i64().unwrap())
        .collect();
    let row: Vec<i64> = plus.iter().zip(&minus).map(|(p, m)| p - m).collect();
    let expected = vec![1, 0, -1, 0, -1, 0, 1];
    let negated: Vec<i64> = expected.iter().map(|x| -x).collect();
    assert!(row == expected || row == negated, "{row:?}");
}

#[test]
fn fit_reproduces_adjustment_factor() {
    let v = run_json(&[
        "fit",
        "--model",
        &data_file("models/as3.json"),
        "--data",
        &data_file("counts/e7.json"),
    ]);
    let gamma = v["gamma"].as_f64().unwrap();
    assert!((gamma - 0.412599).abs() < 1e-6, "gamma = {gamma}");
    assert_eq!(v["converged"], true);
}

#[test]
fn exists_reports_the_facial_set() {
    let v = run_json(&[
        "exists",
        "--model",
        &data_file("models/as3-bar.json"),
        "--data",
        &data_file("counts/e7.json"),
    ]);
    assert_eq!(v["exists_positive"], false);
    let facial: Vec<u64> = v["facial_set"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(facial, vec![1, 4, 5, 7]);
}

#[test]
fn fit_without_extended_fallback_exits_2() {
    let out = relmod(&[
        "fit",
        "--model",
        &data_file("models/as3-bar.json"),
        "--data",
        &data_file("counts/e7.json"),
        "--extended",
        "off",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fit_with_extended_fallback_returns_point_mass() {
    let v = run_json(&[
        "fit",
        "--model",
        &data_file("models/as3-bar.json"),
        "--data",
        &data_file("counts/e7.json"),
    ]);
    assert_eq!(v["extended"], true);
    let zero_cells: Vec<u64> = v["zero_cells"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(zero_cells, vec![1, 2, 3, 4, 5, 6]);
    let p7 = v["p_hat"].as_array().unwrap()[6].as_f64().unwrap();
    assert!((p7 - 1.0).abs() < 1e-10);
}

#[test]
fn transform_remove_overall_matches_printed_reduction() {
    let v = run_json(&[
        "transform",
        "--model",
        &data_file("models/removeoe-1.json"),
        "--op",
        "remove-overall",
    ]);
    let removed: Vec<u64> = v["report"]["removed_cells"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap())
        .collect();
    assert_eq!(removed, vec![5, 6]);
    assert_eq!(v["report"]["dimension_check"], true);
    assert_eq!(
        v["model"]["matrix"],
        serde_json::json!([[1, 0, 1, 0], [0, 1, 1, 1]])
    );
    let dual_after: Vec<&str> = v["report"]["dual_after"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert!(dual_after.contains(&"p3/(p1*p2) = 1"), "{dual_after:?}");
}

#[test]
fn transform_output_reparses_as_a_model() {
    let out_path = temp_path("crabs-homogenized.json");
    let v = run_json(&[
        "transform",
        "--model",
        &data_file("models/crabs.json"),
        "--op",
        "homogenize",
    ]);
    assert_eq!(
        v["model"]["matrix"],
        serde_json::json!([[1, 1, 1, 1], [0, 1, 0, 1], [0, 0, 1, 1]])
    );
    std::fs::write(&out_path, v["model"].to_string()).unwrap();
    let reparsed = relmod::io::read_model(Path::new(&out_path)).unwrap();
    assert_eq!(
        reparsed.space().labels(),
        &["00".to_string(), "10".into(), "01".into(), "11".into()]
    );
}

#[test]
fn elp_workflow_demonstrates_model_change() {
    // Fit the published (augmented) model, then test the fitted vector
    // against the intended curved model: membership must fail.
    let v = run_json(&[
        "fit",
        "--model",
        &data_file("models/elp-bar.json"),
        "--data",
        &data_file("counts/elp-counts.json"),
    ]);
    assert_eq!(v["gamma"], 1.0);
    let p_hat = v["p_hat"].clone();
    let counts_path = temp_path("elp-fitted.json");
    std::fs::write(
        &counts_path,
        serde_json::json!({ "counts": p_hat }).to_string(),
    )
    .unwrap();
    let check = run_json(&[
        "inspect",
        "--model",
        &data_file("models/elp.json"),
        "--data",
        counts_path.to_str().unwrap(),
    ]);
    assert_eq!(check["membership"]["member"], false);
    let residual = check["membership"]["max_abs_residual"].as_f64().unwrap();
    assert!(residual > 0.5, "residual {residual}");
}

#[test]
fn csv_counts_are_accepted() {
    let csv_path = temp_path("crabs.csv");
    std::fs::write(&csv_path, "cell,count\n10,17\n01,9\n11,23\n").unwrap();
    let v = run_json(&[
        "fit",
        "--model",
        &data_file("models/crabs.json"),
        "--data",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(v["converged"], true);
    let gamma = v["gamma"].as_f64().unwrap();
    assert!(gamma.is_finite() && gamma > 0.0);
}

#[test]
fn oracle_compares_against_solver() {
    let counts_path = temp_path("uniform4.json");
    std::fs::write(&counts_path, r#"{"counts": [1, 1, 1, 1]}"#).unwrap();
    let v = run_json(&[
        "oracle",
        "--model",
        &data_file("models/example2-1.json"),
        "--data",
        counts_path.to_str().unwrap(),
        "--compare",
    ]);
    let diff = v["solver_comparison"]["max_abs_difference"]
        .as_f64()
        .unwrap();
    assert!(diff < 1e-4, "oracle vs solver: {diff}");
}

#[test]
fn table_format_is_human_readable() {
    let out = relmod(&[
        "inspect",
        "--model",
        &data_file("models/example2-1.json"),
        "--format",
        "table",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("overall effect false"));
    assert!(text.contains("p3/(p1*p4) = 1"));
}

#[test]
fn unreachable_tolerance_exits_3() {
    // A tolerance below the floating-point floor cannot be met; the solver
    // reports no convergence instead of returning a silent result.
    let out = relmod(&[
        "fit",
        "--model",
        &data_file("models/as3.json"),
        "--data",
        &data_file("counts/e7.json"),
        "--tol-inner",
        "1e-30",
        "--tol-outer",
        "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let out = relmod(&[
        "fit",
        "--model",
        &data_file("models/as3.json"),
        "--data",
        &data_file("counts/e7.json"),
        "--algorithm",
        "downhill",
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("downhill"));
}
