//! File formats and machine-readable reports.
//!
//! Models travel as JSON objects `{name, cells, matrix, description?}`.
//! Frequency data is JSON `{"counts": [...]}` (aligned to the model's cell
//! order) or CSV with one `cell,count` line per cell, matched by label.
//! All cell indices in emitted reports are 1-based.

use crate::exact::Rational;
use crate::facial::ExistenceReport;
use crate::fit::MleResult;
use crate::kernel::{kernel_basis, membership_residuals, odds_ratio_specs};
use crate::model::{has_overall_effect, validate_model, ModelError, ModelMatrix, Observed, SampleSpace};
use crate::oracle::OracleResult;
use crate::transform::ReductionReport;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON in {path}: {source}")]
    Json {
        path: String,
        source: serde_json::Error,
    },
    #[error("invalid CSV in {path}: {message}")]
    Csv { path: String, message: String },
    #[error("{path}: {source}")]
    Invalid { path: String, source: ModelError },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub cells: Vec<String>,
    pub matrix: Vec<Vec<i64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CountsFile {
    counts: Vec<f64>,
}

pub fn model_from_str(text: &str, origin: &str) -> Result<ModelMatrix, IoError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|source| IoError::Json {
        path: origin.to_string(),
        source,
    })?;
    let model = validate_model(file.matrix, file.cells).map_err(|source| IoError::Invalid {
        path: origin.to_string(),
        source,
    })?;
    Ok(model.with_name(file.name))
}

pub fn read_model(path: &Path) -> Result<ModelMatrix, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    model_from_str(&text, &path.display().to_string())
}

pub fn model_to_value(model: &ModelMatrix) -> Value {
    json!({
        "name": model.name().unwrap_or("model"),
        "cells": model.space().labels(),
        "matrix": model.rows(),
    })
}

fn counts_from_csv(text: &str, space: &SampleSpace, origin: &str) -> Result<Vec<f64>, IoError> {
    let mut by_label: Vec<Option<f64>> = vec![None; space.len()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (label, value) = line.split_once(',').ok_or_else(|| IoError::Csv {
            path: origin.to_string(),
            message: format!("line {}: expected `cell,count`", lineno + 1),
        })?;
        let label = label.trim();
        if lineno == 0 && label.eq_ignore_ascii_case("cell") {
            continue;
        }
        let idx = space
            .labels()
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| IoError::Csv {
                path: origin.to_string(),
                message: format!("line {}: unknown cell {label:?}", lineno + 1),
            })?;
        if by_label[idx].is_some() {
            return Err(IoError::Csv {
                path: origin.to_string(),
                message: format!("line {}: duplicate cell {label:?}", lineno + 1),
            });
        }
        let value: f64 = value.trim().parse().map_err(|_| IoError::Csv {
            path: origin.to_string(),
            message: format!("line {}: invalid count {value:?}", lineno + 1),
        })?;
        by_label[idx] = Some(value);
    }
    by_label
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| IoError::Csv {
                path: origin.to_string(),
                message: format!("missing count for cell {:?}", space.label(i)),
            })
        })
        .collect()
}

/// Reads observed counts from a JSON (`{"counts": [...]}` or a bare array)
/// or CSV file, returning them aligned to the model's cell order.
pub fn read_counts(path: &Path, space: &SampleSpace) -> Result<Observed, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let origin = path.display().to_string();
    let counts = if path.extension().map(|e| e == "csv").unwrap_or(false) {
        counts_from_csv(&text, space, &origin)?
    } else {
        match serde_json::from_str::<CountsFile>(&text) {
            Ok(f) => f.counts,
            Err(_) => serde_json::from_str::<Vec<f64>>(&text).map_err(|source| IoError::Json {
                path: origin.clone(),
                source,
            })?,
        }
    };
    if counts.len() != space.len() {
        return Err(IoError::Invalid {
            path: origin,
            source: ModelError::LengthMismatch {
                len: counts.len(),
                cells: space.len(),
            },
        });
    }
    Observed::new(counts).map_err(|source| IoError::Invalid {
        path: path.display().to_string(),
        source,
    })
}

fn one_based(indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|&i| i + 1).collect()
}

fn rational_strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(|v| v.to_string()).collect()
}

fn rational_floats(values: &[Rational]) -> Vec<f64> {
    values.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Structural report: dimensions, overall effect, kernel basis, odds ratios.
pub fn inspect_report(model: &ModelMatrix, membership: Option<(&Observed, f64)>) -> Value {
    let basis = kernel_basis(model);
    let specs = odds_ratio_specs(&basis);
    let ratios: Vec<Value> = specs
        .iter()
        .map(|s| {
            json!({
                "ratio": s.to_index_string(),
                "labels": s.to_label_string(model.space()),
                "homogeneous": s.homogeneous,
                "plus": s.plus,
                "minus": s.minus,
            })
        })
        .collect();
    let mut report = json!({
        "name": model.name().unwrap_or("model"),
        "cells": model.space().labels(),
        "I": model.n_cells(),
        "J": model.n_rows(),
        "K": basis.k(),
        "overall_effect": has_overall_effect(model),
        "saturated": model.is_saturated(),
        "kernel_basis": basis.rows(),
        "d1_dot_one": basis.d1_dot_one(),
        "odds_ratios": ratios,
    });
    if let Some((data, tol)) = membership {
        let value = match membership_residuals(data.q(), &basis) {
            Ok(residuals) => {
                let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
                json!({
                    "residuals": residuals,
                    "max_abs_residual": max,
                    "tolerance": tol,
                    "member": max <= tol,
                })
            }
            Err(e) => json!({ "error": e.to_string() }),
        };
        report["membership"] = value;
    }
    report
}

pub fn fit_report(model: &ModelMatrix, result: &MleResult) -> Value {
    json!({
        "model": model.name().unwrap_or("model"),
        "algorithm": result.algorithm,
        "p_hat": result.p_hat.probs(),
        "gamma": result.gamma,
        "theta": result.theta,
        "theta0": result.theta0,
        "converged": result.converged,
        "iterations": {
            "outer": result.iterations.outer,
            "inner_sweeps": result.iterations.inner_sweeps,
        },
        "residuals": {
            "subset_sum": result.residuals.subset_sum,
            "kernel": result.residuals.kernel,
            "normalization": result.residuals.normalization,
        },
        "extended": result.extended,
        "zero_cells": one_based(&result.zero_cells),
        "cross_check": result.cross_check,
    })
}

pub fn exists_report(model: &ModelMatrix, report: &ExistenceReport) -> Value {
    json!({
        "model": model.name().unwrap_or("model"),
        "exists_positive": report.exists_positive,
        "facial_set": report.facial_set.as_ref().map(|f| one_based(f)),
        "minimal_facial_set": report.minimal_facial_set.as_ref().map(|f| one_based(f)),
        "certificate": report.certificate.as_ref().map(|c| rational_strings(c)),
        "certificate_float": report.certificate.as_ref().map(|c| rational_floats(c)),
    })
}

fn dual_strings(model: &ModelMatrix) -> Vec<String> {
    odds_ratio_specs(&kernel_basis(model))
        .iter()
        .map(|s| format!("{} = 1", s.to_index_string()))
        .collect()
}

/// Report for `transform`: the transformed model plus bookkeeping.
pub fn transform_report(original: &ModelMatrix, transformed: &ModelMatrix, reduction: Option<&ReductionReport>) -> Value {
    let mut report = json!({
        "model": model_to_value(transformed),
        "report": {
            "dual_before": dual_strings(original),
            "dual_after": dual_strings(transformed),
            "saturated": transformed.is_saturated(),
            "removed_cells": Value::Null,
            "dimension_check": Value::Null,
        }
    });
    if let Some(r) = reduction {
        report["report"]["removed_cells"] = json!(one_based(&r.removed_cells));
        report["report"]["removed_labels"] = json!(r
            .removed_cells
            .iter()
            .map(|&i| original.space().label(i))
            .collect::<Vec<_>>());
        report["report"]["dimension_check"] = json!(r.dimension_check);
    }
    report
}

pub fn oracle_report(model: &ModelMatrix, result: &OracleResult, fitted: Option<&MleResult>) -> Value {
    let mut report = json!({
        "model": model.name().unwrap_or("model"),
        "p_star": result.p_star.probs(),
        "loglik": result.loglik,
        "theta": result.theta,
        "constraint_residual": result.constraint_residual,
        "starts": result.method_trace.len(),
    });
    if let Some(fit) = fitted {
        let disagreement = result
            .p_star
            .probs()
            .iter()
            .zip(fit.p_hat.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        report["solver_comparison"] = json!({
            "solver_p_hat": fit.p_hat.probs(),
            "max_abs_difference": disagreement,
        });
    }
    report
}

pub fn write_or_print(value: &Value, output: Option<&Path>) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).expect("reports are valid JSON");
    match output {
        Some(path) => std::fs::write(path, text + "\n").map_err(|source| IoError::Write {
            path: path.display().to_string(),
            source,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}
