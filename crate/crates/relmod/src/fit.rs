//! Maximum likelihood fitting.
//!
//! The inner solver is iterative proportional fitting run on the model's
//! 0-1 rows: starting from the all-ones vector, each sweep rescales the
//! cells of one row so that its subset sum matches the target. Every iterate
//! therefore stays of the form exp(A' theta), so the kernel constraints
//! D log p = 0 hold by construction and only the subset sums need watching.
//!
//! For a model without the overall effect the inner solver runs inside an
//! outer scalar search on the adjustment factor gamma:
//!
//! - G-IPF matches A p = gamma A q and drives 1'p - 1 to zero;
//! - G-IPFm matches A-bar p = (1, gamma A q) and drives d1' log p to zero.
//!
//! Both objectives are strictly increasing in gamma, so a geometric bracket
//! expansion from gamma = 1 followed by Brent's method converges.

use crate::facial::{exists_positive, minimal_face};
use crate::kernel::{kernel_basis, log_linear_params};
use crate::model::{has_overall_effect, Distribution, ModelError, ModelMatrix, Observed};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("target component {0} is not strictly positive; the target lies on the cone boundary")]
    TargetOnBoundary(usize),
    #[error("inner solver did not reach tolerance after {sweeps} sweeps (residual {residual:.3e})")]
    InnerNoConvergence { sweeps: usize, residual: f64 },
    #[error("no bracket for the adjustment factor was found")]
    OuterNoBracket,
    #[error("outer search did not converge within {evals} evaluations")]
    OuterNoConvergence { evals: usize },
    #[error("no strictly positive MLE exists for these data; fit the extended model instead")]
    NoPositiveMLE,
    #[error("observed count at cell {0} is zero; G-IPFm requires strictly positive data")]
    ZeroInData(usize),
    #[error("model has the overall effect; the MLE is the fixed-gamma IPF fit (use `fit`)")]
    HasOverallEffect,
    #[error("model lacks the overall effect; use G-IPF or G-IPFm (use `fit`)")]
    NoOverallEffect,
    #[error("data vector has {data} entries but the sample space has {cells} cells")]
    SpaceMismatch { data: usize, cells: usize },
    #[error("target vector has {target} entries but the model has {rows} rows")]
    TargetMismatch { target: usize, rows: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Outer-search algorithm selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Auto,
    Gipf,
    Gipfm,
    Both,
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(Algorithm::Auto),
            "gipf" => Ok(Algorithm::Gipf),
            "gipfm" => Ok(Algorithm::Gipfm),
            "both" => Ok(Algorithm::Both),
            other => Err(format!("unknown algorithm {other:?} (expected auto|gipf|gipfm|both)")),
        }
    }
}

/// Fallback policy when no strictly positive MLE exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendedMode {
    Auto,
    On,
    Off,
}

impl std::str::FromStr for ExtendedMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "auto" => Ok(ExtendedMode::Auto),
            "on" => Ok(ExtendedMode::On),
            "off" => Ok(ExtendedMode::Off),
            other => Err(format!("unknown extended mode {other:?} (expected auto|on|off)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Max-norm tolerance on the inner subset-sum match.
    pub tol_inner: f64,
    /// Tolerance on the outer objective (1'p - 1 or d1' log p).
    pub tol_outer: f64,
    pub max_inner_sweeps: usize,
    pub max_outer_evals: usize,
    /// Cells falling below this value for `freeze_sweeps` consecutive sweeps
    /// are frozen at zero (extended fitting only).
    pub freeze_threshold: f64,
    pub freeze_sweeps: usize,
    pub algorithm: Algorithm,
    pub extended: ExtendedMode,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol_inner: 1e-10,
            tol_outer: 1e-10,
            max_inner_sweeps: 100_000,
            max_outer_evals: 200,
            freeze_threshold: 1e-12,
            freeze_sweeps: 50,
            algorithm: Algorithm::Auto,
            extended: ExtendedMode::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Iterations {
    pub outer: usize,
    pub inner_sweeps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// max_j |(A p)_j - gamma (A q)_j|
    pub subset_sum: f64,
    /// max_k |d_k' log p| over basis rows supported on the fitted support
    pub kernel: f64,
    /// |1'p - 1|
    pub normalization: f64,
}

#[derive(Debug, Clone)]
pub struct MleResult {
    pub p_hat: Distribution,
    pub gamma: f64,
    pub theta: Option<Vec<f64>>,
    pub theta0: Option<f64>,
    pub iterations: Iterations,
    pub converged: bool,
    pub residuals: Residuals,
    pub extended: bool,
    /// 0-based indices of cells estimated as exactly zero.
    pub zero_cells: Vec<usize>,
    pub algorithm: &'static str,
    /// Max-norm disagreement between G-IPF and G-IPFm when both were run.
    pub cross_check: Option<f64>,
}

/// Row supports plus freezing state: everything IPF needs.
struct IpfProblem {
    supports: Vec<Vec<usize>>,
    n_cells: usize,
}

impl IpfProblem {
    fn from_model(model: &ModelMatrix) -> Self {
        IpfProblem {
            supports: (0..model.n_rows()).map(|j| model.row_support(j)).collect(),
            n_cells: model.n_cells(),
        }
    }

    fn subset_sums(&self, p: &[f64]) -> Vec<f64> {
        self.supports
            .iter()
            .map(|sup| sup.iter().map(|&i| p[i]).sum())
            .collect()
    }
}

struct IpfRun {
    p: Vec<f64>,
    sweeps: usize,
    frozen: Vec<usize>,
}

/// One IPF solve: rescale row by row until the subset sums match `target`.
///
/// `start` must be a point of the exponential manifold (any previous IPF
/// iterate, or the all-ones vector). With `freeze` set, cells that stay
/// below the threshold for the given number of consecutive sweeps are fixed
/// at exactly zero.
fn ipf(
    problem: &IpfProblem,
    target: &[f64],
    start: Vec<f64>,
    tol: f64,
    max_sweeps: usize,
    freeze: Option<(f64, usize)>,
) -> Result<IpfRun, FitError> {
    debug_assert_eq!(target.len(), problem.supports.len());
    for (j, &t) in target.iter().enumerate() {
        if t <= 0.0 || !t.is_finite() {
            return Err(FitError::TargetOnBoundary(j + 1));
        }
    }
    let mut p = start;
    let mut below = vec![0usize; problem.n_cells];
    let mut frozen = vec![false; problem.n_cells];
    let mut residual = f64::INFINITY;
    let mut checkpoint = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        for (j, sup) in problem.supports.iter().enumerate() {
            let s: f64 = sup.iter().map(|&i| p[i]).sum();
            if s <= 0.0 {
                return Err(FitError::InnerNoConvergence {
                    sweeps: sweep,
                    residual: f64::INFINITY,
                });
            }
            let factor = target[j] / s;
            for &i in sup {
                p[i] *= factor;
            }
        }
        if let Some((threshold, patience)) = freeze {
            for i in 0..problem.n_cells {
                if frozen[i] {
                    continue;
                }
                if p[i] < threshold {
                    below[i] += 1;
                    if below[i] >= patience {
                        frozen[i] = true;
                        p[i] = 0.0;
                    }
                } else {
                    below[i] = 0;
                }
            }
        }
        let sums = problem.subset_sums(&p);
        residual = sums
            .iter()
            .zip(target)
            .map(|(s, t)| (s - t).abs())
            .fold(0.0, f64::max);
        if residual <= tol {
            return Ok(IpfRun {
                p,
                sweeps: sweep,
                frozen: (0..problem.n_cells).filter(|&i| frozen[i]).collect(),
            });
        }
        if !residual.is_finite() {
            return Err(FitError::InnerNoConvergence {
                sweeps: sweep,
                residual,
            });
        }
        // Stall detection: an infeasible target keeps the residual pinned
        // away from zero, so bail out instead of burning the sweep budget.
        if sweep % 512 == 0 {
            if residual > 0.0 && residual > checkpoint * 0.9999 {
                return Err(FitError::InnerNoConvergence {
                    sweeps: sweep,
                    residual,
                });
            }
            checkpoint = residual;
        }
    }
    Err(FitError::InnerNoConvergence {
        sweeps: max_sweeps,
        residual,
    })
}

#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub p: Vec<f64>,
    pub sweeps: usize,
}

/// Fixed-target IPF on a model matrix: returns a strictly positive vector p
/// with `model p = target` within `tol_inner` and `log p` in the row space.
///
/// The target must be strictly inside the cone spanned by the columns;
/// a zero component is reported as `TargetOnBoundary` immediately, anything
/// else on the boundary surfaces as `InnerNoConvergence`.
pub fn inner_solve(
    model: &ModelMatrix,
    target: &[f64],
    opts: &FitOptions,
) -> Result<InnerSolution, FitError> {
    if target.len() != model.n_rows() {
        return Err(FitError::TargetMismatch {
            target: target.len(),
            rows: model.n_rows(),
        });
    }
    let problem = IpfProblem::from_model(model);
    let run = ipf(
        &problem,
        target,
        vec![1.0; model.n_cells()],
        opts.tol_inner,
        opts.max_inner_sweeps,
        None,
    )?;
    Ok(InnerSolution {
        p: run.p,
        sweeps: run.sweeps,
    })
}

/// Brent root finder on a bracket [a, b] with f(a) f(b) < 0.
fn brent_root(
    mut eval: impl FnMut(f64) -> Result<f64, FitError>,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    tol_f: f64,
    max_evals: usize,
) -> Result<(f64, usize), FitError> {
    debug_assert!(fa * fb < 0.0);
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    let mut evals = 0usize;
    while evals < max_evals {
        if fb.abs() <= tol_f {
            return Ok((b, evals));
        }
        if (b - a).abs() <= 1e-15 * b.abs().max(1.0) {
            return Ok((b, evals));
        }
        let mut s = if fa != fc && fb != fc {
            // Inverse quadratic interpolation.
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let hi = b;
        let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
        let bisect = s < lo
            || s > hi
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < 1e-15)
            || (!mflag && (c - d).abs() < 1e-15);
        if bisect {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = eval(s)?;
        evals += 1;
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Err(FitError::OuterNoConvergence { evals: max_evals })
}

/// Expands a bracket geometrically from gamma = 1, then Brent-solves.
/// `eval` returns the outer objective at gamma; an inner failure is treated
/// as "gamma out of range" during expansion and pulled back toward the last
/// feasible point.
fn outer_root_find(
    mut eval: impl FnMut(f64) -> Result<f64, FitError>,
    tol_f: f64,
    max_evals: usize,
) -> Result<(f64, usize), FitError> {
    let mut evals = 1usize;
    let f1 = eval(1.0)?;
    if f1.abs() <= tol_f {
        return Ok((1.0, evals));
    }
    // The objective is increasing in gamma: search downward from a positive
    // value, upward from a negative one.
    let factor: f64 = if f1 > 0.0 { 0.5 } else { 2.0 };
    let mut cur = 1.0f64;
    let mut fcur = f1;
    let mut prop = cur * factor;
    let (a, fa, b, fb) = loop {
        if evals >= max_evals {
            return Err(FitError::OuterNoBracket);
        }
        if !(1e-18..=1e18).contains(&prop) || !(prop / cur).is_finite() {
            return Err(FitError::OuterNoBracket);
        }
        match eval(prop) {
            Ok(fprop) => {
                evals += 1;
                if fprop == 0.0 {
                    return Ok((prop, evals));
                }
                if fprop.signum() != fcur.signum() {
                    break if fcur < 0.0 {
                        (cur, fcur, prop, fprop)
                    } else {
                        (prop, fprop, cur, fcur)
                    };
                }
                cur = prop;
                fcur = fprop;
                prop = cur * factor;
            }
            Err(FitError::InnerNoConvergence { .. }) | Err(FitError::TargetOnBoundary(_)) => {
                // Out of the feasible range: pull back toward `cur`.
                evals += 1;
                let pulled = (cur * prop).sqrt();
                if (pulled / cur - 1.0).abs() < 1e-12 {
                    return Err(FitError::OuterNoBracket);
                }
                prop = pulled;
            }
            Err(e) => return Err(e),
        }
    };
    let (root, brent_evals) = brent_root(&mut eval, a, fa, b, fb, tol_f, max_evals - evals)?;
    Ok((root, evals + brent_evals))
}

/// Shared assembly of an `MleResult` from a converged solution.
fn assemble(
    model: &ModelMatrix,
    data: &Observed,
    mut p: Vec<f64>,
    gamma: f64,
    iterations: Iterations,
    zero_cells: Vec<usize>,
    algorithm: &'static str,
) -> Result<MleResult, FitError> {
    // Exact renormalization; the outer search already has 1'p within its
    // tolerance, so this moves p by at most that amount.
    let total: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= total;
    }
    let extended = !zero_cells.is_empty();
    let fitted_sums = model.subset_sums(&p);
    let observed_sums = model.subset_sums(data.q().probs());
    let subset_sum = fitted_sums
        .iter()
        .zip(&observed_sums)
        .map(|(f, o)| (f - gamma * o).abs())
        .fold(0.0, f64::max);
    let normalization = (p.iter().sum::<f64>() - 1.0).abs();

    let basis = kernel_basis(model);
    let kernel = basis
        .rows()
        .iter()
        .filter(|d| zero_cells.iter().all(|&z| d[z] == 0))
        .map(|d| {
            d.iter()
                .zip(&p)
                .filter(|(&c, _)| c != 0)
                .map(|(&c, &x)| c as f64 * x.ln())
                .sum::<f64>()
                .abs()
        })
        .fold(0.0, f64::max);

    let distribution = Distribution::new(p)?;
    let (theta, theta0) = if distribution.strictly_positive() {
        let params = log_linear_params(&distribution, model, f64::INFINITY)
            .expect("positive distribution always has a least-squares solution");
        (Some(params.theta), params.theta0)
    } else {
        (None, None)
    };

    Ok(MleResult {
        p_hat: distribution,
        gamma,
        theta,
        theta0,
        iterations,
        converged: true,
        residuals: Residuals {
            subset_sum,
            kernel,
            normalization,
        },
        extended,
        zero_cells,
        algorithm,
        cross_check: None,
    })
}

fn check_space(model: &ModelMatrix, data: &Observed) -> Result<(), FitError> {
    if data.len() != model.n_cells() {
        return Err(FitError::SpaceMismatch {
            data: data.len(),
            cells: model.n_cells(),
        });
    }
    Ok(())
}

/// G-IPF: outer root-find on g(gamma) = 1'p_gamma - 1 where p_gamma solves
/// A p = gamma A q on the exponential manifold.
pub fn fit_gipf(model: &ModelMatrix, data: &Observed, opts: &FitOptions) -> Result<MleResult, FitError> {
    check_space(model, data)?;
    if has_overall_effect(model) {
        return Err(FitError::HasOverallEffect);
    }
    if !exists_positive(model, data) {
        return Err(FitError::NoPositiveMLE);
    }
    let problem = IpfProblem::from_model(model);
    let observed_sums = model.subset_sums(data.q().probs());
    let mut state = vec![1.0; model.n_cells()];
    let mut inner_total = 0usize;
    let mut outer = 0usize;
    let mut eval = |gamma: f64| -> Result<f64, FitError> {
        let target: Vec<f64> = observed_sums.iter().map(|s| gamma * s).collect();
        let run = ipf(
            &problem,
            &target,
            state.clone(),
            // The outer tolerance is on 1'p, so the inner match must be
            // comfortably tighter than it.
            (0.1 * opts.tol_outer).min(opts.tol_inner),
            opts.max_inner_sweeps,
            None,
        )?;
        inner_total += run.sweeps;
        outer += 1;
        state = run.p;
        Ok(state.iter().sum::<f64>() - 1.0)
    };
    let (gamma, _) = outer_root_find(&mut eval, opts.tol_outer, opts.max_outer_evals)?;
    eval(gamma)?;
    let iterations = Iterations {
        outer,
        inner_sweeps: inner_total,
    };
    assemble(model, data, state, gamma, iterations, Vec::new(), "gipf")
}

/// G-IPFm: the inner solver runs on the augmented matrix with the fixed
/// normalization target, and the outer search drives the non-homogeneous
/// log-contrast d1' log p to zero. Requires strictly positive data.
pub fn fit_gipfm(model: &ModelMatrix, data: &Observed, opts: &FitOptions) -> Result<MleResult, FitError> {
    check_space(model, data)?;
    if has_overall_effect(model) {
        return Err(FitError::HasOverallEffect);
    }
    if let Some(cell) = data.counts().iter().position(|&c| c <= 0.0) {
        return Err(FitError::ZeroInData(cell + 1));
    }
    let basis = kernel_basis(model);
    let d1 = basis.rows()[basis
        .nonhomogeneous_index()
        .expect("a model without the overall effect has a non-homogeneous row")]
    .clone();

    // Augmented problem: the all-ones row with target 1, then the model rows
    // with targets gamma * (A q).
    let mut supports = vec![(0..model.n_cells()).collect::<Vec<_>>()];
    supports.extend((0..model.n_rows()).map(|j| model.row_support(j)));
    let problem = IpfProblem {
        supports,
        n_cells: model.n_cells(),
    };
    let observed_sums = model.subset_sums(data.q().probs());
    let mut state = vec![1.0; model.n_cells()];
    let mut inner_total = 0usize;
    let mut outer = 0usize;
    let mut eval = |gamma: f64| -> Result<f64, FitError> {
        let mut target = vec![1.0];
        target.extend(observed_sums.iter().map(|s| gamma * s));
        let run = ipf(
            &problem,
            &target,
            state.clone(),
            opts.tol_inner,
            opts.max_inner_sweeps,
            None,
        )?;
        inner_total += run.sweeps;
        outer += 1;
        state = run.p;
        Ok(d1
            .iter()
            .zip(&state)
            .filter(|(&c, _)| c != 0)
            .map(|(&c, &x)| c as f64 * x.ln())
            .sum())
    };
    let (gamma, _) = outer_root_find(&mut eval, opts.tol_outer, opts.max_outer_evals)?;
    eval(gamma)?;
    let iterations = Iterations {
        outer,
        inner_sweeps: inner_total,
    };
    assemble(model, data, state, gamma, iterations, Vec::new(), "gipfm")
}

/// Value of the G-IPFm outer objective d1' log p_gamma at one fixed gamma,
/// from a cold start. The convergence argument for G-IPFm rests on this
/// being strictly increasing in gamma; exposing it lets callers check that
/// numerically.
pub fn gipfm_objective(
    model: &ModelMatrix,
    data: &Observed,
    gamma: f64,
    opts: &FitOptions,
) -> Result<f64, FitError> {
    check_space(model, data)?;
    if has_overall_effect(model) {
        return Err(FitError::HasOverallEffect);
    }
    if let Some(cell) = data.counts().iter().position(|&c| c <= 0.0) {
        return Err(FitError::ZeroInData(cell + 1));
    }
    let basis = kernel_basis(model);
    let d1 = basis.rows()[basis
        .nonhomogeneous_index()
        .expect("a model without the overall effect has a non-homogeneous row")]
    .clone();
    let mut supports = vec![(0..model.n_cells()).collect::<Vec<_>>()];
    supports.extend((0..model.n_rows()).map(|j| model.row_support(j)));
    let problem = IpfProblem {
        supports,
        n_cells: model.n_cells(),
    };
    let mut target = vec![1.0];
    target.extend(model.subset_sums(data.q().probs()).iter().map(|s| gamma * s));
    let run = ipf(
        &problem,
        &target,
        vec![1.0; model.n_cells()],
        opts.tol_inner,
        opts.max_inner_sweeps,
        None,
    )?;
    Ok(d1
        .iter()
        .zip(&run.p)
        .filter(|(&c, _)| c != 0)
        .map(|(&c, &x)| c as f64 * x.ln())
        .sum())
}

/// Classical IPF at gamma = 1 for a model with the overall effect.
fn fit_overall(model: &ModelMatrix, data: &Observed, opts: &FitOptions) -> Result<MleResult, FitError> {
    let problem = IpfProblem::from_model(model);
    let target = model.subset_sums(data.q().probs());
    let run = ipf(
        &problem,
        &target,
        vec![1.0; model.n_cells()],
        opts.tol_inner,
        opts.max_inner_sweeps,
        None,
    )?;
    let iterations = Iterations {
        outer: 1,
        inner_sweeps: run.sweeps,
    };
    assemble(model, data, run.p, 1.0, iterations, Vec::new(), "ipf")
}

/// Extended MLE: always exists. When the positive MLE exists this equals the
/// ordinary fit; otherwise the problem is restricted to the minimal facial
/// set containing the support (the support of the extended MLE) and solved
/// there, with the remaining cells estimated as exactly zero.
pub fn fit_extended(model: &ModelMatrix, data: &Observed, opts: &FitOptions) -> Result<MleResult, FitError> {
    check_space(model, data)?;
    let face_info = minimal_face(model, data);
    if face_info.is_none() {
        let mut result = if has_overall_effect(model) {
            fit_overall(model, data, opts)?
        } else {
            fit_gipf(model, data, opts)?
        };
        result.algorithm = "extended";
        return Ok(result);
    }
    let (face, _certificate) = face_info.expect("checked above");
    let in_face = {
        let mut mask = vec![false; model.n_cells()];
        for &i in &face {
            mask[i] = true;
        }
        mask
    };
    let zero_cells: Vec<usize> = (0..model.n_cells()).filter(|&i| !in_face[i]).collect();

    // Keep the rows that touch the face; dropped rows have observed subset
    // sum zero, which the zero cells satisfy automatically.
    let observed_sums = model.subset_sums(data.q().probs());
    let mut supports = Vec::new();
    let mut targets_base = Vec::new();
    for (j, &observed_sum) in observed_sums.iter().enumerate() {
        let sup: Vec<usize> = model.row_support(j).into_iter().filter(|&i| in_face[i]).collect();
        if sup.is_empty() {
            debug_assert_eq!(observed_sum, 0.0);
            continue;
        }
        supports.push(sup);
        targets_base.push(observed_sum);
    }
    let problem = IpfProblem {
        supports,
        n_cells: model.n_cells(),
    };
    let start: Vec<f64> = in_face.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let freeze = Some((opts.freeze_threshold, opts.freeze_sweeps));

    let (p, gamma, iterations, frozen) = if has_overall_effect(model) {
        let run = ipf(
            &problem,
            &targets_base,
            start,
            opts.tol_inner,
            opts.max_inner_sweeps,
            freeze,
        )?;
        (
            run.p,
            1.0,
            Iterations {
                outer: 1,
                inner_sweeps: run.sweeps,
            },
            run.frozen,
        )
    } else {
        let mut state = start;
        let mut inner_total = 0usize;
        let mut outer = 0usize;
        let mut last_frozen = Vec::new();
        let mut eval = |gamma: f64| -> Result<f64, FitError> {
            let target: Vec<f64> = targets_base.iter().map(|s| gamma * s).collect();
            let run = ipf(
                &problem,
                &target,
                state.clone(),
                (0.1 * opts.tol_outer).min(opts.tol_inner),
                opts.max_inner_sweeps,
                freeze,
            )?;
            inner_total += run.sweeps;
            outer += 1;
            state = run.p;
            last_frozen = run.frozen;
            Ok(state.iter().sum::<f64>() - 1.0)
        };
        let (gamma, _) = outer_root_find(&mut eval, opts.tol_outer, opts.max_outer_evals)?;
        eval(gamma)?;
        (
            state,
            gamma,
            Iterations {
                outer,
                inner_sweeps: inner_total,
            },
            last_frozen,
        )
    };
    // Cells the safety freeze pushed to exact zero join the face complement.
    let mut zero_cells = zero_cells;
    for i in frozen {
        if !zero_cells.contains(&i) {
            zero_cells.push(i);
        }
    }
    zero_cells.sort_unstable();
    let mut result = assemble(model, data, p, gamma, iterations, zero_cells, "extended")?;
    result.extended = true;
    Ok(result)
}

/// Dispatching front end.
///
/// - overall effect present: classical IPF at gamma = 1 (set, not solved);
/// - absent with strictly positive data: G-IPF, G-IPFm or both per options;
/// - absent with observed zeros: G-IPF, falling back to the extended MLE
///   when no positive MLE exists (unless `extended` is off).
pub fn fit(model: &ModelMatrix, data: &Observed, opts: &FitOptions) -> Result<MleResult, FitError> {
    check_space(model, data)?;
    if has_overall_effect(model) {
        if exists_positive(model, data) {
            return fit_overall(model, data, opts);
        }
        return match opts.extended {
            ExtendedMode::Off => Err(FitError::NoPositiveMLE),
            _ => fit_extended(model, data, opts),
        };
    }
    let positive_data = data.support().len() == data.len();
    if positive_data {
        match opts.algorithm {
            Algorithm::Auto | Algorithm::Gipf => fit_gipf(model, data, opts),
            Algorithm::Gipfm => fit_gipfm(model, data, opts),
            Algorithm::Both => {
                let via_g = fit_gipf(model, data, opts)?;
                let via_m = fit_gipfm(model, data, opts)?;
                let disagreement = via_g
                    .p_hat
                    .probs()
                    .iter()
                    .zip(via_m.p_hat.probs())
                    .map(|(a, b)| (a - b).abs())
                    .fold((via_g.gamma - via_m.gamma).abs(), f64::max);
                let mut result = via_g;
                result.cross_check = Some(disagreement);
                Ok(result)
            }
        }
    } else {
        if matches!(opts.algorithm, Algorithm::Gipfm) {
            let cell = data.counts().iter().position(|&c| c <= 0.0).unwrap_or(0);
            return Err(FitError::ZeroInData(cell + 1));
        }
        match fit_gipf(model, data, opts) {
            Err(FitError::NoPositiveMLE) => match opts.extended {
                ExtendedMode::Off => Err(FitError::NoPositiveMLE),
                _ => fit_extended(model, data, opts),
            },
            other => other,
        }
    }
}
