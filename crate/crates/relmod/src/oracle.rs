//! Brute-force likelihood maximizer used to validate the fitting algorithms.
//!
//! The log-likelihood (A q)' theta is maximized over the curved parameter
//! space {theta : 1' exp(A' theta) = 1} by a quadratic penalty on the mass
//! constraint, ramped over several magnitudes, with derivative-free
//! Nelder-Mead descent from multiple seeded starts. Deliberately independent
//! of the IPF machinery: no shared solver code.

use crate::model::{Distribution, ModelError, ModelMatrix, Observed};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("no start reached constraint residual below {tol:.1e} (best {best:.3e})")]
    InfeasiblePenalty { tol: f64, best: f64 },
    #[error("oracle is desk-scale only: {cells} cells x {rows} rows exceeds 16 x 8")]
    TooLarge { cells: usize, rows: usize },
    #[error("data vector has {data} entries but the sample space has {cells} cells")]
    SpaceMismatch { data: usize, cells: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub seed: u64,
    pub random_starts: usize,
    pub feasibility_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            seed: 20240101,
            random_starts: 20,
            feasibility_tol: 1e-8,
        }
    }
}

/// Per-start record of the penalized search.
#[derive(Debug, Clone)]
pub struct StartTrace {
    pub start: usize,
    pub loglik: f64,
    pub constraint_residual: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub p_star: Distribution,
    pub loglik: f64,
    pub theta: Vec<f64>,
    pub constraint_residual: f64,
    pub method_trace: Vec<StartTrace>,
}

fn masses(model: &ModelMatrix, theta: &[f64]) -> Vec<f64> {
    (0..model.n_cells())
        .map(|i| {
            let e: f64 = model
                .rows()
                .iter()
                .zip(theta)
                .map(|(row, &t)| row[i] as f64 * t)
                .sum();
            e.exp()
        })
        .collect()
}

/// Slides theta along the all-ones parameter direction until the total mass
/// is exactly one. The mass is strictly increasing along that direction
/// (every cell carries at least one parameter), so bisection always lands.
fn project_to_unit_mass(model: &ModelMatrix, theta: &mut [f64]) -> bool {
    let mass = |ts: &[f64]| masses(model, ts).iter().sum::<f64>();
    let shifted = |theta: &[f64], t: f64| -> Vec<f64> { theta.iter().map(|&v| v + t).collect() };
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let m0 = mass(theta);
    if !m0.is_finite() || m0 <= 0.0 {
        return false;
    }
    if m0 > 1.0 {
        lo = -1.0;
        while mass(&shifted(theta, lo)) > 1.0 {
            lo *= 2.0;
            if lo < -700.0 {
                return false;
            }
        }
    } else {
        hi = 1.0;
        while mass(&shifted(theta, hi)) < 1.0 {
            hi *= 2.0;
            if hi > 700.0 {
                return false;
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(&shifted(theta, mid)) > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    for v in theta.iter_mut() {
        *v += t;
    }
    true
}

/// Nelder-Mead minimization; returns the best vertex.
fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    scale: f64,
    max_iters: usize,
) -> (Vec<f64>, f64, usize) {
    let n = start.len();
    let mut evals = 0usize;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let push = |pt: Vec<f64>, f: &mut dyn FnMut(&[f64]) -> f64, evals: &mut usize| {
        let v = f(&pt);
        *evals += 1;
        (pt, v)
    };
    simplex.push(push(start.to_vec(), &mut f, &mut evals));
    for k in 0..n {
        let mut pt = start.to_vec();
        pt[k] += scale;
        simplex.push(push(pt, &mut f, &mut evals));
    }
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let spread = simplex[n].1 - simplex[0].1;
        if spread.abs() < 1e-13 * (1.0 + simplex[0].1.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(pt, _)| pt[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflect: Vec<f64> = (0..n).map(|k| 2.0 * centroid[k] - worst.0[k]).collect();
        let fr = {
            evals += 1;
            f(&reflect)
        };
        if fr < simplex[0].1 {
            let expand: Vec<f64> = (0..n).map(|k| 3.0 * centroid[k] - 2.0 * worst.0[k]).collect();
            let fe = {
                evals += 1;
                f(&expand)
            };
            simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflect, fr);
        } else {
            let contract: Vec<f64> = (0..n).map(|k| 0.5 * (centroid[k] + worst.0[k])).collect();
            let fc = {
                evals += 1;
                f(&contract)
            };
            if fc < worst.1 {
                simplex[n] = (contract, fc);
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    let pt: Vec<f64> = (0..n).map(|k| 0.5 * (best[k] + v.0[k])).collect();
                    let fv = {
                        evals += 1;
                        f(&pt)
                    };
                    *v = (pt, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (pt, v) = simplex.swap_remove(0);
    (pt, v, evals)
}

/// Penalized, multi-start, derivative-free maximizer of the log-likelihood
/// over the family. Desk scale only (at most 16 cells and 8 rows).
pub fn brute_force_mle(
    model: &ModelMatrix,
    data: &Observed,
    opts: &OracleOptions,
) -> Result<OracleResult, OracleError> {
    if data.len() != model.n_cells() {
        return Err(OracleError::SpaceMismatch {
            data: data.len(),
            cells: model.n_cells(),
        });
    }
    if model.n_cells() > 16 || model.n_rows() > 8 {
        return Err(OracleError::TooLarge {
            cells: model.n_cells(),
            rows: model.n_rows(),
        });
    }
    let q = data.q().probs().to_vec();
    let score: Vec<f64> = model.subset_sums(&q);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let j = model.n_rows();
    let mut starts: Vec<Vec<f64>> = vec![vec![0.0; j]];
    for _ in 0..opts.random_starts {
        starts.push((0..j).map(|_| rng.gen_range(-2.0..2.0)).collect());
    }

    let mut trace = Vec::with_capacity(starts.len());
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for (idx, start) in starts.iter().enumerate() {
        let mut theta = start.clone();
        let mut evals = 0usize;
        let mut mu = 1e2;
        while mu <= 1e8 {
            let objective = |th: &[f64]| -> f64 {
                let mass: f64 = masses(model, th).iter().sum();
                let fit: f64 = score.iter().zip(th).map(|(&s, &t)| s * t).sum();
                -(fit - mu * (mass - 1.0) * (mass - 1.0))
            };
            let (next, _, used) = nelder_mead(objective, &theta, 0.25, 400 * j.max(2));
            theta = next;
            evals += used;
            mu *= 10.0;
        }
        // Land exactly on the mass constraint before judging feasibility.
        let projected = project_to_unit_mass(model, &mut theta);
        let mass: f64 = masses(model, &theta).iter().sum();
        let residual = if projected {
            (mass - 1.0).abs()
        } else {
            f64::INFINITY
        };
        let weights = masses(model, &theta);
        let p = Distribution::from_weights(&weights)?;
        let loglik: f64 = q
            .iter()
            .zip(p.probs())
            .filter(|(&qi, _)| qi > 0.0)
            .map(|(&qi, &pi)| qi * pi.ln())
            .sum();
        trace.push(StartTrace {
            start: idx,
            loglik,
            constraint_residual: residual,
            evaluations: evals,
        });
        let feasible = residual <= opts.feasibility_tol;
        if feasible {
            let better = match &best {
                None => true,
                Some((cur, _, _)) => loglik > *cur,
            };
            if better {
                best = Some((loglik, theta.clone(), residual));
            }
        }
    }

    let Some((loglik, theta, residual)) = best else {
        let least = trace
            .iter()
            .map(|t| t.constraint_residual)
            .fold(f64::INFINITY, f64::min);
        return Err(OracleError::InfeasiblePenalty {
            tol: opts.feasibility_tol,
            best: least,
        });
    };
    let p_star = Distribution::from_weights(&masses(model, &theta))?;
    Ok(OracleResult {
        p_star,
        loglik,
        theta,
        constraint_residual: residual,
        method_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{fit_gipf, FitOptions};
    use crate::model::validate_model;

    fn labels(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("c{i}")).collect()
    }

    fn as3() -> ModelMatrix {
        validate_model(
            vec![
                vec![1, 0, 0, 1, 1, 0, 1],
                vec![0, 1, 0, 1, 0, 1, 1],
                vec![0, 0, 1, 0, 1, 1, 1],
            ],
            labels(7),
        )
        .unwrap()
    }

    #[test]
    fn as3_point_mass_closed_form() {
        let model = as3();
        let mut counts = vec![0.0; 7];
        counts[6] = 1.0;
        let data = Observed::new(counts).unwrap();
        let result = brute_force_mle(&model, &data, &OracleOptions::default()).unwrap();
        let c = 2f64.powf(1.0 / 3.0) - 1.0;
        assert!((result.loglik - 3.0 * c.ln()).abs() < 1e-4);
        let expected = [c, c, c, c * c, c * c, c * c, c * c * c];
        for (got, want) in result.p_star.probs().iter().zip(expected) {
            assert!((got - want).abs() < 1e-4, "{got} vs {want}");
        }
        // The returned point is a family member.
        let basis = crate::kernel::kernel_basis(&model);
        let residuals =
            crate::kernel::membership_residuals(&result.p_star, &basis).unwrap();
        assert!(residuals.iter().all(|r| r.abs() < 1e-6));
        assert!((result.p_star.probs().iter().sum::<f64>() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn independence_recovers_product_data() {
        let m = validate_model(
            vec![vec![1, 1, 1, 1], vec![1, 1, 0, 0], vec![1, 0, 1, 0]],
            labels(4),
        )
        .unwrap();
        // Product distribution: already in the model, so the MLE is itself.
        let (r, c) = (0.3, 0.6);
        let q = vec![r * c, r * (1.0 - c), (1.0 - r) * c, (1.0 - r) * (1.0 - c)];
        let data = Observed::new(q.clone()).unwrap();
        let result = brute_force_mle(&m, &data, &OracleOptions::default()).unwrap();
        for (got, want) in result.p_star.probs().iter().zip(q) {
            assert!((got - want).abs() < 1e-4);
        }
    }

    #[test]
    fn agrees_with_gipf_on_uniform_data() {
        let model = validate_model(vec![vec![1, 1, 1, 0], vec![0, 0, 1, 1]], labels(4)).unwrap();
        let data = Observed::new(vec![1.0; 4]).unwrap();
        let oracle = brute_force_mle(&model, &data, &OracleOptions::default()).unwrap();
        let solver = fit_gipf(&model, &data, &FitOptions::default()).unwrap();
        for (a, b) in oracle.p_star.probs().iter().zip(solver.p_hat.probs()) {
            assert!((a - b).abs() < 1e-4);
        }
        // The solver attains the optimum; the oracle can only approach it.
        let solver_loglik: f64 = data
            .q()
            .probs()
            .iter()
            .zip(solver.p_hat.probs())
            .map(|(&qi, &pi)| qi * pi.ln())
            .sum();
        assert!(oracle.loglik <= solver_loglik + 1e-6);
    }

    #[test]
    fn rejects_oversized_instances() {
        let rows: Vec<Vec<i64>> = (0..9)
            .map(|j| (0..18).map(|i| ((i >> (j % 5)) & 1) as i64).collect())
            .collect();
        // Construction may not validate; size check happens first.
        if let Ok(m) = validate_model(rows, labels(18)) {
            let data = Observed::new(vec![1.0; 18]).unwrap();
            assert!(matches!(
                brute_force_mle(&m, &data, &OracleOptions::default()),
                Err(OracleError::TooLarge { .. })
            ));
        }
    }
}
