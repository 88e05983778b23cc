use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{HilbertError, Result};
use crate::fast::{apply_fast, correlate, poly_power_coeffs};
use crate::tensor::{DenseVector, TensorDescriptor};

use super::{canonicalize_sign, dedup_pairs, residual, sort_pairs, SolverConfig, Z1Method, Z1Pair};

/// Newton converges in a handful of steps or not at all.
const MAX_NEWTON_STEPS: usize = 100;

/// Smallest backtracking fraction of a Newton step.
const MIN_STEP: f64 = 1.0 / 1024.0;

/// Pairs closer than this (l¹ distance between eigenvectors) are merged.
const DEDUP_TOL: f64 = 1e-8;

/// The Hankel matrix `A = H x^{m-2}`, `A_ij = Σ_s h_{i+j+s} c_s` with `c` the
/// coefficients of `(Σ x_j z^j)^{m-2}`.
fn contracted_matrix(t: &TensorDescriptor, x: &DenseVector) -> Result<DMatrix<f64>> {
    let d = t.dim();
    let h = t.generating_vector();
    let c = if t.order() == 2 {
        vec![1.0]
    } else {
        poly_power_coeffs(x, t.order() - 2)?.into_inner()
    };
    let g = correlate(h.as_slice(), &c, 2 * d - 1);
    Ok(DMatrix::from_fn(d, d, |i, j| g[i + j]))
}

/// `(‖x‖₁^{2-m} H x^{m-1} - μ x, σ·x - 1)` with `‖x‖₁ = σ·x` on the orthant of `σ`.
fn defect(t: &TensorDescriptor, x: &DenseVector, mu: f64, sigma: &[f64]) -> Result<Vec<f64>> {
    let l1: f64 = x.as_slice().iter().zip(sigma).map(|(a, s)| a * s).sum();
    let scale = l1.powi(2 - t.order() as i32);
    let y = apply_fast(t, x)?;
    let mut f: Vec<f64> = y
        .as_slice()
        .iter()
        .zip(x.as_slice())
        .map(|(yi, xi)| scale * yi - mu * xi)
        .collect();
    f.push(l1 - 1.0);
    Ok(f)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton's method on
///
/// ```text
/// F(x, μ) = ( ‖x‖₁^{2-m} H x^{m-1} - μ x ,  σ·x - 1 )
/// ```
///
/// where `σ` is the sign pattern of the current iterate. Inside an open orthant
/// `‖x‖₁ = σ·x` is smooth, and the Jacobian of the tensor term is
/// `‖x‖₁^{2-m} (m-1) H x^{m-2} + (2-m) ‖x‖₁^{1-m} (H x^{m-1}) σᵀ`. Steps are
/// halved until the l² defect decreases; a step that crosses into another
/// orthant takes that orthant's `σ`.
///
/// `mu_start` defaults to the Rayleigh quotient of `start`. The iteration stops
/// unconverged on a singular Jacobian or an exactly zero component.
pub fn z1_newton_refine(
    t: &TensorDescriptor,
    start: &[f64],
    mu_start: Option<f64>,
    cfg: &SolverConfig,
) -> Result<Z1Pair> {
    cfg.validate()?;
    let d = t.dim();
    if start.len() != d {
        return Err(HilbertError::DimensionMismatch {
            expected: d,
            got: start.len(),
        });
    }
    if let Some(i) = start.iter().position(|&v| v == 0.0 || !v.is_finite()) {
        return Err(HilbertError::invalid(
            "start",
            format!("component {i} is zero or not finite; the sign pattern must be strict"),
        ));
    }
    let m = t.order() as i32;
    let mut sigma: Vec<f64> = start.iter().map(|v| v.signum()).collect();
    let norm: f64 = start.iter().map(|v| v.abs()).sum();
    let mut x = DenseVector::from_raw(start.iter().map(|v| v / norm).collect());
    let mut mu = match mu_start {
        Some(mu) => mu,
        None => {
            let y = apply_fast(t, &x)?;
            x.dot(&y) / x.dot(&x)
        }
    };

    let limit = cfg.max_iterations.min(MAX_NEWTON_STEPS);
    let mut steps = 0;
    let mut f = defect(t, &x, mu, &sigma)?;
    let failure = loop {
        let fnorm = max_abs(&f);
        if !fnorm.is_finite() {
            break Some("non-finite defect".to_string());
        }
        if fnorm <= cfg.tolerance * mu.abs().max(1.0) {
            break None;
        }
        if steps == limit {
            break Some(format!(
                "no convergence after {steps} Newton steps (defect {fnorm:.3e})"
            ));
        }

        let l1: f64 = x.as_slice().iter().zip(&sigma).map(|(a, s)| a * s).sum();
        let scale = l1.powi(2 - m);
        let y = apply_fast(t, &x)?;
        let a = contracted_matrix(t, &x)?;
        let rank_one = (2 - m) as f64 * l1.powi(1 - m);
        let mut jac = DMatrix::<f64>::zeros(d + 1, d + 1);
        for i in 0..d {
            for j in 0..d {
                jac[(i, j)] = scale * (m - 1) as f64 * a[(i, j)] + rank_one * y.as_slice()[i] * sigma[j];
            }
            jac[(i, i)] -= mu;
            jac[(i, d)] = -x.as_slice()[i];
            jac[(d, i)] = sigma[i];
        }
        let rhs = DVector::from_iterator(d + 1, f.iter().map(|v| -v));
        let delta = match jac.lu().solve(&rhs) {
            Some(delta) if delta.iter().all(|v| v.is_finite()) => delta,
            _ => break Some(format!("singular Jacobian at step {steps}")),
        };
        steps += 1;

        // Backtrack on the l2 defect; a step that crosses a coordinate
        // hyperplane moves to the neighbouring orthant.
        let f2 = norm2(&f);
        let mut alpha = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x
                .as_slice()
                .iter()
                .zip(delta.iter())
                .map(|(a, b)| a + alpha * b)
                .collect();
            if trial.iter().all(|v| *v != 0.0) {
                let trial_sigma: Vec<f64> = trial.iter().map(|v| v.signum()).collect();
                let trial_x = DenseVector::from_raw(trial);
                let trial_mu = mu + alpha * delta[d];
                let trial_f = defect(t, &trial_x, trial_mu, &trial_sigma)?;
                if norm2(&trial_f) < (1.0 - 1e-4 * alpha) * f2 || alpha < MIN_STEP {
                    break Some((trial_x, trial_mu, trial_sigma, trial_f));
                }
            }
            if alpha < MIN_STEP {
                break None;
            }
            alpha *= 0.5;
        };
        match accepted {
            Some((nx, nmu, nsigma, nf)) => {
                x = nx;
                mu = nmu;
                sigma = nsigma;
                f = nf;
            }
            None => break Some(format!("step hit a zero component at step {steps}")),
        }
    };

    let norm = x.norm1();
    let (mu, xs) = canonicalize_sign(t.order(), mu, x.as_slice().iter().map(|v| v / norm).collect());
    let x = DenseVector::from_raw(xs);
    let res = residual(t, mu, &x)?;
    let converged = failure.is_none() && res <= cfg.tolerance * mu.abs().max(1.0);
    let note = match failure {
        Some(reason) => Some(reason),
        None if !converged => Some(format!("residual {res:.3e} above tolerance after normalization")),
        None => None,
    };
    Ok(Z1Pair {
        mu,
        x,
        residual: res,
        iterations: steps,
        converged,
        method: Z1Method::Newton,
        note,
    })
}

/// Iterations of the shifted power phase that seeds half of the starts.
const SHIFTED_POWER_STEPS: usize = 200;

/// Shifted symmetric power iteration on the unit l² sphere,
/// `y ← (H y^{m-1} + α y) / ‖·‖₂`, with `α` taken from a row-sum bound on
/// `(m-1) H y^{m-2}` at the current point. A positive shift climbs towards a
/// local maximum of `H y^m`, a negative one descends towards a minimum. Only
/// used to place Newton starts away from the `μ ≈ 0` region, where random
/// mixed-sign vectors tend to land.
fn shifted_power_start(t: &TensorDescriptor, start: &[f64], ascend: bool) -> Result<Vec<f64>> {
    let norm = start.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut y = DenseVector::from_raw(start.iter().map(|v| v / norm).collect());
    let sign = if ascend { 1.0 } else { -1.0 };
    for _ in 0..SHIFTED_POWER_STEPS {
        let a = contracted_matrix(t, &y)?;
        let alpha = (t.order() - 1) as f64
            * a.row_iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0f64, f64::max);
        let g = apply_fast(t, &y)?;
        let next: Vec<f64> = g
            .as_slice()
            .iter()
            .zip(y.as_slice())
            .map(|(gi, yi)| sign * gi + alpha * yi)
            .collect();
        let n = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            break;
        }
        y = DenseVector::from_raw(next.into_iter().map(|v| v / n).collect());
    }
    Ok(y.into_inner())
}

/// Newton refinement from `starts` seeded random points with random sign
/// patterns. Every other start first runs a short shifted power phase
/// (alternately ascending and descending for even `m`) so that extremal pairs
/// are reached as well as interior ones. Returns the distinct converged pairs,
/// sorted by `μ` and then lexicographically by eigenvector.
pub fn z1_newton_multistart(t: &TensorDescriptor, starts: usize, cfg: &SolverConfig) -> Result<Vec<Z1Pair>> {
    cfg.validate()?;
    if starts < 1 {
        return Err(HilbertError::invalid("starts", "at least one start is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let guesses: Vec<Vec<f64>> = (0..starts)
        .map(|_| {
            (0..t.dim())
                .map(|_| {
                    let magnitude = rng.random_range(0.05..1.0);
                    if rng.random_bool(0.5) {
                        magnitude
                    } else {
                        -magnitude
                    }
                })
                .collect()
        })
        .collect();

    let even_order = t.order().is_multiple_of(2);
    let results: Vec<Z1Pair> = guesses
        .par_iter()
        .enumerate()
        .map(|(k, g)| {
            if k % 2 == 0 {
                return z1_newton_refine(t, g, None, cfg);
            }
            let ascend = !even_order || (k / 2) % 2 == 0;
            let seeded = shifted_power_start(t, g, ascend)?;
            if seeded.contains(&0.0) {
                return z1_newton_refine(t, g, None, cfg);
            }
            z1_newton_refine(t, &seeded, None, cfg)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut converged: Vec<Z1Pair> = results.into_iter().filter(|p| p.converged).collect();
    sort_pairs(&mut converged);
    Ok(dedup_pairs(converged, DEDUP_TOL))
}
