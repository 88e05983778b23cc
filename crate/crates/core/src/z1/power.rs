use crate::error::{HilbertError, Result};
use crate::fast::apply_fast;
use crate::tensor::{DenseVector, TensorDescriptor};

use super::{SolverConfig, Z1Method, Z1Pair};

/// Damping switched on when the step sizes stop shrinking.
const AUTO_DAMPING: f64 = 0.5;

/// l¹-normalized fixed-point iteration `x ← y/‖y‖₁`, `y = H x^{m-1}`, from the
/// uniform start `x = (1/d, …, 1/d)`.
///
/// For `λ > 0` every entry of `H` is positive, so iterates stay in the open
/// simplex and `μ = ‖y‖₁ = Σ y_i`. Convergence requires both
/// `‖y - μx‖_∞ ≤ tol·max(1, μ)` and `‖x_{k+1} - x_k‖₁ ≤ tol`. A run that
/// exhausts `max_iterations` returns its last iterate with `converged = false`.
pub fn z1_power_iterate(t: &TensorDescriptor, cfg: &SolverConfig) -> Result<Z1Pair> {
    cfg.validate()?;
    if t.shift() <= 0.0 {
        return Err(HilbertError::NotApplicable(format!(
            "power iteration needs a positive tensor (lambda > 0, got {}); use z1_newton_refine",
            t.shift()
        )));
    }
    let d = t.dim();
    let mut x = DenseVector::from_raw(vec![1.0 / d as f64; d]);
    let mut beta = cfg.damping;
    let mut steps: Vec<f64> = Vec::with_capacity(4);
    let mut last = (0.0, f64::INFINITY);
    let mut note = None;

    for k in 1..=cfg.max_iterations {
        let y = apply_fast(t, &x)?;
        let mu: f64 = y.as_slice().iter().sum();
        let xs = x.as_slice();
        let residual = y
            .as_slice()
            .iter()
            .zip(xs)
            .fold(0.0f64, |acc, (yi, xi)| acc.max((yi - mu * xi).abs()));

        let mut next: Vec<f64> = y
            .as_slice()
            .iter()
            .zip(xs)
            .map(|(yi, xi)| (1.0 - beta) * yi / mu + beta * xi)
            .collect();
        let norm: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= norm);

        let step: f64 = next.iter().zip(xs).map(|(a, b)| (a - b).abs()).sum();
        last = (mu, residual);

        if residual <= cfg.tolerance * mu.max(1.0) && step <= cfg.tolerance {
            return Ok(Z1Pair {
                mu,
                x,
                residual,
                iterations: k,
                converged: true,
                method: Z1Method::Power,
                note,
            });
        }

        // Period-2 cycling or stagnation: the step two iterations back is no larger.
        if beta == 0.0 && step > cfg.tolerance && steps.len() >= 2 && step >= 0.999 * steps[steps.len() - 2] {
            beta = AUTO_DAMPING;
            note = Some(format!("damping {AUTO_DAMPING} enabled at iteration {k}"));
        }
        steps.push(step);
        x = DenseVector::from_raw(next);
    }

    Ok(Z1Pair {
        mu: last.0,
        x,
        residual: last.1,
        iterations: cfg.max_iterations,
        converged: false,
        method: Z1Method::Power,
        note: Some(note.map_or_else(
            || "iteration limit reached".to_string(),
            |n| format!("{n}; iteration limit reached"),
        )),
    })
}
