//! Z₁-eigenpairs: real `μ` and `x` with `H x^{m-1} = μ x` and `‖x‖₁ = 1`.
//!
//! [`z1_power_iterate`] finds the dominant positive pair of a positive tensor
//! (`λ > 0`). [`z1_newton_refine`] polishes or searches for pairs on a fixed
//! sign orthant and is the only route for `λ < 0`. [`matrix_eig_oracle`]
//! (order 2) and [`simplex_grid_oracle`] (`d ≤ 3`) are independent checks.

mod grid;
mod jacobi;
mod newton;
mod power;

pub use grid::{simplex_grid_oracle, MAX_GRID_DIM};
pub use jacobi::{jacobi_eigen, matrix_eig_oracle, SymmetricEigen};
pub use newton::{z1_newton_multistart, z1_newton_refine};
pub use power::z1_power_iterate;

use serde::Serialize;

use crate::error::{HilbertError, Result};
use crate::fast::apply_fast;
use crate::tensor::{apply_naive, DenseVector, TensorDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    /// Weight `β` on the previous iterate, `x ← (1-β)·y/‖y‖₁ + β·x`.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 10_000,
            seed: 0,
            damping: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !self.tolerance.is_finite() {
            return Err(HilbertError::invalid(
                "tolerance",
                format!("must be positive, got {}", self.tolerance),
            ));
        }
        if self.max_iterations < 1 {
            return Err(HilbertError::invalid("max_iterations", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(HilbertError::invalid(
                "damping",
                format!("must lie in [0, 1), got {}", self.damping),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Z1Method {
    Power,
    Newton,
    Grid,
    Jacobi,
}

impl Z1Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Z1Method::Power => "power",
            Z1Method::Newton => "newton",
            Z1Method::Grid => "grid",
            Z1Method::Jacobi => "jacobi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Z1Pair {
    pub mu: f64,
    /// Eigenvector with `‖x‖₁ = 1`.
    pub x: DenseVector,
    /// `‖H x^{m-1} - μ x‖_∞` at the reported `x`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub method: Z1Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Which tensor-vector product evaluates a residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyPath {
    Naive,
    Fast,
}

/// Defect of `H x^{m-1} = μ x` after rescaling `x` to unit l¹ norm.
///
/// Positive rescaling leaves the value unchanged, so the residual only
/// depends on the direction of `x`.
pub fn residual(t: &TensorDescriptor, mu: f64, x: &DenseVector) -> Result<f64> {
    residual_with(t, mu, x, ApplyPath::Fast)
}

pub fn residual_with(t: &TensorDescriptor, mu: f64, x: &DenseVector, path: ApplyPath) -> Result<f64> {
    t.check_len(x)?;
    if x.is_zero() {
        return Err(HilbertError::invalid("x", "residual of the zero vector is undefined"));
    }
    let xn = x.scaled(1.0 / x.norm1());
    let y = match path {
        ApplyPath::Naive => apply_naive(t, &xn)?,
        ApplyPath::Fast => apply_fast(t, &xn)?,
    };
    Ok(y.as_slice()
        .iter()
        .zip(xn.as_slice())
        .fold(0.0, |acc, (yi, xi)| acc.max((yi - mu * xi).abs())))
}

/// Flips `x` so that its first nonzero component is positive, adjusting `μ`
/// by `(-1)^m` so the pair still satisfies `H x^{m-1} = μ x`.
pub fn canonicalize_sign(order: usize, mu: f64, x: Vec<f64>) -> (f64, Vec<f64>) {
    let leading = x.iter().copied().find(|v| v.abs() > 1e-14).unwrap_or(0.0);
    if leading < 0.0 {
        let mu = if order.is_multiple_of(2) { mu } else { -mu };
        (mu, x.into_iter().map(|v| -v).collect())
    } else {
        (mu, x)
    }
}

/// Orders pairs by `μ`, then lexicographically by eigenvector.
pub(crate) fn sort_pairs(pairs: &mut [Z1Pair]) {
    pairs.sort_by(|a, b| {
        a.mu.total_cmp(&b.mu).then_with(|| {
            a.x.as_slice()
                .iter()
                .zip(b.x.as_slice())
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
}

/// Drops pairs whose eigenvectors lie within `tol` (l¹) of an earlier one.
pub(crate) fn dedup_pairs(pairs: Vec<Z1Pair>, tol: f64) -> Vec<Z1Pair> {
    let mut kept: Vec<Z1Pair> = Vec::new();
    for p in pairs {
        let duplicate = kept.iter().any(|q| {
            q.x.as_slice()
                .iter()
                .zip(p.x.as_slice())
                .map(|(u, v)| (u - v).abs())
                .sum::<f64>()
                <= tol
        });
        if !duplicate {
            kept.push(p);
        }
    }
    kept
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn residual_examples() {
        let t = TensorDescriptor::new(2, 1, 1.0).unwrap();
        assert_eq!(residual(&t, 1.0, &DenseVector::unit(1, 0)).unwrap(), 0.0);

        let t = TensorDescriptor::new(2, 2, 1.0).unwrap();
        assert_eq!(residual(&t, 0.0, &DenseVector::unit(2, 0)).unwrap(), 1.0);
        assert!(matches!(
            residual(&t, 1.0, &DenseVector::zeros(2)),
            Err(HilbertError::InvalidParameter { field: "x", .. })
        ));
    }

    #[test]
    fn residual_scale_invariant_and_continuous() {
        let t = TensorDescriptor::new(2, 2, 1.0).unwrap();
        let mu = (4.0 + 13f64.sqrt()) / 6.0;
        // eigenvector of [[1, 1/2], [1/2, 1/3]] for mu: (1/2, mu - 1)
        let x = DenseVector::new(vec![0.5, mu - 1.0]).unwrap();
        let r0 = residual(&t, mu, &x).unwrap();
        assert!(r0 < 1e-15);
        assert!((residual(&t, mu, &x.scaled(7.5)).unwrap() - r0).abs() <= 1e-15);
        for eps in [1e-3, 1e-5, 1e-7] {
            let xp = DenseVector::new(vec![0.5 + eps, mu - 1.0]).unwrap();
            let r = residual(&t, mu, &xp).unwrap();
            assert!(r > 0.0 && r < 2.0 * eps, "eps={eps} r={r}");
        }
    }

    #[test]
    fn sign_canonicalization() {
        assert_eq!(canonicalize_sign(3, 2.0, vec![-0.5, -0.5]), (-2.0, vec![0.5, 0.5]));
        assert_eq!(canonicalize_sign(2, 2.0, vec![-0.5, 0.5]), (2.0, vec![0.5, -0.5]));
        assert_eq!(canonicalize_sign(4, 1.0, vec![0.0, 1.0]), (1.0, vec![0.0, 1.0]));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            tolerance: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            damping: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
