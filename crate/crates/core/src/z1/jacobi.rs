use crate::error::{HilbertError, Result};
use crate::tensor::{DenseVector, TensorDescriptor};

use super::{canonicalize_sign, residual, Z1Method, Z1Pair};

/// Off-diagonal Frobenius norm at which the sweeps stop.
const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V diag(values) Vᵀ`; `vectors[k]` is the unit
/// eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub sweeps: usize,
}

fn off_norm(a: &[f64], n: usize) -> f64 {
    let mut acc = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            acc += 2.0 * a[p * n + q] * a[p * n + q];
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi rotations on a symmetric `n×n` row-major matrix.
///
/// Each rotation zeroes `a[p][q]`; sweeps repeat until the off-diagonal
/// Frobenius norm is at most `1e-13`.
pub fn jacobi_eigen(matrix: &[f64], n: usize) -> Result<SymmetricEigen> {
    if matrix.len() != n * n {
        return Err(HilbertError::DimensionMismatch {
            expected: n * n,
            got: matrix.len(),
        });
    }
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let mut sweeps = 0;
    while off_norm(&a, n) > OFF_DIAGONAL_TOL {
        if sweeps == MAX_SWEEPS {
            return Err(HilbertError::NoConvergence(format!(
                "jacobi: off-diagonal norm {:.3e} after {MAX_SWEEPS} sweeps",
                off_norm(&a, n)
            )));
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A ← Jᵀ A J on rows/columns p and q.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let values = (0..n).map(|i| a[i * n + i]).collect();
    let vectors = (0..n).map(|j| (0..n).map(|i| v[i * n + j]).collect()).collect();
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// All Z₁-eigenpairs of an order-2 tensor, which are exactly the eigenpairs of
/// the `d×d` matrix `1/(i+j+λ)` rescaled to unit l¹ norm. Sorted by
/// decreasing eigenvalue.
pub fn matrix_eig_oracle(t: &TensorDescriptor) -> Result<Vec<Z1Pair>> {
    if t.order() != 2 {
        return Err(HilbertError::NotApplicable(format!(
            "the matrix oracle needs order 2, got {}",
            t.order()
        )));
    }
    let d = t.dim();
    let h = t.generating_vector();
    let h = h.as_slice();
    let matrix: Vec<f64> = (0..d * d).map(|k| h[k / d + k % d]).collect();
    let eig = jacobi_eigen(&matrix, d)?;

    let mut pairs = eig
        .values
        .iter()
        .zip(eig.vectors)
        .map(|(&mu, v)| {
            let norm: f64 = v.iter().map(|c| c.abs()).sum();
            let (mu, v) = canonicalize_sign(2, mu, v.into_iter().map(|c| c / norm).collect());
            let x = DenseVector::from_raw(v);
            let res = residual(t, mu, &x)?;
            Ok(Z1Pair {
                mu,
                x,
                residual: res,
                iterations: eig.sweeps,
                converged: true,
                method: Z1Method::Jacobi,
                note: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    pairs.sort_by(|a, b| b.mu.total_cmp(&a.mu));
    Ok(pairs)
}
