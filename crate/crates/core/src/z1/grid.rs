use std::collections::HashMap;

use crate::error::{HilbertError, Result};
use crate::fast::apply_fast;
use crate::tensor::{DenseVector, TensorDescriptor};

use super::{canonicalize_sign, dedup_pairs, residual, sort_pairs, z1_newton_refine, SolverConfig, Z1Method, Z1Pair};

/// Largest dimension the exhaustive search accepts.
pub const MAX_GRID_DIM: usize = 3;

/// A refined point is an eigenvector candidate when `|sin ∠(Tx, x)|` is below this.
const ALIGNMENT_ACCEPT: f64 = 1e-6;
/// Relative residual a returned pair must reach.
const GRID_TOL: f64 = 1e-8;
const DEDUP_TOL: f64 = 1e-6;

/// `|sin|` of the angle between `H x^{m-1}` and `x` on the l¹ sphere.
fn misalignment(t: &TensorDescriptor, x: &DenseVector) -> Result<f64> {
    let v = apply_fast(t, x)?;
    let vv = v.dot(&v);
    if vv == 0.0 {
        return Ok(0.0);
    }
    let xx = x.dot(x);
    let vx = v.dot(x);
    let perp = (vv - vx * vx / xx).max(0.0);
    Ok((perp / vv).sqrt())
}

/// All compositions of `total` into `parts` non-negative parts.
fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(parts - 1, total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn on_face(sigma: &[f64], bary: &[f64]) -> DenseVector {
    DenseVector::from_raw(sigma.iter().zip(bary).map(|(s, b)| s * b).collect())
}

/// Moves of the form `±h(e_i - e_j)` that keep `bary` inside the simplex.
fn moves(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if i != j {
                out.push((i, j));
            }
        }
    }
    out
}

/// Shrinking-step pattern search for a local minimum of the misalignment,
/// started from a grid point with spacing `h`.
fn refine(t: &TensorDescriptor, sigma: &[f64], start: Vec<f64>, h: f64) -> Result<(Vec<f64>, f64)> {
    let dirs = moves(sigma.len());
    let mut bary = start;
    let mut best = misalignment(t, &on_face(sigma, &bary))?;
    let mut step = h;
    while step > 1e-15 && best > 1e-15 {
        let mut improved = false;
        for &(i, j) in &dirs {
            if bary[j] < step {
                continue;
            }
            let mut trial = bary.clone();
            trial[i] += step;
            trial[j] -= step;
            let value = misalignment(t, &on_face(sigma, &trial))?;
            if value < best {
                best = value;
                bary = trial;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((bary, best))
}

/// Exhaustive search for Z₁-eigenpairs of tiny tensors (`d ≤ 3`).
///
/// Each face `{σ ∘ b : b in the unit simplex}` of the l¹ sphere (with `σ_0 = +1`;
/// the other half follows from `x → -x`) is sampled on a barycentric grid with
/// spacing `1/resolution`. Grid-local minima of the misalignment between
/// `H x^{m-1}` and `x` are refined by a halving pattern search, then polished
/// with Newton where the point has no zero component. Only pairs reaching a
/// relative residual of `1e-8` are returned.
pub fn simplex_grid_oracle(t: &TensorDescriptor, resolution: usize) -> Result<Vec<Z1Pair>> {
    let d = t.dim();
    if d > MAX_GRID_DIM {
        return Err(HilbertError::NotApplicable(format!(
            "grid search is limited to d <= {MAX_GRID_DIM}, got {d}"
        )));
    }
    if resolution < 10 {
        return Err(HilbertError::invalid(
            "resolution",
            format!("must be at least 10, got {resolution}"),
        ));
    }
    if d == 1 {
        let x = DenseVector::from_raw(vec![1.0]);
        let mu = 1.0 / t.shift();
        return Ok(vec![Z1Pair {
            mu,
            residual: residual(t, mu, &x)?,
            x,
            iterations: 1,
            converged: true,
            method: Z1Method::Grid,
            note: None,
        }]);
    }

    let grid = compositions(d, resolution);
    let index: HashMap<&[usize], usize> = grid.iter().enumerate().map(|(k, c)| (c.as_slice(), k)).collect();
    let dirs = moves(d);
    let polish_cfg = SolverConfig::default();
    let mut found = Vec::new();

    for pattern in 0..(1usize << (d - 1)) {
        let sigma: Vec<f64> = (0..d)
            .map(|i| {
                if i > 0 && pattern & (1 << (i - 1)) != 0 {
                    -1.0
                } else {
                    1.0
                }
            })
            .collect();
        let bary_of = |c: &[usize]| -> Vec<f64> { c.iter().map(|&k| k as f64 / resolution as f64).collect() };
        let values = grid
            .iter()
            .map(|c| misalignment(t, &on_face(&sigma, &bary_of(c))))
            .collect::<Result<Vec<f64>>>()?;

        for (k, c) in grid.iter().enumerate() {
            let is_min = dirs.iter().all(|&(i, j)| {
                if c[j] == 0 {
                    return true;
                }
                let mut nb = c.clone();
                nb[i] += 1;
                nb[j] -= 1;
                values[index[nb.as_slice()]] >= values[k]
            });
            if !is_min {
                continue;
            }
            let (bary, defect) = refine(t, &sigma, bary_of(c), 1.0 / resolution as f64)?;
            if defect > ALIGNMENT_ACCEPT {
                continue;
            }
            let x = on_face(&sigma, &bary);
            let v = apply_fast(t, &x)?;
            let mu = v.dot(&x) / x.dot(&x);

            let polished = if x.as_slice().iter().all(|&c| c != 0.0) {
                z1_newton_refine(t, x.as_slice(), Some(mu), &polish_cfg)
                    .ok()
                    .filter(|p| p.converged && (p.mu - mu).abs() <= 1e-4 * mu.abs().max(1.0))
            } else {
                None
            };
            let (mu, xs, note) = match polished {
                Some(p) => (p.mu, p.x.into_inner(), Some("newton-polished".to_string())),
                None => {
                    let (mu, xs) = canonicalize_sign(t.order(), mu, x.into_inner());
                    (mu, xs, None)
                }
            };
            let x = DenseVector::from_raw(xs);
            let res = residual(t, mu, &x)?;
            if res <= GRID_TOL * mu.abs().max(1.0) {
                found.push(Z1Pair {
                    mu,
                    x,
                    residual: res,
                    iterations: grid.len(),
                    converged: true,
                    method: Z1Method::Grid,
                    note,
                });
            }
        }
    }

    sort_pairs(&mut found);
    Ok(dedup_pairs(found, DEDUP_TOL))
}
