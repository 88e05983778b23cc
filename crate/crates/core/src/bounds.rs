//! Closed-form spectral bounds for Z₁-eigenvalues of `H_λ` and the left-hand
//! sides of the Hilbert-type inequalities they rest on.
//!
//! With `d` values per index and `S = m(d-1)`:
//!
//! * `N(λ) = 1 / min_{0≤s≤S} |s + λ|` for `λ < 1`,
//! * `C(d, λ) = d·sin(π/d)` for `λ ≥ 1`, otherwise `d·N(λ)`,
//! * `M(λ) = π / sin(λπ)` for `0 < λ ≤ 1/2` and `π` for `λ > 1/2`.
//!
//! Every finite Z₁-eigenvalue satisfies `|μ| ≤ C(d, λ)`, and for `λ > 0` the
//! infinite-dimensional ones satisfy `|μ| ≤ M(λ)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{HilbertError, Result};
use crate::fast::apply_fast;
use crate::tensor::{DenseVector, TensorDescriptor};

/// Which case of the `C(d, λ)` table applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundBranch {
    #[serde(rename = "lambda>=1")]
    LambdaAtLeastOne,
    #[serde(rename = "0<lambda<1")]
    UnitInterval,
    #[serde(rename = "-S<lambda<0")]
    NegativeWithinSums,
    #[serde(rename = "lambda<-S")]
    NegativeBelowSums,
}

impl BoundBranch {
    pub fn for_descriptor(t: &TensorDescriptor) -> Self {
        let lambda = t.shift();
        let s = t.max_sum() as f64;
        if lambda >= 1.0 {
            BoundBranch::LambdaAtLeastOne
        } else if lambda > 0.0 {
            BoundBranch::UnitInterval
        } else if lambda > -s {
            BoundBranch::NegativeWithinSums
        } else {
            BoundBranch::NegativeBelowSums
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundBranch::LambdaAtLeastOne => "lambda>=1",
            BoundBranch::UnitInterval => "0<lambda<1",
            BoundBranch::NegativeWithinSums => "-S<lambda<0",
            BoundBranch::NegativeBelowSums => "lambda<-S",
        }
    }
}

/// Which case of the `M(λ)` table applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InfiniteBranch {
    #[serde(rename = "0<lambda<=1/2")]
    UpToHalf,
    #[serde(rename = "lambda>1/2")]
    AboveHalf,
}

/// Set when `d = 1` and `λ ≥ 1`: `d·sin(π/d)` vanishes there, so `C` falls
/// back to `1/λ`.
pub const DEGENERATE_DIMENSION: &str = "degenerate-dimension";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub m: usize,
    pub d: usize,
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: Option<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "M")]
    pub m_bound: Option<f64>,
    pub branch: BoundBranch,
    #[serde(rename = "M_branch")]
    pub m_branch: Option<InfiniteBranch>,
    pub flags: Vec<&'static str>,
}

/// `C(d, λ)` together with the branch it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CBound {
    pub value: f64,
    pub branch: BoundBranch,
    pub degenerate: bool,
}

fn require_below_one(t: &TensorDescriptor) -> Result<()> {
    if t.shift() >= 1.0 {
        return Err(HilbertError::NotApplicable(format!(
            "N(lambda) is defined for lambda < 1, got {}",
            t.shift()
        )));
    }
    Ok(())
}

/// `N(λ)` as the reciprocal of the smallest `|s + λ|` over achievable sums.
pub fn n_lambda_direct(t: &TensorDescriptor) -> Result<f64> {
    require_below_one(t)?;
    let lambda = t.shift();
    let nearest = (0..=t.max_sum())
        .map(|s| (s as f64 + lambda).abs())
        .fold(f64::INFINITY, f64::min);
    Ok(1.0 / nearest)
}

/// `N(λ)` by the three-case floor formula, with `S = m(d-1)` as the largest sum.
pub fn n_lambda_piecewise(t: &TensorDescriptor) -> Result<f64> {
    require_below_one(t)?;
    let lambda = t.shift();
    let s = t.max_sum() as f64;
    let value = if lambda > 0.0 {
        1.0 / lambda
    } else if lambda > -s {
        let floor = lambda.floor();
        1.0 / (lambda - floor).min(1.0 + floor - lambda)
    } else {
        1.0 / (-s - lambda)
    };
    Ok(value)
}

pub fn bound_c(t: &TensorDescriptor) -> CBound {
    let branch = BoundBranch::for_descriptor(t);
    let d = t.dim() as f64;
    match branch {
        BoundBranch::LambdaAtLeastOne if t.dim() == 1 => CBound {
            value: 1.0 / t.shift(),
            branch,
            degenerate: true,
        },
        BoundBranch::LambdaAtLeastOne => CBound {
            value: d * (PI / d).sin(),
            branch,
            degenerate: false,
        },
        _ => CBound {
            value: d * n_lambda_direct(t).expect("branch implies lambda < 1"),
            branch,
            degenerate: false,
        },
    }
}

pub fn bound_m(lambda: f64) -> Result<f64> {
    match infinite_branch(lambda)? {
        InfiniteBranch::UpToHalf => Ok(PI / (lambda * PI).sin()),
        InfiniteBranch::AboveHalf => Ok(PI),
    }
}

fn infinite_branch(lambda: f64) -> Result<InfiniteBranch> {
    if !(lambda > 0.0) {
        return Err(HilbertError::NotApplicable(format!(
            "M(lambda) is defined for lambda > 0, got {lambda}"
        )));
    }
    Ok(if lambda <= 0.5 {
        InfiniteBranch::UpToHalf
    } else {
        InfiniteBranch::AboveHalf
    })
}

pub fn bound_report(t: &TensorDescriptor) -> BoundReport {
    let c = bound_c(t);
    let lambda = t.shift();
    BoundReport {
        m: t.order(),
        d: t.dim(),
        lambda,
        n: n_lambda_direct(t).ok(),
        c: c.value,
        m_bound: bound_m(lambda).ok(),
        branch: c.branch,
        m_branch: infinite_branch(lambda).ok(),
        flags: if c.degenerate {
            vec![DEGENERATE_DIMENSION]
        } else {
            Vec::new()
        },
    }
}

/// `Σ_{i,j} |x_i||x_j| / (i + j + a)` via the order-2 Hankel product on `|x|`.
fn hilbert_bilinear_abs(x: &DenseVector, a: f64) -> Result<f64> {
    let t = TensorDescriptor::new(2, x.len(), a)?;
    let ax = x.abs();
    Ok(ax.dot(&apply_fast(&t, &ax)?))
}

/// Left-hand side of the finite Hilbert inequality with constant `d·sin(π/d)`.
pub fn frazer_lhs(x: &DenseVector) -> Result<f64> {
    if x.len() < 2 {
        return Err(HilbertError::NotApplicable(
            "the sine bound degenerates for fewer than two components".into(),
        ));
    }
    hilbert_bilinear_abs(x, 1.0)
}

/// Constant `d·sin(π/d)` of the finite Hilbert inequality.
pub fn frazer_constant(d: usize) -> f64 {
    let d = d as f64;
    d * (PI / d).sin()
}

/// Left-hand side of the shifted Hilbert inequality with constant `M(a)`,
/// over the available (truncated) indices.
pub fn ingham_lhs(x: &DenseVector, a: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(HilbertError::invalid("a", format!("shift must be positive, got {a}")));
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    hilbert_bilinear_abs(x, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn desc(m: usize, d: usize, lambda: f64) -> TensorDescriptor {
        TensorDescriptor::new(m, d, lambda).unwrap()
    }

    fn vecd(v: &[f64]) -> DenseVector {
        DenseVector::new(v.to_vec()).unwrap()
    }

    /// Double-sum oracle for the bilinear forms.
    fn bilinear_direct(x: &[f64], a: f64) -> f64 {
        let mut acc = 0.0;
        for (i, xi) in x.iter().enumerate() {
            for (j, xj) in x.iter().enumerate() {
                acc += xi.abs() * xj.abs() / (i as f64 + j as f64 + a);
            }
        }
        acc
    }

    #[test]
    fn n_lambda_examples() {
        for d in [1, 2, 5] {
            assert_eq!(n_lambda_direct(&desc(3, d, 0.5)).unwrap(), 2.0);
        }
        let t = desc(3, 2, -2.3);
        assert_relative_eq!(n_lambda_direct(&t).unwrap(), 1.0 / 0.3, max_relative = 1e-12);
        assert_relative_eq!(n_lambda_piecewise(&t).unwrap(), 1.0 / 0.3, max_relative = 1e-12);
        assert_eq!(n_lambda_piecewise(&desc(2, 2, 0.25)).unwrap(), 4.0);
        let t = desc(3, 4, -20.5);
        assert_eq!(t.max_sum(), 9);
        assert_relative_eq!(n_lambda_piecewise(&t).unwrap(), 1.0 / 11.5, max_relative = 1e-15);
        assert_relative_eq!(n_lambda_direct(&t).unwrap(), 1.0 / 11.5, max_relative = 1e-15);
        assert!(matches!(
            n_lambda_direct(&desc(2, 3, 1.0)),
            Err(HilbertError::NotApplicable(_))
        ));
        assert!(n_lambda_piecewise(&desc(2, 3, 2.5)).is_err());
    }

    #[test]
    fn bound_c_examples() {
        let c = bound_c(&desc(2, 2, 1.0));
        assert_relative_eq!(c.value, 2.0, max_relative = 1e-15);
        assert!(c.value > (4.0 + 13f64.sqrt()) / 6.0);
        assert_eq!(c.branch, BoundBranch::LambdaAtLeastOne);
        assert_relative_eq!(
            bound_c(&desc(3, 10, 1.0)).value,
            3.090169943749474,
            max_relative = 1e-14
        );
        let c = bound_c(&desc(3, 4, 0.5));
        assert_eq!((c.value, c.branch), (8.0, BoundBranch::UnitInterval));
        let c = bound_c(&desc(2, 3, -1.5));
        assert_relative_eq!(c.value, 6.0, max_relative = 1e-15);
        assert_eq!(c.branch, BoundBranch::NegativeWithinSums);
        assert_eq!(bound_c(&desc(2, 2, -7.5)).branch, BoundBranch::NegativeBelowSums);
    }

    #[test]
    fn bound_c_degenerate_dimension() {
        let c = bound_c(&desc(3, 1, 2.0));
        assert!(c.degenerate);
        assert_eq!(c.value, 0.5);
        let report = bound_report(&desc(3, 1, 2.0));
        assert_eq!(report.flags, vec![DEGENERATE_DIMENSION]);
        assert_eq!(report.n, None);
    }

    #[test]
    fn bound_m_examples() {
        assert_eq!(bound_m(0.5).unwrap(), PI);
        assert_eq!(PI / (0.5 * PI).sin(), PI);
        assert_eq!(bound_m(1.0).unwrap(), PI);
        assert_relative_eq!(bound_m(0.25).unwrap(), PI * 2f64.sqrt(), max_relative = 1e-15);
        assert!(bound_m(0.0).is_err());
        assert!(bound_m(-0.5).is_err());
        assert!(bound_m(f64::NAN).is_err());
    }

    #[test]
    fn report_fields() {
        let r = bound_report(&desc(3, 4, 0.25));
        assert_eq!(r.c, 16.0);
        assert_eq!(r.n, Some(4.0));
        assert_relative_eq!(r.m_bound.unwrap(), PI * 2f64.sqrt(), max_relative = 1e-15);
        assert_eq!(r.m_branch, Some(InfiniteBranch::UpToHalf));
        let r = bound_report(&desc(2, 3, -1.5));
        assert_eq!(r.m_bound, None);
        assert_eq!(r.branch.as_str(), "-S<lambda<0");
    }

    #[test]
    fn inequality_lhs_examples() {
        assert_eq!(frazer_lhs(&DenseVector::unit(5, 0)).unwrap(), 1.0);
        assert_relative_eq!(frazer_lhs(&vecd(&[1.0, 1.0])).unwrap(), 7.0 / 3.0, max_relative = 1e-15);
        assert_eq!(frazer_lhs(&DenseVector::zeros(3)).unwrap(), 0.0);
        assert!(matches!(frazer_lhs(&vecd(&[1.0])), Err(HilbertError::NotApplicable(_))));

        assert_eq!(ingham_lhs(&vecd(&[1.0]), 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            ingham_lhs(&vecd(&[1.0, 1.0]), 0.5).unwrap(),
            2.0 + 4.0 / 3.0 + 0.4,
            max_relative = 1e-15
        );
        assert_eq!(ingham_lhs(&DenseVector::zeros(4), 0.3).unwrap(), 0.0);
        assert!(matches!(
            ingham_lhs(&vecd(&[1.0]), 0.0),
            Err(HilbertError::InvalidParameter { field: "a", .. })
        ));
    }

    #[test]
    fn inequality_lhs_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for len in [2, 7, 64, 300, 512] {
            let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = vecd(&v);
            for a in [0.1, 1.0, 3.0] {
                let direct = bilinear_direct(&v, a);
                assert!((ingham_lhs(&x, a).unwrap() - direct).abs() <= 1e-12 * direct);
            }
        }
    }

    #[test]
    fn ingham_monotone_under_zero_padding() {
        let x = vecd(&[0.3, -0.7, 0.2]);
        let padded = vecd(&[0.3, -0.7, 0.2, 0.0, 0.0]);
        let extended = vecd(&[0.3, -0.7, 0.2, 0.0, 0.4]);
        let (a, b, c) = (
            ingham_lhs(&x, 0.25).unwrap(),
            ingham_lhs(&padded, 0.25).unwrap(),
            ingham_lhs(&extended, 0.25).unwrap(),
        );
        assert!((a - b).abs() <= 1e-15 * a && b <= c);
    }

    #[test]
    fn sine_constant_below_pi_and_increasing() {
        let mut prev = frazer_constant(1);
        assert!(prev.abs() < 1e-15);
        let mut d = 2usize;
        while d <= 1_000_000 {
            let c = frazer_constant(d);
            assert!(c < PI && c > prev, "d={d}");
            prev = c;
            d = if d < 1000 { d + 1 } else { d + d / 7 };
        }
    }

    proptest! {
        #[test]
        fn piecewise_matches_direct(shape in 0usize..4, u in 0.0f64..1.0) {
            // S = 3, 9, 30, 30
            let (m, d) = [(3, 2), (3, 4), (2, 16), (3, 11)][shape];
            let s = (m * (d - 1)) as f64;
            let lambda = -s - 5.0 + u * (s + 6.0);
            prop_assume!(lambda.fract() != 0.0 && lambda < 1.0);
            let t = desc(m, d, lambda);
            let (a, b) = (n_lambda_direct(&t).unwrap(), n_lambda_piecewise(&t).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "lambda={} {} vs {}", lambda, a, b);
        }
    }
}
