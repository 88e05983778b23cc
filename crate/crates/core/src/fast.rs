//! Structure-exploiting tensor-vector products.
//!
//! Every entry of `H` depends only on the index sum, so grouping the terms of
//! `(H x^{m-1})_i` by `s = i₂ + ⋯ + i_m` gives
//!
//! ```text
//! (H x^{m-1})_i = Σ_s h_{i+s} c_s,    c = coefficients of (Σ_j x_j z^j)^{m-1}
//! H x^m         = Σ_s h_s e_s,        e = coefficients of (Σ_j x_j z^j)^m
//! ```
//!
//! Polynomial powers are formed by repeated convolution, switching to an FFT
//! once the direct product gets large, and the final correlation against `h`
//! is itself a convolution with the reversed coefficient vector.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{HilbertError, Result};
use crate::tensor::{apply_naive, DenseVector, TensorDescriptor};

/// Products `len_a * len_b` at or below this use the direct O(L²) convolution.
const DIRECT_WORK_LIMIT: usize = 1 << 15;

/// The naive benchmark path refuses more than this many scalar multiplies.
pub const NAIVE_WORK_CUTOFF: f64 = 1e9;

/// Coefficients `c_0..c_L` of a polynomial `Σ c_s z^s`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector(Vec<f64>);

impl CoefficientVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub fn convolve_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (o, &bj) in out[i..].iter_mut().zip(b) {
            *o += ai * bj;
        }
    }
    out
}

/// Linear convolution through a zero-padded power-of-two complex FFT.
///
/// When both inputs are non-negative the exact result is too, and round-off
/// below zero is clamped away.
pub fn convolve_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);

    // Pack both real signals into one complex transform: z = a + i·b.
    let mut z = vec![Complex::new(0.0, 0.0); n];
    for (slot, &v) in z.iter_mut().zip(a) {
        slot.re = v;
    }
    for (slot, &v) in z.iter_mut().zip(b) {
        slot.im = v;
    }
    forward.process(&mut z);

    // A_k = (Z_k + conj Z_{n-k}) / 2,  B_k = (Z_k - conj Z_{n-k}) / 2i,
    // so A_k B_k = (Z_k² - conj(Z_{n-k})²) / 4i.
    let mut prod = vec![Complex::new(0.0, 0.0); n];
    for k in 0..n {
        let zk = z[k];
        let zc = z[(n - k) % n].conj();
        prod[k] = (zk * zk - zc * zc) * Complex::new(0.0, -0.25);
    }
    inverse.process(&mut prod);

    let scale = 1.0 / n as f64;
    let nonneg = a.iter().all(|&v| v >= 0.0) && b.iter().all(|&v| v >= 0.0);
    prod[..out_len]
        .iter()
        .map(|c| {
            let v = c.re * scale;
            if nonneg {
                v.max(0.0)
            } else {
                v
            }
        })
        .collect()
}

/// Chooses the direct or transform path by the size of the direct product.
pub fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.len().saturating_mul(b.len()) <= DIRECT_WORK_LIMIT || a.len().min(b.len()) <= 16 {
        convolve_direct(a, b)
    } else {
        convolve_fft(a, b)
    }
}

/// Coefficients of `(Σ_j x_j z^j)^k`, length `k(d-1)+1`.
pub fn poly_power_coeffs(x: &DenseVector, k: usize) -> Result<CoefficientVector> {
    if k < 1 {
        return Err(HilbertError::invalid("k", "power must be at least 1"));
    }
    if x.is_empty() {
        return Err(HilbertError::invalid("x", "vector must have at least one component"));
    }
    let base = x.as_slice();
    let mut acc = base.to_vec();
    for _ in 1..k {
        acc = convolve(&acc, base);
    }
    Ok(CoefficientVector(acc))
}

/// `y_i = Σ_s h_{i+s} c_s` for `i = 0..out_len`; requires `h.len() >= out_len + c.len() - 1`.
pub(crate) fn correlate(h: &[f64], c: &[f64], out_len: usize) -> Vec<f64> {
    debug_assert!(h.len() + 1 >= out_len + c.len());
    if out_len.saturating_mul(c.len()) <= DIRECT_WORK_LIMIT || c.len() <= 16 {
        (0..out_len)
            .map(|i| h[i..i + c.len()].iter().zip(c).map(|(a, b)| a * b).sum())
            .collect()
    } else {
        let reversed: Vec<f64> = c.iter().rev().copied().collect();
        let full = convolve_fft(&h[..out_len + c.len() - 1], &reversed);
        full[c.len() - 1..c.len() - 1 + out_len].to_vec()
    }
}

/// `H x^{m-1}` through the Hankel factorization.
pub fn apply_fast(t: &TensorDescriptor, x: &DenseVector) -> Result<DenseVector> {
    t.check_len(x)?;
    let h = t.generating_vector();
    let c = poly_power_coeffs(x, t.order() - 1)?;
    Ok(DenseVector::from_raw(correlate(h.as_slice(), c.as_slice(), t.dim())))
}

/// `H x^m` through the Hankel factorization.
pub fn form_fast(t: &TensorDescriptor, x: &DenseVector) -> Result<f64> {
    t.check_len(x)?;
    let h = t.generating_vector();
    let e = poly_power_coeffs(x, t.order())?;
    Ok(h.as_slice().iter().zip(e.as_slice()).map(|(a, b)| a * b).sum())
}

/// Number of scalar multiplies the naive apply would perform, `d^{m-1}·d`.
pub fn naive_work(t: &TensorDescriptor) -> f64 {
    (t.dim() as f64).powi(t.order() as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub m: usize,
    pub d: usize,
    pub lambda: f64,
    pub method: &'static str,
    /// `None` when the method was skipped.
    pub mean_seconds: Option<f64>,
    pub trials: usize,
}

/// Mean wall time of the naive and fast apply paths over `trials` seeded
/// random vectors. The naive path is skipped above [`NAIVE_WORK_CUTOFF`].
pub fn bench_apply(t: &TensorDescriptor, trials: usize, seed: u64) -> Result<Vec<BenchRecord>> {
    if trials < 1 {
        return Err(HilbertError::invalid("trials", "at least one trial is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inputs: Vec<DenseVector> = (0..trials)
        .map(|_| DenseVector::from_raw((0..t.dim()).map(|_| rng.random_range(-1.0..1.0)).collect()))
        .collect();

    let time = |f: &dyn Fn(&DenseVector) -> Result<DenseVector>| -> Result<f64> {
        let mut total = 0.0;
        for x in &inputs {
            let start = Instant::now();
            std::hint::black_box(f(x)?);
            total += start.elapsed().as_secs_f64();
        }
        Ok(total / trials as f64)
    };

    let naive = if naive_work(t) > NAIVE_WORK_CUTOFF {
        None
    } else {
        Some(time(&|x| apply_naive(t, x))?)
    };
    let fast = time(&|x| apply_fast(t, x))?;

    let record = |method, mean_seconds| BenchRecord {
        m: t.order(),
        d: t.dim(),
        lambda: t.shift(),
        method,
        mean_seconds,
        trials,
    };
    Ok(vec![record("naive", naive), record("fast", Some(fast))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::form_naive;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn vecd(v: &[f64]) -> DenseVector {
        DenseVector::new(v.to_vec()).unwrap()
    }

    fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        a.iter().zip(b).fold(0.0, |acc, (u, v)| acc.max((u - v).abs() / scale))
    }

    #[test]
    fn poly_power_examples() {
        assert_eq!(
            poly_power_coeffs(&vecd(&[1.0, 1.0]), 2).unwrap().as_slice(),
            &[1.0, 2.0, 1.0]
        );
        assert_eq!(
            poly_power_coeffs(&vecd(&[1.0, 1.0]), 3).unwrap().as_slice(),
            &[1.0, 3.0, 3.0, 1.0]
        );
        assert_eq!(
            poly_power_coeffs(&vecd(&[2.0, -1.0]), 2).unwrap().as_slice(),
            &[4.0, -4.0, 1.0]
        );
        assert_eq!(
            poly_power_coeffs(&vecd(&[0.5, 2.0]), 1).unwrap().as_slice(),
            &[0.5, 2.0]
        );
        assert!(matches!(
            poly_power_coeffs(&vecd(&[1.0]), 0),
            Err(HilbertError::InvalidParameter { field: "k", .. })
        ));
    }

    #[test]
    fn poly_power_length() {
        let x = vecd(&[0.1, 0.2, 0.3, 0.4, 0.5]);
        for k in 1..6 {
            assert_eq!(poly_power_coeffs(&x, k).unwrap().len(), k * 4 + 1);
        }
    }

    #[test]
    fn apply_fast_examples() {
        let t = TensorDescriptor::new(3, 2, 1.0).unwrap();
        let y = apply_fast(&t, &vecd(&[1.0, 1.0])).unwrap();
        assert_relative_eq!(y.as_slice()[0], 7.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(y.as_slice()[1], 17.0 / 12.0, max_relative = 1e-15);

        // m = 2 with e_0 picks out the first column h_0..h_{d-1}.
        let t = TensorDescriptor::new(2, 5, 0.75).unwrap();
        let y = apply_fast(&t, &DenseVector::unit(5, 0)).unwrap();
        assert_eq!(y.as_slice(), &t.generating_vector().as_slice()[..5]);

        assert!(apply_fast(&t, &DenseVector::zeros(4)).is_err());
    }

    #[test]
    fn form_fast_examples() {
        let t = TensorDescriptor::new(3, 2, 1.0).unwrap();
        assert_relative_eq!(
            form_fast(&t, &vecd(&[1.0, 1.0])).unwrap(),
            15.0 / 4.0,
            max_relative = 1e-15
        );
        let t = TensorDescriptor::new(2, 2, 1.0).unwrap();
        assert_eq!(form_fast(&t, &vecd(&[1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(form_fast(&t, &DenseVector::zeros(2)).unwrap(), 0.0);
    }

    #[test]
    fn fft_matches_direct_up_to_ten_thousand() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(la, lb) in &[
            (1, 1),
            (3, 700),
            (257, 300),
            (1000, 1000),
            (4096, 5000),
            (10_000, 10_000),
        ] {
            let a: Vec<f64> = (0..la).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..lb).map(|_| rng.random_range(-1.0..1.0)).collect();
            let diff = max_rel_diff(&convolve_fft(&a, &b), &convolve_direct(&a, &b));
            assert!(diff <= 1e-10, "({la},{lb}) diff {diff}");
        }
    }

    #[test]
    fn large_apply_uses_transform_and_matches_naive() {
        let t = TensorDescriptor::new(3, 200, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DenseVector::from_raw((0..200).map(|_| rng.random_range(-1.0..1.0)).collect());
        let fast = apply_fast(&t, &x).unwrap();
        let naive = apply_naive(&t, &x).unwrap();
        assert!(max_rel_diff(fast.as_slice(), naive.as_slice()) <= 1e-10);
        let (ff, fnv) = (form_fast(&t, &x).unwrap(), form_naive(&t, &x).unwrap());
        assert!((ff - fnv).abs() <= 1e-10 * fnv.abs().max(1.0));
    }

    #[test]
    fn bench_cutoff_and_validation() {
        let t = TensorDescriptor::new(3, 4096, 1.0).unwrap();
        let recs = bench_apply(&t, 1, 0).unwrap();
        assert_eq!(recs[0].method, "naive");
        assert_eq!(recs[0].mean_seconds, None);
        assert!(recs[1].mean_seconds.unwrap() > 0.0);
        assert!(bench_apply(&t, 0, 0).is_err());
    }

    proptest! {
        #[test]
        fn coefficient_sum_is_power_of_sum(v in prop::collection::vec(-1.0f64..1.0, 1..40), k in 1usize..5) {
            let x = DenseVector::from_raw(v);
            let c = poly_power_coeffs(&x, k).unwrap();
            let total: f64 = x.as_slice().iter().sum();
            let abs_total: f64 = x.norm1();
            let got: f64 = c.as_slice().iter().sum();
            prop_assert!((got - total.powi(k as i32)).abs() <= 1e-12 * abs_total.powi(k as i32).max(1.0));
        }

        #[test]
        fn nonnegative_inputs_stay_nonnegative(
            v in prop::collection::vec(0.0f64..1.0, 1..300),
            m in 2usize..5,
            lambda in 0.01f64..4.0,
        ) {
            let x = DenseVector::from_raw(v);
            let t = TensorDescriptor::new(m, x.len(), lambda).unwrap();
            let c = poly_power_coeffs(&x, m - 1).unwrap();
            prop_assert!(c.as_slice().iter().all(|&v| v >= 0.0));
            prop_assert!(apply_fast(&t, &x).unwrap().as_slice().iter().all(|&v| v >= 0.0));
        }
    }
}
