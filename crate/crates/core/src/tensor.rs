//! Tensor descriptors, exact entries and brute-force reference products.

use serde::{Deserialize, Serialize};

use crate::error::{HilbertError, Result};

/// Identifies the `m`th-order, `d`-dimensional generalized Hilbert tensor with
/// shift `λ`.
///
/// Only the three parameters are stored; entries come from the generating
/// vector on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensorDescriptor {
    order: usize,
    dim: usize,
    shift: f64,
}

/// True when `lambda` is one of `0, -1, -2, ...`.
pub fn is_nonpositive_integer(lambda: f64) -> bool {
    lambda <= 0.0 && lambda.fract() == 0.0
}

impl TensorDescriptor {
    pub fn new(order: usize, dim: usize, shift: f64) -> Result<Self> {
        if order < 2 {
            return Err(HilbertError::invalid(
                "m",
                format!("order must be at least 2, got {order}"),
            ));
        }
        if dim < 1 {
            return Err(HilbertError::invalid("d", "dimension must be at least 1"));
        }
        if !shift.is_finite() {
            return Err(HilbertError::invalid(
                "lambda",
                format!("shift must be finite, got {shift}"),
            ));
        }
        if is_nonpositive_integer(shift) {
            return Err(HilbertError::invalid(
                "lambda",
                format!("shift must not be a non-positive integer, got {shift}"),
            ));
        }
        Ok(Self { order, dim, shift })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Largest achievable index sum `S = m(d-1)`.
    pub fn max_sum(&self) -> usize {
        self.order * (self.dim - 1)
    }

    /// Entry `1/(i₁ + ⋯ + i_m + λ)`.
    pub fn entry(&self, idx: &[usize]) -> Result<f64> {
        if idx.len() != self.order {
            return Err(HilbertError::IndexArity {
                expected: self.order,
                got: idx.len(),
            });
        }
        let mut sum = 0usize;
        for (position, &index) in idx.iter().enumerate() {
            if index >= self.dim {
                return Err(HilbertError::IndexOutOfRange {
                    position,
                    index,
                    dim: self.dim,
                });
            }
            sum += index;
        }
        Ok(1.0 / (sum as f64 + self.shift))
    }

    pub fn generating_vector(&self) -> GeneratingVector {
        GeneratingVector::with_len(self.shift, self.max_sum() + 1)
    }

    pub(crate) fn check_len(&self, x: &DenseVector) -> Result<()> {
        if x.len() != self.dim {
            return Err(HilbertError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// The Hankel generating sequence `h_k = 1/(k + λ)`, `k = 0..=S`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingVector(Vec<f64>);

impl GeneratingVector {
    pub(crate) fn with_len(shift: f64, len: usize) -> Self {
        GeneratingVector((0..len).map(|k| 1.0 / (k as f64 + shift)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.0.get(k).copied()
    }
}

/// A finite real vector `x_0..x_{d-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if let Some(bad) = components.iter().position(|v| !v.is_finite()) {
            return Err(HilbertError::invalid(
                "x",
                format!("component {bad} is not finite ({})", components[bad]),
            ));
        }
        Ok(DenseVector(components))
    }

    pub fn zeros(len: usize) -> Self {
        DenseVector(vec![0.0; len])
    }

    /// The unit vector `e_index` of length `len`.
    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = vec![0.0; len];
        v[index] = 1.0;
        DenseVector(v)
    }

    pub(crate) fn from_raw(components: Vec<f64>) -> Self {
        debug_assert!(components.iter().all(|v| v.is_finite()));
        DenseVector(components)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn dot(&self, other: &DenseVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, c: f64) -> DenseVector {
        DenseVector(self.0.iter().map(|v| c * v).collect())
    }

    pub fn abs(&self) -> DenseVector {
        DenseVector(self.0.iter().map(|v| v.abs()).collect())
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = HilbertError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        DenseVector::new(v)
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(v: DenseVector) -> Self {
        v.0
    }
}

/// Visits every tuple in `[0, dim)^len` in lexicographic order.
fn for_each_tuple(len: usize, dim: usize, mut visit: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; len];
    loop {
        visit(&idx);
        let mut pos = len;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < dim {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Brute-force `H x^{m-1}`: component `i` sums `x_{i₂}⋯x_{i_m} / (i + i₂ + ⋯ + i_m + λ)`
/// over all `d^{m-1}` tuples.
pub fn apply_naive(t: &TensorDescriptor, x: &DenseVector) -> Result<DenseVector> {
    t.check_len(x)?;
    let h = t.generating_vector();
    let h = h.as_slice();
    let xs = x.as_slice();
    let mut out = vec![0.0; t.dim()];
    for (i, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for_each_tuple(t.order() - 1, t.dim(), |tuple| {
            let mut prod = 1.0;
            let mut sum = i;
            for &j in tuple {
                prod *= xs[j];
                sum += j;
            }
            acc += prod * h[sum];
        });
        *slot = acc;
    }
    Ok(DenseVector::from_raw(out))
}

/// Brute-force homogeneous form `H x^m` over all `d^m` tuples.
pub fn form_naive(t: &TensorDescriptor, x: &DenseVector) -> Result<f64> {
    t.check_len(x)?;
    let h = t.generating_vector();
    let h = h.as_slice();
    let xs = x.as_slice();
    let mut acc = 0.0;
    for_each_tuple(t.order(), t.dim(), |tuple| {
        let mut prod = 1.0;
        let mut sum = 0;
        for &j in tuple {
            prod *= xs[j];
            sum += j;
        }
        acc += prod * h[sum];
    });
    Ok(acc)
}

/// The degree-1 homogeneous operator `T x = ‖x‖₁^{2-m} H x^{m-1}`, with `T 0 = 0`.
pub fn t_operator(t: &TensorDescriptor, x: &DenseVector) -> Result<DenseVector> {
    t.check_len(x)?;
    if x.is_zero() {
        return Ok(DenseVector::zeros(x.len()));
    }
    let y = crate::fast::apply_fast(t, x)?;
    let scale = x.norm1().powi(2 - t.order() as i32);
    Ok(y.scaled(scale))
}
