//! Generalized Hilbert tensors `H_λ` with entries `1 / (i₁ + ⋯ + i_m + λ)`.
//!
//! The tensor is a Hankel tensor: every entry depends only on the index sum, so
//! it is stored as its generating vector `h_k = 1/(k + λ)` and never
//! materialized. The crate provides
//!
//! * [`tensor`]: descriptors, exact entries and brute-force reference products,
//! * [`fast`]: convolution-based tensor-vector products and forms,
//! * [`bounds`]: the closed-form spectral bounds `N(λ)`, `C(d, λ)`, `M(λ)` and
//!   the Hilbert-type inequality left-hand sides,
//! * [`z1`]: Z₁-eigenpair solvers (`H x^{m-1} = μ x`, `‖x‖₁ = 1`) with
//!   independent oracles.
//!
//! Indices run over `0..d`, where `d` is the number of values per index.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod fast;
pub mod tensor;
pub mod z1;

pub use bounds::{bound_c, bound_m, bound_report, BoundBranch, BoundReport};
pub use error::{HilbertError, Result};
pub use fast::{apply_fast, form_fast, poly_power_coeffs, CoefficientVector};
pub use tensor::{apply_naive, form_naive, t_operator, DenseVector, GeneratingVector, TensorDescriptor};
pub use z1::{SolverConfig, Z1Method, Z1Pair};
