//! Experiment harness for generalized Hilbert tensors: parameter sweeps,
//! truncation studies, inequality checks and benchmarks, each emitting CSV or
//! JSON.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod format;
pub mod inequalities;
pub mod study;
pub mod sweep;

pub use error::{LabError, Result};
