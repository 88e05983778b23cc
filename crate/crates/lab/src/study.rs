//! Dominant eigenvalues of increasing finite sections, compared with the
//! infinite-dimensional bound `M(λ)`.

use std::io::Write;

use hilbert_tensor::bounds::{bound_c, bound_m};
use hilbert_tensor::{SolverConfig, TensorDescriptor};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::format::{exact, exact_opt};
use crate::sweep::{solve_dominant, SweepMethod, VIOLATION_SLACK};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationRow {
    pub d: usize,
    pub mu: Option<f64>,
    pub bound_c: Option<f64>,
    pub bound_m: f64,
    /// `M - μ_d`.
    pub gap: Option<f64>,
    pub converged: bool,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    /// Observation: `μ_d` at least the previous converged value.
    pub mu_increasing: Option<bool>,
    pub error: Option<String>,
}

impl TruncationRow {
    pub fn is_violation(&self) -> bool {
        let (Some(mu), Some(c), true) = (self.mu, self.bound_c, self.converged) else {
            return false;
        };
        mu > c * (1.0 + VIOLATION_SLACK) || mu > self.bound_m * (1.0 + VIOLATION_SLACK)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationSummary {
    pub m: usize,
    pub lambda: f64,
    pub bound_m: f64,
    pub rows: usize,
    pub not_converged: usize,
    pub violations: usize,
    pub max_mu: Option<f64>,
    pub min_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationOutput {
    pub records: Vec<TruncationRow>,
    pub summary: TruncationSummary,
}

pub fn run_truncation_study(
    m: usize,
    lambda: f64,
    dims: &[usize],
    cfg: &SolverConfig,
    jobs: usize,
) -> Result<TruncationOutput> {
    if !(lambda > 0.0) {
        return Err(LabError::Usage(format!(
            "truncation study needs lambda > 0, got {lambda}"
        )));
    }
    if dims.is_empty() {
        return Err(LabError::Usage("empty dimension list".into()));
    }
    TensorDescriptor::new(m, 1, lambda)?;
    cfg.validate()?;
    let big_m = bound_m(lambda)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LabError::Internal(e.to_string()))?;
    let mut records: Vec<TruncationRow> = pool.install(|| {
        dims.par_iter()
            .map(|&d| {
                let mut row = TruncationRow {
                    d,
                    mu: None,
                    bound_c: None,
                    bound_m: big_m,
                    gap: None,
                    converged: false,
                    residual: None,
                    iterations: None,
                    mu_increasing: None,
                    error: None,
                };
                let outcome = TensorDescriptor::new(m, d, lambda)
                    .map_err(LabError::from)
                    .and_then(|t| Ok((bound_c(&t).value, solve_dominant(&t, SweepMethod::Power, cfg)?)));
                match outcome {
                    Ok((c, pair)) => {
                        row.mu = Some(pair.mu);
                        row.bound_c = Some(c);
                        row.gap = Some(big_m - pair.mu);
                        row.converged = pair.converged;
                        row.residual = Some(pair.residual);
                        row.iterations = Some(pair.iterations);
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                row
            })
            .collect()
    });

    let mut previous: Option<f64> = None;
    for row in &mut records {
        if let (Some(mu), true) = (row.mu, row.converged) {
            row.mu_increasing = previous.map(|p| mu >= p);
            previous = Some(mu);
        }
    }

    let converged_mu = records.iter().filter(|r| r.converged).filter_map(|r| r.mu);
    let summary = TruncationSummary {
        m,
        lambda,
        bound_m: big_m,
        rows: records.len(),
        not_converged: records.iter().filter(|r| !r.converged).count(),
        violations: records.iter().filter(|r| r.is_violation()).count(),
        max_mu: converged_mu.clone().reduce(f64::max),
        min_gap: converged_mu.map(|mu| big_m - mu).reduce(f64::min),
    };
    Ok(TruncationOutput { records, summary })
}

pub fn write_csv<W: Write>(records: &[TruncationRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record([
        "d",
        "mu",
        "bound_C",
        "bound_M",
        "gap",
        "converged",
        "residual",
        "iterations",
        "mu_increasing",
        "error",
    ])?;
    for r in records {
        w.write_record([
            r.d.to_string(),
            exact_opt(r.mu),
            exact_opt(r.bound_c),
            exact(r.bound_m),
            exact_opt(r.gap),
            r.converged.to_string(),
            exact_opt(r.residual),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            r.mu_increasing.map(|b| b.to_string()).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
