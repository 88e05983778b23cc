//! Parameter sweeps over `(m, d, λ)` with bound compliance per row.

use std::io::Write;
use std::time::Instant;

use hilbert_tensor::bounds::{bound_c, bound_m};
use hilbert_tensor::tensor::is_nonpositive_integer;
use hilbert_tensor::z1::{matrix_eig_oracle, z1_newton_multistart, z1_power_iterate};
use hilbert_tensor::{SolverConfig, TensorDescriptor, Z1Pair};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::format::{exact, exact_opt, expand_f64_range, expand_range};

/// Rows whose `|μ|` exceeds a bound by more than this fraction of it are violations.
pub const VIOLATION_SLACK: f64 = 1e-10;

/// Random starts for the Newton search used when `λ < 0`.
pub const NEWTON_STARTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    /// Power iteration for λ > 0, Newton multi-start otherwise.
    #[default]
    Auto,
    Power,
    Newton,
    /// Dense Jacobi eigensolver (order 2 only).
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum DimSpec {
    List(Vec<usize>),
    Range {
        from: usize,
        to: usize,
        #[serde(default)]
        spacing: Spacing,
        /// Increment for linear spacing, factor for log spacing.
        #[serde(default)]
        step: Option<f64>,
    },
}

impl DimSpec {
    pub fn expand(&self) -> Result<Vec<usize>> {
        let dims = match self {
            DimSpec::List(v) => v.clone(),
            DimSpec::Range {
                from,
                to,
                spacing,
                step,
            } => expand_range(*from, *to, *step, *spacing == Spacing::Log)?,
        };
        if dims.is_empty() {
            return Err(LabError::Usage("empty dimension range".into()));
        }
        Ok(dims)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    List(Vec<f64>),
    Range { from: f64, to: f64, step: f64 },
}

impl LambdaSpec {
    /// Values within `1e-9` of a non-positive integer are dropped.
    pub fn expand(&self) -> Result<Vec<f64>> {
        let raw = match self {
            LambdaSpec::List(v) => v.clone(),
            LambdaSpec::Range { from, to, step } => expand_f64_range(*from, *to, *step)?,
        };
        let kept: Vec<f64> = raw.into_iter().filter(|&l| !near_forbidden_shift(l)).collect();
        if kept.is_empty() {
            return Err(LabError::Usage("no admissible lambda values".into()));
        }
        Ok(kept)
    }
}

pub fn near_forbidden_shift(lambda: f64) -> bool {
    let nearest = lambda.round();
    is_nonpositive_integer(nearest) && (lambda - nearest).abs() <= 1e-9
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(default)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub damping: f64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            tol: d.tolerance,
            max_iter: d.max_iterations,
            seed: d.seed,
            damping: d.damping,
        }
    }
}

impl From<SolverSpec> for SolverConfig {
    fn from(s: SolverSpec) -> Self {
        SolverConfig {
            tolerance: s.tol,
            max_iterations: s.max_iter,
            seed: s.seed,
            damping: s.damping,
        }
    }
}

/// Sweep definition; the JSON config file deserializes into this directly.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct SweepConfig {
    pub m: Vec<usize>,
    pub dims: DimSpec,
    pub lambdas: LambdaSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub method: SweepMethod,
    /// Record wall time per row. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub m: usize,
    pub d: usize,
    pub lambda: f64,
    pub method: String,
    pub mu: Option<f64>,
    pub bound_c: Option<f64>,
    pub bound_m: Option<f64>,
    /// `C - |μ|`.
    pub slack: Option<f64>,
    /// `M - |μ|`, for `λ > 0`.
    pub slack_m: Option<f64>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: bool,
    pub wall_seconds: Option<f64>,
    pub error: Option<String>,
}

impl SweepRecord {
    /// Converged rows only; non-converged rows never count.
    pub fn is_violation(&self) -> bool {
        if !self.converged {
            return false;
        }
        let exceeds = |slack: Option<f64>, bound: Option<f64>| match (slack, bound) {
            (Some(s), Some(b)) => s < -VIOLATION_SLACK * b,
            _ => false,
        };
        exceeds(self.slack, self.bound_c) || exceeds(self.slack_m, self.bound_m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rows: usize,
    pub converged: usize,
    pub not_converged: usize,
    pub errored: usize,
    pub violations: usize,
    pub min_slack: Option<f64>,
    pub median_slack: Option<f64>,
    /// Observation only: μ non-decreasing in d within every (m, λ) group.
    pub mu_monotone_in_d: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub summary: SweepSummary,
}

/// The dominant pair by the requested method: largest `|μ|` among what the
/// method finds.
pub fn solve_dominant(t: &TensorDescriptor, method: SweepMethod, cfg: &SolverConfig) -> Result<Z1Pair> {
    let method = match method {
        SweepMethod::Auto if t.shift() > 0.0 => SweepMethod::Power,
        SweepMethod::Auto => SweepMethod::Newton,
        other => other,
    };
    let pick = |pairs: Vec<Z1Pair>, what: &str| -> Result<Z1Pair> {
        pairs
            .into_iter()
            .max_by(|a, b| a.mu.abs().total_cmp(&b.mu.abs()))
            .ok_or_else(|| LabError::Internal(format!("{what} found no converged pair")))
    };
    match method {
        SweepMethod::Power => Ok(z1_power_iterate(t, cfg)?),
        SweepMethod::Newton => pick(z1_newton_multistart(t, NEWTON_STARTS, cfg)?, "newton multi-start"),
        SweepMethod::Jacobi => pick(matrix_eig_oracle(t)?, "jacobi"),
        SweepMethod::Auto => unreachable!(),
    }
}

pub fn run_row(m: usize, d: usize, lambda: f64, method: SweepMethod, cfg: &SolverConfig, timings: bool) -> SweepRecord {
    let start = Instant::now();
    let mut record = SweepRecord {
        m,
        d,
        lambda,
        method: format!("{method:?}").to_lowercase(),
        mu: None,
        bound_c: None,
        bound_m: None,
        slack: None,
        slack_m: None,
        residual: None,
        iterations: None,
        converged: false,
        wall_seconds: None,
        error: None,
    };
    let outcome = TensorDescriptor::new(m, d, lambda)
        .map_err(LabError::from)
        .and_then(|t| Ok((t, solve_dominant(&t, method, cfg)?)));
    match outcome {
        Ok((t, pair)) => {
            let c = bound_c(&t).value;
            let mb = bound_m(lambda).ok();
            record.method = pair.method.as_str().to_string();
            record.mu = Some(pair.mu);
            record.bound_c = Some(c);
            record.bound_m = mb;
            record.slack = Some(c - pair.mu.abs());
            record.slack_m = mb.map(|b| b - pair.mu.abs());
            record.residual = Some(pair.residual);
            record.iterations = Some(pair.iterations);
            record.converged = pair.converged;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    if timings {
        record.wall_seconds = Some(start.elapsed().as_secs_f64());
    }
    record
}

pub fn summarize(records: &[SweepRecord]) -> SweepSummary {
    let mut slacks: Vec<f64> = records.iter().filter(|r| r.converged).filter_map(|r| r.slack).collect();
    slacks.sort_by(f64::total_cmp);

    // Groups are contiguous runs of equal (m, λ) once ordered by (m, λ, d).
    let mut ordered: Vec<&SweepRecord> = records.iter().filter(|r| r.converged && r.mu.is_some()).collect();
    ordered.sort_by(|a, b| a.m.cmp(&b.m).then(a.lambda.total_cmp(&b.lambda)).then(a.d.cmp(&b.d)));
    let monotone = ordered
        .windows(2)
        .filter(|w| w[0].m == w[1].m && w[0].lambda == w[1].lambda)
        .all(|w| w[1].mu.unwrap() >= w[0].mu.unwrap());

    SweepSummary {
        rows: records.len(),
        converged: records.iter().filter(|r| r.converged).count(),
        not_converged: records.iter().filter(|r| !r.converged && r.error.is_none()).count(),
        errored: records.iter().filter(|r| r.error.is_some()).count(),
        violations: records.iter().filter(|r| r.is_violation()).count(),
        min_slack: slacks.first().copied(),
        median_slack: (!slacks.is_empty()).then(|| slacks[slacks.len() / 2]),
        mu_monotone_in_d: monotone,
    }
}

/// Runs every `(m, d, λ)` row, `jobs` at a time (0 = all cores). Rows come
/// back in config order regardless of completion order.
pub fn run_sweep(config: &SweepConfig, jobs: usize) -> Result<SweepOutput> {
    if config.m.is_empty() {
        return Err(LabError::Usage("empty order list".into()));
    }
    let dims = config.dims.expand()?;
    let lambdas = config.lambdas.expand()?;
    let cfg: SolverConfig = config.solver.into();
    cfg.validate()?;

    let mut grid = Vec::with_capacity(config.m.len() * dims.len() * lambdas.len());
    for &m in &config.m {
        for &d in &dims {
            for &lambda in &lambdas {
                grid.push((m, d, lambda));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LabError::Internal(e.to_string()))?;
    let records: Vec<SweepRecord> = pool.install(|| {
        grid.par_iter()
            .map(|&(m, d, lambda)| run_row(m, d, lambda, config.method, &cfg, config.timings))
            .collect()
    });
    let summary = summarize(&records);
    Ok(SweepOutput { records, summary })
}

pub const CSV_HEADER: [&str; 14] = [
    "m",
    "d",
    "lambda",
    "method",
    "mu",
    "bound_C",
    "bound_M",
    "slack",
    "slack_M",
    "residual",
    "iterations",
    "converged",
    "wall_seconds",
    "error",
];

pub fn write_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.m.to_string(),
            r.d.to_string(),
            exact(r.lambda),
            r.method.clone(),
            exact_opt(r.mu),
            exact_opt(r.bound_c),
            exact_opt(r.bound_m),
            exact_opt(r.slack),
            exact_opt(r.slack_m),
            exact_opt(r.residual),
            r.iterations.map(|i| i.to_string()).unwrap_or_default(),
            r.converged.to_string(),
            exact_opt(r.wall_seconds),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(output: &SweepOutput, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, output)?;
    writeln!(out)?;
    Ok(())
}
