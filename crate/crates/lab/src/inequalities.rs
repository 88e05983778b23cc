//! Random-vector checks of the two Hilbert-type inequalities behind the bounds.

use std::path::Path;

use hilbert_tensor::bounds::{bound_m, frazer_constant, frazer_lhs, ingham_lhs};
use hilbert_tensor::DenseVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};

pub const DEFAULT_A_LIST: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 3.0];
pub const MAX_INGHAM_LEN: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityConfig {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub a_list: Vec<f64>,
    pub seed: u64,
    /// Multiplies every bound; `1.0` for a real check, `< 1` as a negative control.
    pub corrupt_factor: f64,
}

impl Default for InequalityConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            dims: (2..=64).collect(),
            a_list: DEFAULT_A_LIST.to_vec(),
            seed: 0,
            corrupt_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Inequality {
    Frazer,
    Ingham,
}

/// Worst case seen for one configuration: a dimension for Frazer, a shift `a`
/// for Ingham.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigResult {
    pub inequality: Inequality,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    pub bound: f64,
    pub trials: usize,
    /// `lhs / (bound · ‖x‖₂²)`.
    pub max_ratio: f64,
    pub violations: usize,
    pub witness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub passed: bool,
    pub max_ratio: f64,
    pub violations: usize,
    pub results: Vec<ConfigResult>,
}

impl InequalityReport {
    pub fn violating(&self) -> impl Iterator<Item = &ConfigResult> {
        self.results.iter().filter(|r| r.violations > 0)
    }
}

fn random_vector(rng: &mut ChaCha8Rng, len: usize) -> DenseVector {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if v.iter().any(|&c| c != 0.0) {
            return DenseVector::new(v).expect("finite by construction");
        }
    }
}

pub fn ratio(lhs: f64, bound: f64, x: &DenseVector) -> f64 {
    let n2 = x.norm2();
    lhs / (bound * n2 * n2)
}

fn check_config(
    inequality: Inequality,
    d: Option<usize>,
    a: Option<f64>,
    bound: f64,
    trials: usize,
    mut rng: ChaCha8Rng,
    lhs: impl Fn(&DenseVector) -> hilbert_tensor::Result<f64>,
) -> Result<ConfigResult> {
    let mut result = ConfigResult {
        inequality,
        d,
        a,
        bound,
        trials,
        max_ratio: f64::NEG_INFINITY,
        violations: 0,
        witness: Vec::new(),
    };
    for _ in 0..trials {
        let len = d.unwrap_or_else(|| rng.random_range(1..=MAX_INGHAM_LEN));
        let x = random_vector(&mut rng, len);
        let r = ratio(lhs(&x)?, bound, &x);
        if r > 1.0 {
            result.violations += 1;
        }
        if r > result.max_ratio {
            result.max_ratio = r;
            result.witness = x.into_inner();
        }
    }
    Ok(result)
}

/// Each configuration draws from its own stream `seed + k`, so results do not
/// depend on scheduling.
pub fn check_inequalities(cfg: &InequalityConfig) -> Result<InequalityReport> {
    if cfg.trials < 1 {
        return Err(LabError::Usage("trials must be at least 1".into()));
    }
    if let Some(&d) = cfg.dims.iter().find(|&&d| d < 2) {
        return Err(LabError::Usage(format!("the finite inequality needs d >= 2, got {d}")));
    }
    if let Some(&a) = cfg.a_list.iter().find(|&&a| !(a > 0.0)) {
        return Err(LabError::Usage(format!("shifts must be positive, got {a}")));
    }
    if !(cfg.corrupt_factor > 0.0) {
        return Err(LabError::Usage("corrupt factor must be positive".into()));
    }

    enum Job {
        Frazer(usize),
        Ingham(f64),
    }
    let jobs: Vec<Job> = cfg
        .dims
        .iter()
        .map(|&d| Job::Frazer(d))
        .chain(cfg.a_list.iter().map(|&a| Job::Ingham(a)))
        .collect();

    let results = jobs
        .par_iter()
        .enumerate()
        .map(|(k, job)| {
            let rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(k as u64));
            match *job {
                Job::Frazer(d) => {
                    let bound = frazer_constant(d) * cfg.corrupt_factor;
                    check_config(Inequality::Frazer, Some(d), None, bound, cfg.trials, rng, frazer_lhs)
                }
                Job::Ingham(a) => {
                    let bound = bound_m(a)? * cfg.corrupt_factor;
                    check_config(Inequality::Ingham, None, Some(a), bound, cfg.trials, rng, |x| {
                        ingham_lhs(x, a)
                    })
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;

    let violations = results.iter().map(|r| r.violations).sum();
    Ok(InequalityReport {
        passed: violations == 0,
        max_ratio: results.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max),
        violations,
        results,
    })
}

/// Writes the worst vector of every violating configuration.
pub fn dump_witnesses(report: &InequalityReport, path: &Path) -> Result<()> {
    let witnesses: Vec<&ConfigResult> = report.violating().collect();
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(file, &serde_json::json!({ "witnesses": witnesses }))?;
    Ok(())
}
