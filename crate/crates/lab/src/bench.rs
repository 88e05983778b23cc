use std::io::Write;

use hilbert_tensor::fast::{bench_apply, BenchRecord};
use hilbert_tensor::TensorDescriptor;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::format::exact;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    /// Least-squares slope of `log(mean_seconds)` against `log d` for the fast
    /// path; close to 1 for `d log d` growth.
    pub fast_loglog_slope: Option<f64>,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub summary: BenchSummary,
}

/// Runs sequentially so timings are not disturbed by other rows.
pub fn run_bench(m: usize, dims: &[usize], lambda: f64, trials: usize, seed: u64) -> Result<BenchOutput> {
    if trials < 1 {
        return Err(LabError::Usage("trials must be at least 1".into()));
    }
    if dims.is_empty() {
        return Err(LabError::Usage("empty dimension list".into()));
    }
    let mut records = Vec::with_capacity(2 * dims.len());
    for &d in dims {
        let t = TensorDescriptor::new(m, d, lambda)?;
        records.extend(bench_apply(&t, trials, seed)?);
    }
    let points: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.method == "fast")
        .filter_map(|r| r.mean_seconds.filter(|&s| s > 0.0).map(|s| ((r.d as f64).ln(), s.ln())))
        .collect();
    let summary = BenchSummary {
        fast_loglog_slope: slope(&points),
        skipped: records.iter().filter(|r| r.mean_seconds.is_none()).count(),
    };
    Ok(BenchOutput { records, summary })
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["m", "d", "method", "mean_seconds"])?;
    for r in records {
        w.write_record([
            r.m.to_string(),
            r.d.to_string(),
            r.method.to_string(),
            r.mean_seconds.map(exact).unwrap_or_else(|| "skipped".into()),
        ])?;
    }
    w.flush()?;
    Ok(())
}
