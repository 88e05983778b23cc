//! Number formatting and list parsing shared by the subcommands.

use crate::error::{LabError, Result};

/// 17 significant digits: parses back to the identical `f64`.
pub fn exact(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn exact_opt(v: Option<f64>) -> String {
    v.map(exact).unwrap_or_default()
}

/// 12 significant digits for human-readable tables.
pub fn readable(v: f64) -> String {
    format!("{v:.11e}")
}

/// Parses `"a,b,c"` or `"from:to[:step]"` into integers. `log` spacing treats
/// `step` as a multiplicative factor (default 2).
pub fn parse_usize_list(text: &str, log: bool) -> Result<Vec<usize>> {
    let bad = || LabError::Usage(format!("cannot parse integer list `{text}`"));
    let text = text.trim();
    if text.is_empty() {
        return Err(LabError::Usage("empty integer list".into()));
    }
    if let Some((from, rest)) = text.split_once(':') {
        let (to, step) = match rest.split_once(':') {
            Some((to, step)) => (to, Some(step)),
            None => (rest, None),
        };
        let from: usize = from.trim().parse().map_err(|_| bad())?;
        let to: usize = to.trim().parse().map_err(|_| bad())?;
        let step: Option<f64> = step.map(|s| s.trim().parse()).transpose().map_err(|_| bad())?;
        return expand_range(from, to, step, log);
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| bad()))
        .collect()
}

pub fn expand_range(from: usize, to: usize, step: Option<f64>, log: bool) -> Result<Vec<usize>> {
    if from > to {
        return Err(LabError::Usage(format!("empty range {from}..={to}")));
    }
    let mut out = Vec::new();
    if log {
        let factor = step.unwrap_or(2.0);
        if !(factor > 1.0) || from == 0 {
            return Err(LabError::Usage("log spacing needs from >= 1 and factor > 1".into()));
        }
        let mut v = from;
        while v <= to {
            out.push(v);
            v = ((v as f64 * factor).round() as usize).max(v + 1);
        }
    } else {
        let step = step.unwrap_or(1.0);
        if step < 1.0 || step.fract() != 0.0 {
            return Err(LabError::Usage(format!(
                "linear step must be a positive integer, got {step}"
            )));
        }
        out.extend((from..=to).step_by(step as usize));
    }
    Ok(out)
}

/// Parses `"a,b,c"` or `"from:to:step"` into reals. Range values are
/// `from + k·step`, rounded to 12 decimals.
pub fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    let bad = || LabError::Usage(format!("cannot parse real list `{text}`"));
    let text = text.trim();
    if text.is_empty() {
        return Err(LabError::Usage("empty real list".into()));
    }
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [from, to, step] => {
            let from: f64 = from.trim().parse().map_err(|_| bad())?;
            let to: f64 = to.trim().parse().map_err(|_| bad())?;
            let step: f64 = step.trim().parse().map_err(|_| bad())?;
            expand_f64_range(from, to, step)
        }
        [_] => text
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect(),
        _ => Err(bad()),
    }
}

pub fn expand_f64_range(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() || from > to {
        return Err(LabError::Usage(format!("bad real range {from}:{to}:{step}")));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| ((from + k as f64 * step) * 1e12).round() / 1e12)
        .collect())
}
