use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hilbert_tensor::bounds::{bound_c, bound_m, bound_report};
use hilbert_tensor::fast::{apply_fast, form_fast};
use hilbert_tensor::tensor::{apply_naive, form_naive};
use hilbert_tensor::z1::{matrix_eig_oracle, simplex_grid_oracle, z1_newton_multistart, z1_power_iterate};
use hilbert_tensor::{DenseVector, SolverConfig, TensorDescriptor, Z1Pair};
use serde_json::json;

use crate::bench::run_bench;
use crate::error::{LabError, Result};
use crate::format::{parse_f64_list, parse_usize_list, readable};
use crate::inequalities::{check_inequalities, dump_witnesses, InequalityConfig, InequalityReport};
use crate::study::run_truncation_study;
use crate::sweep::{run_sweep, DimSpec, LambdaSpec, SolverSpec, SweepConfig, SweepMethod, NEWTON_STARTS};
use crate::{bench, study, sweep};

#[derive(Debug, Parser)]
#[command(
    name = "hilbert-lab",
    version,
    about = "Experiments with generalized Hilbert tensors"
)]
pub struct Cli {
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Table format for sweep, truncation-study, check-inequalities and bench.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProductMethod {
    Naive,
    Fast,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Power,
    Newton,
    Grid,
    Jacobi,
}

#[derive(Debug, Args)]
pub struct TensorArgs {
    /// Tensor order.
    #[arg(long)]
    pub m: usize,
    /// Values per index.
    #[arg(long)]
    pub dim: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
}

impl TensorArgs {
    fn descriptor(&self) -> Result<TensorDescriptor> {
        Ok(TensorDescriptor::new(self.m, self.dim, self.lambda)?)
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0.0)]
    pub damping: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One tensor entry.
    Entry {
        #[command(flatten)]
        tensor: TensorArgs,
        /// Comma-separated indices, each in 0..dim.
        #[arg(long)]
        index: String,
    },
    /// The vector `H x^{m-1}`.
    Apply {
        #[command(flatten)]
        tensor: TensorArgs,
        /// JSON array.
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        #[arg(long, value_enum, default_value_t = ProductMethod::Fast)]
        method: ProductMethod,
    },
    /// The scalar `H x^m`.
    Form {
        #[command(flatten)]
        tensor: TensorArgs,
        #[arg(long, allow_hyphen_values = true)]
        input: String,
        #[arg(long, value_enum, default_value_t = ProductMethod::Fast)]
        method: ProductMethod,
    },
    /// Closed-form bounds with branch tags.
    Bounds {
        #[command(flatten)]
        tensor: TensorArgs,
    },
    /// A Z₁-eigenpair with bound compliance.
    Solve {
        #[command(flatten)]
        tensor: TensorArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Defaults to power for lambda > 0 and newton otherwise.
        #[arg(long, value_enum)]
        method: Option<SolveMethod>,
        /// Random starts for newton.
        #[arg(long, default_value_t = NEWTON_STARTS)]
        starts: usize,
        /// Grid points per simplex edge for grid.
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Dominant eigenvalue and bounds over an (m, d, λ) grid.
    Sweep {
        /// JSON config file; replaces the list flags.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Orders, e.g. `2,3,4`.
        #[arg(long)]
        m: Option<String>,
        /// `a,b,c` or `from:to[:step]`.
        #[arg(long)]
        dims: Option<String>,
        #[arg(long, value_enum, default_value_t = SpacingArg::Linear)]
        spacing: SpacingArg,
        /// `a,b,c` or `from:to:step`.
        #[arg(long, allow_hyphen_values = true)]
        lambdas: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value_t = SweepMethod::Auto)]
        method: SweepMethod,
        /// Fill the wall_seconds column (output is then not reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Dominant eigenvalue of growing sections against M(λ).
    TruncationStudy {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        lambda: f64,
        /// `a,b,c` or `from:to[:factor]`, doubling by default.
        #[arg(long, default_value = "2:256")]
        dims: String,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Random-vector verification of the finite and shifted Hilbert inequalities.
    CheckInequalities {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value = "2:64")]
        dims: String,
        #[arg(long, default_value = "0.1,0.25,0.5,1,3")]
        a_list: String,
        /// Scale every bound by this factor; values below 1 act as a negative control.
        #[arg(long, default_value_t = 1.0)]
        corrupt_factor: f64,
        /// Where violating vectors are written.
        #[arg(long, default_value = "inequality-witness.json")]
        witness: PathBuf,
    },
    /// Timing of the naive and fast tensor-vector products.
    Bench {
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, default_value = "64,256,1024,4096")]
        dims: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

pub fn run() -> ExitCode {
    ExitCode::from(run_from(std::env::args_os()))
}

/// Parses `args` (program name first), executes, and returns the exit code.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json(out: &Option<PathBuf>, value: &serde_json::Value) -> Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn parse_vector(input: &str) -> Result<DenseVector> {
    let raw: Vec<f64> = serde_json::from_str(input)
        .map_err(|e| LabError::Usage(format!("--input must be a JSON array of numbers: {e}")))?;
    Ok(DenseVector::new(raw)?)
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn solver_config(args: &SolverArgs, seed: u64) -> SolverConfig {
    SolverConfig {
        tolerance: args.tol,
        max_iterations: args.max_iter,
        seed,
        damping: args.damping,
    }
}

fn execute(cli: &Cli) -> Result<u8> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Entry { tensor, index } => {
            let t = tensor.descriptor()?;
            let idx = parse_usize_list(index, false)?;
            let mut w = sink(&cli.out)?;
            writeln!(w, "{}", t.entry(&idx)?)?;
            w.flush()?;
            Ok(0)
        }
        Command::Apply { tensor, input, method } => {
            let t = tensor.descriptor()?;
            let x = parse_vector(input)?;
            let value = match method {
                ProductMethod::Naive => json!(apply_naive(&t, &x)?),
                ProductMethod::Fast => json!(apply_fast(&t, &x)?),
                ProductMethod::Both => {
                    let naive = apply_naive(&t, &x)?;
                    let fast = apply_fast(&t, &x)?;
                    let diff = max_rel_diff(naive.as_slice(), fast.as_slice());
                    json!({ "naive": naive, "fast": fast, "max_rel_diff": diff })
                }
            };
            emit_json(&cli.out, &value)?;
            Ok(0)
        }
        Command::Form { tensor, input, method } => {
            let t = tensor.descriptor()?;
            let x = parse_vector(input)?;
            let value = match method {
                ProductMethod::Naive => json!(form_naive(&t, &x)?),
                ProductMethod::Fast => json!(form_fast(&t, &x)?),
                ProductMethod::Both => {
                    let naive = form_naive(&t, &x)?;
                    let fast = form_fast(&t, &x)?;
                    let diff = max_rel_diff(&[naive], &[fast]);
                    json!({ "naive": naive, "fast": fast, "max_rel_diff": diff })
                }
            };
            emit_json(&cli.out, &value)?;
            Ok(0)
        }
        Command::Bounds { tensor } => {
            let t = tensor.descriptor()?;
            emit_json(&cli.out, &serde_json::to_value(bound_report(&t))?)?;
            Ok(0)
        }
        Command::Solve {
            tensor,
            solver,
            method,
            starts,
            resolution,
        } => {
            let t = tensor.descriptor()?;
            let cfg = solver_config(solver, seed);
            cmd_solve(cli, &t, &cfg, *method, *starts, *resolution)
        }
        Command::Sweep {
            config,
            m,
            dims,
            spacing,
            lambdas,
            solver,
            method,
            timings,
        } => {
            let mut sweep_cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    serde_json::from_str::<SweepConfig>(&text)
                        .map_err(|e| LabError::Usage(format!("bad sweep config {}: {e}", path.display())))?
                }
                None => {
                    let missing = |flag: &str| LabError::Usage(format!("sweep needs --config or {flag}"));
                    let log = *spacing == SpacingArg::Log;
                    SweepConfig {
                        m: parse_usize_list(m.as_deref().ok_or_else(|| missing("--m"))?, false)?,
                        dims: DimSpec::List(parse_usize_list(
                            dims.as_deref().ok_or_else(|| missing("--dims"))?,
                            log,
                        )?),
                        lambdas: LambdaSpec::List(parse_f64_list(
                            lambdas.as_deref().ok_or_else(|| missing("--lambdas"))?,
                        )?),
                        solver: SolverSpec {
                            tol: solver.tol,
                            max_iter: solver.max_iter,
                            seed,
                            damping: solver.damping,
                        },
                        method: *method,
                        timings: false,
                    }
                }
            };
            if let Some(s) = cli.seed {
                sweep_cfg.solver.seed = s;
            }
            sweep_cfg.timings |= *timings;
            cmd_sweep(cli, &sweep_cfg)
        }
        Command::TruncationStudy {
            m,
            lambda,
            dims,
            solver,
        } => {
            let dims = parse_usize_list(dims, true)?;
            let out = run_truncation_study(*m, *lambda, &dims, &solver_config(solver, seed), cli.jobs)?;
            let mut w = sink(&cli.out)?;
            match cli.format {
                Format::Csv => {
                    study::write_csv(&out.records, &mut w)?;
                    let s = &out.summary;
                    eprintln!(
                        "rows {} not_converged {} violations {} max_mu {} bound_M {}",
                        s.rows,
                        s.not_converged,
                        s.violations,
                        s.max_mu.map(readable).unwrap_or_else(|| "-".into()),
                        readable(s.bound_m)
                    );
                }
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &out)?;
                    writeln!(w)?;
                }
            }
            w.flush()?;
            Ok(if out.summary.violations > 0 { 2 } else { 0 })
        }
        Command::CheckInequalities {
            trials,
            dims,
            a_list,
            corrupt_factor,
            witness,
        } => {
            let cfg = InequalityConfig {
                trials: *trials,
                dims: parse_usize_list(dims, false)?,
                a_list: parse_f64_list(a_list)?,
                seed,
                corrupt_factor: *corrupt_factor,
            };
            let report = check_inequalities(&cfg)?;
            write_inequality_report(cli, &report)?;
            if report.passed {
                eprintln!("pass: max ratio {}", readable(report.max_ratio));
                Ok(0)
            } else {
                dump_witnesses(&report, witness)?;
                eprintln!(
                    "FAIL: {} violations, max ratio {}, witnesses in {}",
                    report.violations,
                    readable(report.max_ratio),
                    witness.display()
                );
                Ok(2)
            }
        }
        Command::Bench {
            m,
            dims,
            lambda,
            trials,
        } => {
            let dims = parse_usize_list(dims, false)?;
            let out = run_bench(*m, &dims, *lambda, *trials, seed)?;
            let mut w = sink(&cli.out)?;
            match cli.format {
                Format::Csv => {
                    bench::write_csv(&out.records, &mut w)?;
                    if let Some(s) = out.summary.fast_loglog_slope {
                        eprintln!("fast path log-log slope {s:.3}");
                    }
                }
                Format::Json => {
                    serde_json::to_writer_pretty(&mut w, &out)?;
                    writeln!(w)?;
                }
            }
            w.flush()?;
            Ok(0)
        }
    }
}

fn cmd_solve(
    cli: &Cli,
    t: &TensorDescriptor,
    cfg: &SolverConfig,
    method: Option<SolveMethod>,
    starts: usize,
    resolution: usize,
) -> Result<u8> {
    let method = method.unwrap_or(if t.shift() > 0.0 {
        SolveMethod::Power
    } else {
        SolveMethod::Newton
    });
    let (pair, all): (Z1Pair, Option<Vec<Z1Pair>>) = match method {
        SolveMethod::Power => (z1_power_iterate(t, cfg)?, None),
        SolveMethod::Newton | SolveMethod::Grid | SolveMethod::Jacobi => {
            let pairs = match method {
                SolveMethod::Newton => z1_newton_multistart(t, starts, cfg)?,
                SolveMethod::Grid => simplex_grid_oracle(t, resolution)?,
                _ => matrix_eig_oracle(t)?,
            };
            let dominant = pairs
                .iter()
                .max_by(|a, b| a.mu.abs().total_cmp(&b.mu.abs()))
                .cloned()
                .ok_or_else(|| LabError::Internal("no converged pair found".into()))?;
            (dominant, Some(pairs))
        }
    };
    let c = bound_c(t).value;
    let m_bound = bound_m(t.shift()).ok();
    let slack = c - pair.mu.abs();
    let within = slack >= -sweep::VIOLATION_SLACK * c;

    let mut value = serde_json::to_value(&pair)?;
    let obj = value.as_object_mut().expect("pair serializes to an object");
    obj.insert("bound_C".into(), json!(c));
    obj.insert("bound_M".into(), json!(m_bound));
    obj.insert("slack".into(), json!(slack));
    obj.insert("within_bound".into(), json!(within));
    if let Some(all) = all {
        obj.insert("pairs".into(), serde_json::to_value(all)?);
    }
    emit_json(&cli.out, &value)?;

    Ok(if !pair.converged {
        eprintln!(
            "error: solver did not converge: {}",
            pair.note.as_deref().unwrap_or("no detail")
        );
        3
    } else if !within {
        2
    } else {
        0
    })
}

fn cmd_sweep(cli: &Cli, cfg: &SweepConfig) -> Result<u8> {
    let out = run_sweep(cfg, cli.jobs)?;
    let mut w = sink(&cli.out)?;
    match cli.format {
        Format::Csv => {
            sweep::write_csv(&out.records, &mut w)?;
            let s = &out.summary;
            eprintln!(
                "rows {} converged {} not_converged {} errored {} violations {} min_slack {} median_slack {} mu_monotone_in_d {}",
                s.rows,
                s.converged,
                s.not_converged,
                s.errored,
                s.violations,
                s.min_slack.map(readable).unwrap_or_else(|| "-".into()),
                s.median_slack.map(readable).unwrap_or_else(|| "-".into()),
                s.mu_monotone_in_d
            );
        }
        Format::Json => sweep::write_json(&out, &mut w)?,
    }
    w.flush()?;
    Ok(if out.summary.violations > 0 {
        2
    } else if out.summary.errored > 0 {
        3
    } else {
        0
    })
}

fn write_inequality_report(cli: &Cli, report: &InequalityReport) -> Result<()> {
    let mut w = sink(&cli.out)?;
    match cli.format {
        Format::Csv => {
            let mut c = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut w);
            c.write_record(["inequality", "d", "a", "bound", "trials", "max_ratio", "violations"])?;
            for r in &report.results {
                c.write_record([
                    serde_json::to_value(r.inequality)?
                        .as_str()
                        .unwrap_or_default()
                        .to_string(),
                    r.d.map(|d| d.to_string()).unwrap_or_default(),
                    r.a.map(crate::format::exact).unwrap_or_default(),
                    crate::format::exact(r.bound),
                    r.trials.to_string(),
                    crate::format::exact(r.max_ratio),
                    r.violations.to_string(),
                ])?;
            }
            c.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, report)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(())
}
