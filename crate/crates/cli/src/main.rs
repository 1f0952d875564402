use std::path::PathBuf;
use std::process::ExitCode;

use adiff_cli::compare::{compare, CompareError};
use adiff_cli::config::{Command, ExperimentConfig, Method, RandomMode};
use adiff_cli::io::Format;
use adiff_cli::run::{output_dir, rerun, run, RunError};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_COMPARE_FAIL: u8 = 4;

/// Autocorrelation and diffraction of weighted Dirac combs on ℤ.
#[derive(Parser)]
#[command(name = "adiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args, Clone)]
struct Output {
    /// Output directory (default: $ADIFF_OUT_DIR, else ./adiff-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Dataset format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Sub {
    /// Symbolic window and weights of a built-in system on [−N, N].
    Generate {
        #[arg(long)]
        system: String,
        #[arg(long)]
        half_length: usize,
        /// pd weight of a, as re,im.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        h_plus: Option<[f64; 2]>,
        /// pd weight of b, as re,im.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        h_minus: Option<[f64; 2]>,
        #[command(flatten)]
        output: Output,
    },
    /// Exact or empirical autocorrelation coefficients.
    Autocorr {
        #[arg(long)]
        system: String,
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        max_lag: usize,
        #[arg(long)]
        half_length: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Bragg spectrum: pd, a row of the gm-pair table, or a periodic comb.
    Spectrum {
        #[arg(long)]
        system: String,
        #[arg(long)]
        row: Option<u8>,
        /// Comma-separated integer coefficients of one period.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coefficients: Option<Vec<i64>>,
        #[arg(long)]
        max_r: Option<u32>,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        h_plus: Option<[f64; 2]>,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        h_minus: Option<[f64; 2]>,
        #[command(flatten)]
        output: Output,
    },
    /// Distribution function F(x) = γ̂([0, x]) on [0, 1].
    Distfn {
        #[arg(long)]
        system: String,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        max_iterations: Option<usize>,
        #[arg(long)]
        factors: Option<u32>,
        #[arg(long)]
        residual_level: Option<u32>,
        #[command(flatten)]
        output: Output,
    },
    /// Higher-order correlation comparison of the homometric pair.
    Homometry {
        #[arg(long, default_value = "gm-pair")]
        table: String,
        #[arg(long)]
        max_order: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo check of random-comb autocorrelation predictions.
    Random {
        #[arg(long, value_enum)]
        mode: RandomMode,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        half_length: usize,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        max_lag: Option<usize>,
        #[arg(long)]
        base: Option<String>,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        h_plus: Option<[f64; 2]>,
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        h_minus: Option<[f64; 2]>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Regenerate a run from its manifest and check the files are bit-identical.
    Rerun {
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-column max absolute deviation between two runs or datasets.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
    },
}

fn parse_pair(text: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = text.split(',').collect();
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"));
    match parts.as_slice() {
        [re] => Ok([parse(re)?, 0.0]),
        [re, im] => Ok([parse(re)?, parse(im)?]),
        _ => Err(format!("expected re or re,im, got '{text}'")),
    }
}

/// Collects the flags that were given into a parameter map.
fn params(pairs: Vec<(&str, Option<Value>)>) -> Map<String, Value> {
    pairs
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
}

fn some<T: serde::Serialize>(value: T) -> Option<Value> {
    Some(json!(value))
}

fn opt<T: serde::Serialize>(value: Option<T>) -> Option<Value> {
    value.map(|v| json!(v))
}

fn experiment(command: Command, parameters: Map<String, Value>, output: &Output, seed: Option<u64>) -> (ExperimentConfig, Output) {
    let mut config = ExperimentConfig::new(command, parameters);
    config.output.format = output.format.unwrap_or(Format::Csv);
    config.seed = seed;
    (config, output.clone())
}

fn execute(config: ExperimentConfig, output: Output) -> ExitCode {
    let dir = output_dir(output.out.as_deref(), &config);
    report_run(run(&config, &dir))
}

fn report_run(result: Result<adiff_cli::run::RunOutcome, RunError>) -> ExitCode {
    match result {
        Ok(outcome) => {
            println!("{}", serde_json::to_string_pretty(&outcome.manifest.summary).unwrap_or_default());
            println!("wrote {}", outcome.dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => exit_for(&e),
    }
}

fn exit_for(e: &RunError) -> ExitCode {
    eprintln!("adiff: {e}");
    ExitCode::from(match e {
        RunError::Config(_) => EXIT_USAGE,
        RunError::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        RunError::Failed(_) => EXIT_ERROR,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, output) = match cli.command {
        Sub::Generate { system, half_length, h_plus, h_minus, output } => experiment(
            Command::Generate,
            params(vec![
                ("system", some(system)),
                ("half_length", some(half_length)),
                ("h_plus", opt(h_plus)),
                ("h_minus", opt(h_minus)),
            ]),
            &output,
            None,
        ),
        Sub::Autocorr { system, exact, max_lag, half_length, output } => experiment(
            Command::Autocorr,
            params(vec![
                ("system", some(system)),
                ("exact", some(exact)),
                ("max_lag", some(max_lag)),
                ("half_length", opt(half_length)),
            ]),
            &output,
            None,
        ),
        Sub::Spectrum { system, row, coefficients, max_r, h_plus, h_minus, output } => experiment(
            Command::Spectrum,
            params(vec![
                ("system", some(system)),
                ("row", opt(row)),
                ("coefficients", opt(coefficients)),
                ("max_r", opt(max_r)),
                ("h_plus", opt(h_plus)),
                ("h_minus", opt(h_minus)),
            ]),
            &output,
            None,
        ),
        Sub::Distfn { system, method, grid, truncation, tolerance, max_iterations, factors, residual_level, output } => {
            experiment(
                Command::Distfn,
                params(vec![
                    ("system", some(system)),
                    ("method", some(method)),
                    ("grid", opt(grid)),
                    ("truncation", opt(truncation)),
                    ("tolerance", opt(tolerance)),
                    ("max_iterations", opt(max_iterations)),
                    ("factors", opt(factors)),
                    ("residual_level", opt(residual_level)),
                ]),
                &output,
                None,
            )
        }
        Sub::Homometry { table, max_order, output } => experiment(
            Command::Homometry,
            params(vec![("table", some(table)), ("max_order", opt(max_order))]),
            &output,
            None,
        ),
        Sub::Random { mode, p, half_length, trials, max_lag, base, h_plus, h_minus, seed, output } => experiment(
            Command::Random,
            params(vec![
                ("mode", some(mode)),
                ("p", some(p)),
                ("half_length", some(half_length)),
                ("trials", opt(trials)),
                ("max_lag", opt(max_lag)),
                ("base", opt(base)),
                ("h_plus", opt(h_plus)),
                ("h_minus", opt(h_minus)),
            ]),
            &output,
            seed,
        ),
        Sub::Run { config, output } => {
            let loaded = std::fs::read_to_string(&config)
                .map_err(|e| format!("{}: {e}", config.display()))
                .and_then(|text| ExperimentConfig::from_json(&text).map_err(|e| e.to_string()));
            match loaded {
                Ok(mut c) => {
                    if let Some(format) = output.format {
                        c.output.format = format;
                    }
                    (c, output)
                }
                Err(e) => {
                    eprintln!("adiff: {e}");
                    return ExitCode::from(EXIT_USAGE);
                }
            }
        }
        Sub::Rerun { manifest, out } => {
            return match rerun(&manifest, &out) {
                Ok((_, mismatched)) if mismatched.is_empty() => {
                    println!("reproduced bit-identically in {}", out.display());
                    ExitCode::SUCCESS
                }
                Ok((_, mismatched)) => {
                    eprintln!("adiff: files differ from the manifest: {}", mismatched.join(", "));
                    ExitCode::from(EXIT_COMPARE_FAIL)
                }
                Err(e) => exit_for(&e),
            };
        }
        Sub::Compare { a, b, tolerance } => {
            return match compare(&a, &b, tolerance) {
                Ok(report) => {
                    println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
                    if report.pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_COMPARE_FAIL)
                    }
                }
                Err(e @ CompareError::Schema { .. }) => {
                    eprintln!("adiff: {e}");
                    ExitCode::from(EXIT_ERROR)
                }
                Err(e) => {
                    eprintln!("adiff: {e}");
                    ExitCode::from(EXIT_ERROR)
                }
            };
        }
    };
    execute(config, output)
}
