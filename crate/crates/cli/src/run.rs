//! Executes experiments, writes datasets atomically and records a manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use adiff_core::correlation::empirical_autocorrelation;
use adiff_core::distribution::{
    dyadic_subintervals, fourier_distribution, riesz_partial_distribution, tm_functional_relation_residual,
    volterra_distribution, DistributionFunction,
};
use adiff_core::periodic::{homometric_pair, homometry_report, PeriodicComb};
use adiff_core::random::{
    monte_carlo_eta, monte_carlo_report, predicted_bernoullisation_autocorrelation,
    predicted_weighted_autocorrelation, RandomCombSpec,
};
use adiff_core::spectral::{pd_bragg_spectrum, periodic_diffraction};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{
    ConfigError, ExperimentConfig, Method, RandomMode, Resolved, SpectrumSystem, OUT_DIR_ENV,
};
use crate::io::{self, Format, Table};

pub const MANIFEST_SCHEMA: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileKind {
    Table,
    Report,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub kind: FileKind,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub files: Vec<FileEntry>,
    pub timings: Timings,
    pub summary: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub compute_seconds: f64,
    pub total_seconds: f64,
}

impl Manifest {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| anyhow::anyhow!("{}: not a manifest: {e}", path.display()))?;
        if manifest.schema != MANIFEST_SCHEMA {
            anyhow::bail!("{}: unsupported manifest schema {}", path.display(), manifest.schema);
        }
        Ok(manifest)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error(transparent)]
    Failed(#[from] anyhow::Error),
}

impl From<adiff_core::Error> for RunError {
    fn from(e: adiff_core::Error) -> Self {
        match e {
            adiff_core::Error::NonConvergence { iterations, residual } => RunError::NonConvergence { iterations, residual },
            other => RunError::Failed(other.into()),
        }
    }
}

impl From<io::IoError> for RunError {
    fn from(e: io::IoError) -> Self {
        RunError::Failed(e.into())
    }
}

/// Output directory: explicit value, then the config, then `$ADIFF_OUT_DIR`,
/// then `adiff-out`.
pub fn output_dir(explicit: Option<&Path>, config: &ExperimentConfig) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| config.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("adiff-out"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

struct Artifacts {
    format: Format,
    pending: Vec<(String, FileKind, Vec<u8>)>,
}

impl Artifacts {
    fn table(&mut self, stem: &str, table: &Table) -> Result<(), RunError> {
        let mut bytes = Vec::new();
        table.write(self.format, &mut bytes)?;
        self.pending
            .push((format!("{stem}.{}", self.format.extension()), FileKind::Table, bytes));
        Ok(())
    }

    fn report<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(anyhow::Error::from)?;
        bytes.push(b'\n');
        self.pending.push((name.to_string(), FileKind::Report, bytes));
        Ok(())
    }
}

pub struct RunOutcome {
    pub manifest: Manifest,
    pub dir: PathBuf,
}

/// Validates `config`, computes, and writes datasets plus `manifest.json` into `dir`.
pub fn run(config: &ExperimentConfig, dir: &Path) -> Result<RunOutcome, RunError> {
    let start = Instant::now();
    let (resolved, mut echo) = config.resolve()?;
    echo.output.dir = None;
    let mut artifacts = Artifacts {
        format: config.output.format,
        pending: Vec::new(),
    };
    let summary = execute(&resolved, &mut artifacts)?;
    let compute_seconds = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(dir).map_err(anyhow::Error::from)?;
    let mut files = Vec::new();
    for (name, kind, bytes) in &artifacts.pending {
        write_atomic(&dir.join(name), bytes)?;
        files.push(FileEntry {
            name: name.clone(),
            kind: kind.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }
    let mut manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: echo,
        files,
        timings: Timings {
            compute_seconds,
            total_seconds: 0.0,
        },
        summary,
    };
    manifest.timings.total_seconds = start.elapsed().as_secs_f64();
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(anyhow::Error::from)?;
    bytes.push(b'\n');
    write_atomic(&dir.join(MANIFEST_NAME), &bytes)?;
    Ok(RunOutcome {
        manifest,
        dir: dir.to_path_buf(),
    })
}

fn execute(resolved: &Resolved, out: &mut Artifacts) -> Result<Value, RunError> {
    match resolved {
        Resolved::Generate(p) => {
            let (window, comb) = p.system.window(p.half_length, p.weights())?;
            out.table("window", &io::window_table(&window, &comb)?)?;
            Ok(json!({ "length": window.len(), "mean_weight": [comb.mean().re, comb.mean().im] }))
        }
        Resolved::Autocorr(p) => {
            let series = if p.exact {
                p.system.exact_series(p.max_lag)?
            } else {
                let n = p.half_length.expect("checked when resolved");
                let (_, comb) = p.system.window(n, None)?;
                empirical_autocorrelation(&comb, p.max_lag)?
            };
            out.table("autocorrelation", &io::series_table(&series))?;
            let mut summary = json!({ "label": series.label, "kind": series.kind().as_str() });
            if let Some(values) = series.exact_eta_values() {
                let centre = series.max_lag();
                summary["eta0"] = json!(adiff_core::periodic::format_exact_complex(&values[centre]));
                if centre > 0 {
                    summary["eta1"] = json!(adiff_core::periodic::format_exact_complex(&values[centre + 1]));
                }
            } else {
                summary["eta0"] = json!(series.eta(0).map(|v| v.re));
            }
            Ok(summary)
        }
        Resolved::Spectrum(p) => {
            let spectrum = match p.system {
                SpectrumSystem::Pd => {
                    let (plus, minus) = p.weights();
                    pd_bragg_spectrum(plus, minus, p.max_r.expect("defaulted"))?
                }
                SpectrumSystem::GmPair => {
                    let (a, b) = homometric_pair();
                    periodic_diffraction(if p.row == Some(2) { &b } else { &a })
                }
                SpectrumSystem::Periodic => {
                    let comb = PeriodicComb::from_integers(p.coefficients.as_deref().expect("checked"))?;
                    periodic_diffraction(&comb)
                }
            };
            spectrum
                .check_invariants()
                .map_err(|e| anyhow::anyhow!("spectrum invariant failed: {e}"))?;
            out.table("spectrum", &io::spectrum_table(&spectrum))?;
            Ok(json!({ "module": spectrum.module, "peaks": spectrum.peaks.len() }))
        }
        Resolved::Distfn(p) => {
            let grid = p.grid.expect("defaulted");
            let mut summary = json!({});
            let f: DistributionFunction = match p.method {
                Method::Fourier => {
                    let m = p.truncation.expect("defaulted");
                    let series = p.system.exact_series(m)?;
                    fourier_distribution(&series, m, grid)?
                }
                Method::Volterra => {
                    let outcome = volterra_distribution(
                        grid,
                        p.max_iterations.expect("defaulted"),
                        p.tolerance.expect("defaulted"),
                    )?;
                    summary["iterations"] = json!(outcome.iterations);
                    summary["residual"] = json!(outcome.residual);
                    outcome.distribution
                }
                Method::Riesz => {
                    let profile = p.system.riesz_profile()?;
                    riesz_partial_distribution(&profile, p.factors.expect("defaulted"), grid)?
                }
            };
            summary["F0"] = json!(f.values()[0]);
            summary["F1"] = json!(f.total_mass());
            summary["min_increment"] = json!(f.min_increment());
            summary["strictly_increasing"] = json!(f.is_strictly_increasing());
            if let Some(level) = p.residual_level {
                let report = tm_functional_relation_residual(&f, &dyadic_subintervals(level));
                summary["residual_plus"] = json!(report.max_plus);
                summary["residual_minus"] = json!(report.max_minus);
                out.report("residuals.json", &report)?;
            }
            out.table("distribution", &io::distribution_table(&f))?;
            Ok(summary)
        }
        Resolved::Homometry(p) => {
            let (a, b) = homometric_pair();
            let report = homometry_report(&a, &b, p.max_order.expect("defaulted"))?;
            out.report("homometry.json", &report)?;
            let witness = report.orders.iter().find_map(|o| o.witness.as_ref());
            Ok(json!({ "equal_up_to": report.equal_up_to(), "witness": witness }))
        }
        Resolved::Random { params: p, seed } => {
            let max_lag = p.max_lag.expect("defaulted");
            let trials = p.trials.expect("defaulted");
            let (h_plus, h_minus) = p.weights();
            let mut spec = RandomCombSpec {
                p: p.p,
                h_plus,
                h_minus,
                half_length: p.half_length,
                seed: *seed,
                base: None,
            };
            let predicted = match p.mode {
                RandomMode::Bernoulli => predicted_weighted_autocorrelation(p.p, h_plus, h_minus, max_lag)?,
                RandomMode::Bernoullisation => {
                    let base = p.base.expect("checked when resolved");
                    let (_, comb) = base.window(p.half_length + max_lag, None)?;
                    spec.base = Some(comb);
                    predicted_bernoullisation_autocorrelation(&base.exact_series(max_lag)?, p.p)?
                }
            };
            let mc = monte_carlo_eta(&spec, trials, max_lag)?;
            let report = monte_carlo_report(&spec, &mc, &predicted)?;
            out.table("bands", &io::band_table(&report.lags))?;
            out.report("montecarlo.json", &report)?;
            Ok(json!({ "all_pass": report.all_pass, "trials": trials }))
        }
    }
}

/// Re-runs the manifest's config into `dir` and lists files whose hashes differ.
pub fn rerun(manifest_path: &Path, dir: &Path) -> Result<(RunOutcome, Vec<String>), RunError> {
    let original = Manifest::load(manifest_path)?;
    let outcome = run(&original.config, dir)?;
    let mut mismatched = Vec::new();
    for entry in &original.files {
        match outcome.manifest.files.iter().find(|f| f.name == entry.name) {
            Some(f) if f.sha256 == entry.sha256 => {}
            _ => mismatched.push(entry.name.clone()),
        }
    }
    for entry in &outcome.manifest.files {
        if !original.files.iter().any(|f| f.name == entry.name) {
            mismatched.push(entry.name.clone());
        }
    }
    Ok((outcome, mismatched))
}
