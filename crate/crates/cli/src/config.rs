//! Experiment configuration with strict, per-command parameter parsing.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::io::Format;
use crate::systems::System;

pub const OUT_DIR_ENV: &str = "ADIFF_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Generate,
    Autocorr,
    Spectrum,
    Distfn,
    Homometry,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: Format,
}

fn default_format() -> Format {
    Format::Csv
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            format: Format::Csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

fn usage(message: impl Into<String>) -> ConfigError {
    ConfigError(message.into())
}

type Pair = [f64; 2];

fn complex(pair: Pair) -> num_complex::Complex64 {
    num_complex::Complex64::new(pair[0], pair[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateParams {
    pub system: System,
    pub half_length: usize,
    /// pd only: weights of a and b.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_plus: Option<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_minus: Option<Pair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutocorrParams {
    pub system: System,
    #[serde(default)]
    pub exact: bool,
    pub max_lag: usize,
    /// Window half-length for the empirical estimator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSystem {
    Pd,
    GmPair,
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub system: SpectrumSystem,
    /// gm-pair: which row of the homometric pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row: Option<u8>,
    /// periodic: one period of integer coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<i64>>,
    /// pd: largest r in k = m/2^r.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_plus: Option<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_minus: Option<Pair>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fourier,
    Volterra,
    Riesz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistfnParams {
    pub system: System,
    pub method: Method,
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<u32>,
    /// TM only: residuals over dyadic intervals of width 2^−level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_level: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomometryParams {
    pub table: String,
    #[serde(default)]
    pub max_order: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RandomMode {
    Bernoulli,
    Bernoullisation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomParams {
    pub mode: RandomMode,
    pub p: f64,
    pub half_length: usize,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub max_lag: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<System>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_plus: Option<Pair>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_minus: Option<Pair>,
}

/// Parameters with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub enum Resolved {
    Generate(GenerateParams),
    Autocorr(AutocorrParams),
    Spectrum(SpectrumParams),
    Distfn(DistfnParams),
    Homometry(HomometryParams),
    Random { params: RandomParams, seed: u64 },
}

fn parse<T: serde::de::DeserializeOwned>(parameters: &Map<String, Value>) -> Result<T, ConfigError> {
    serde_json::from_value(Value::Object(parameters.clone())).map_err(|e| usage(e.to_string()))
}

fn to_map<T: Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value).expect("parameters serialise") {
        Value::Object(map) => map,
        _ => unreachable!("parameter structs are objects"),
    }
}

fn check_pd_weights(system: System, h_plus: Option<Pair>, h_minus: Option<Pair>) -> Result<(), ConfigError> {
    if (h_plus.is_some() || h_minus.is_some()) && system != System::Pd {
        return Err(usage("h_plus/h_minus apply only to pd"));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn new(command: Command, parameters: Map<String, Value>) -> Self {
        Self {
            command,
            parameters,
            output: OutputSpec::default(),
            seed: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| usage(e.to_string()))
    }

    /// Validates and fills defaults. The resolved form is what manifests embed.
    pub fn resolve(&self) -> Result<(Resolved, ExperimentConfig), ConfigError> {
        if self.seed.is_some() && self.command != Command::Random {
            return Err(usage("seed applies only to the random command"));
        }
        let mut echo = self.clone();
        let resolved = match self.command {
            Command::Generate => {
                let p: GenerateParams = parse(&self.parameters)?;
                check_pd_weights(p.system, p.h_plus, p.h_minus)?;
                echo.parameters = to_map(&p);
                Resolved::Generate(p)
            }
            Command::Autocorr => {
                let p: AutocorrParams = parse(&self.parameters)?;
                if p.exact && p.half_length.is_some() {
                    return Err(usage("half_length applies only to empirical series"));
                }
                if !p.exact {
                    let n = p.half_length.ok_or_else(|| usage("empirical series need half_length"))?;
                    if p.max_lag > n {
                        return Err(usage(format!("max_lag {} exceeds half_length {n}", p.max_lag)));
                    }
                }
                if p.exact && p.system == System::Pd {
                    return Err(usage("no exact recursion for pd"));
                }
                echo.parameters = to_map(&p);
                Resolved::Autocorr(p)
            }
            Command::Spectrum => {
                let mut p: SpectrumParams = parse(&self.parameters)?;
                match p.system {
                    SpectrumSystem::Pd => {
                        if p.row.is_some() || p.coefficients.is_some() {
                            return Err(usage("pd takes max_r, h_plus and h_minus only"));
                        }
                        p.max_r.get_or_insert(6);
                        p.h_plus.get_or_insert([1.0, 0.0]);
                        p.h_minus.get_or_insert([0.0, 0.0]);
                    }
                    SpectrumSystem::GmPair => {
                        if p.coefficients.is_some() || p.max_r.is_some() || p.h_plus.is_some() || p.h_minus.is_some() {
                            return Err(usage("gm-pair takes row only"));
                        }
                        let row = *p.row.get_or_insert(1);
                        if !(1..=2).contains(&row) {
                            return Err(usage(format!("row must be 1 or 2, got {row}")));
                        }
                    }
                    SpectrumSystem::Periodic => {
                        if p.row.is_some() || p.max_r.is_some() || p.h_plus.is_some() || p.h_minus.is_some() {
                            return Err(usage("periodic takes coefficients only"));
                        }
                        if p.coefficients.as_ref().is_none_or(|c| c.is_empty()) {
                            return Err(usage("periodic needs a nonempty coefficient list"));
                        }
                    }
                }
                echo.parameters = to_map(&p);
                Resolved::Spectrum(p)
            }
            Command::Distfn => {
                use adiff_core::distribution as d;
                let mut p: DistfnParams = parse(&self.parameters)?;
                p.grid.get_or_insert(d::DEFAULT_GRID);
                match p.method {
                    Method::Fourier => {
                        p.truncation.get_or_insert(d::DEFAULT_FOURIER_TRUNCATION);
                        if p.system == System::Pd {
                            return Err(usage("Fourier route needs an exact series; pd has none"));
                        }
                    }
                    Method::Volterra => {
                        if p.system != System::Tm {
                            return Err(usage("the Volterra iteration is implemented for tm only"));
                        }
                        p.tolerance.get_or_insert(d::DEFAULT_VOLTERRA_TOLERANCE);
                        p.max_iterations.get_or_insert(d::DEFAULT_VOLTERRA_ITERATIONS);
                    }
                    Method::Riesz => {
                        let (k, l) = match p.system {
                            System::Tm => (1, 1),
                            System::Gm(k, l) => (k, l),
                            other => return Err(usage(format!("no Riesz product for {other}"))),
                        };
                        let profile = d::RieszProfile::new(k, l).map_err(|e| usage(e.to_string()))?;
                        p.factors.get_or_insert(profile.default_factors());
                    }
                }
                let stray = match p.method {
                    Method::Fourier => p.tolerance.is_some() || p.max_iterations.is_some() || p.factors.is_some(),
                    Method::Volterra => p.truncation.is_some() || p.factors.is_some(),
                    Method::Riesz => p.truncation.is_some() || p.tolerance.is_some() || p.max_iterations.is_some(),
                };
                if stray {
                    return Err(usage("parameter does not apply to the chosen method"));
                }
                if p.system == System::Tm {
                    p.residual_level.get_or_insert(6);
                } else if p.residual_level.is_some() {
                    return Err(usage("functional-relation residuals apply to tm only"));
                }
                echo.parameters = to_map(&p);
                Resolved::Distfn(p)
            }
            Command::Homometry => {
                let mut p: HomometryParams = parse(&self.parameters)?;
                if p.table != "gm-pair" {
                    return Err(usage(format!("unknown table '{}' (expected gm-pair)", p.table)));
                }
                if *p.max_order.get_or_insert(6) < 2 {
                    return Err(usage("max_order must be at least 2"));
                }
                echo.parameters = to_map(&p);
                Resolved::Homometry(p)
            }
            Command::Random => {
                let mut p: RandomParams = parse(&self.parameters)?;
                if !(0.0..=1.0).contains(&p.p) {
                    return Err(usage(format!("p = {} is not in [0, 1]", p.p)));
                }
                if *p.trials.get_or_insert(1) == 0 {
                    return Err(usage("trials must be at least 1"));
                }
                p.max_lag.get_or_insert(8);
                match p.mode {
                    RandomMode::Bernoulli => {
                        if p.base.is_some() {
                            return Err(usage("base applies only to bernoullisation"));
                        }
                        p.h_plus.get_or_insert([1.0, 0.0]);
                        p.h_minus.get_or_insert([-1.0, 0.0]);
                    }
                    RandomMode::Bernoullisation => {
                        let base = p.base.ok_or_else(|| usage("bernoullisation needs a base system"))?;
                        if !base.is_signed() {
                            return Err(usage(format!("base {base} is not a ±1 sequence")));
                        }
                        if p.h_plus.is_some() || p.h_minus.is_some() {
                            return Err(usage("h_plus/h_minus apply only to bernoulli"));
                        }
                    }
                }
                let seed = self.seed.unwrap_or(0);
                echo.seed = Some(seed);
                echo.parameters = to_map(&p);
                Resolved::Random { params: p, seed }
            }
        };
        Ok((resolved, echo))
    }
}

impl GenerateParams {
    pub fn weights(&self) -> Option<(num_complex::Complex64, num_complex::Complex64)> {
        match (self.h_plus, self.h_minus) {
            (None, None) => None,
            (a, b) => Some((complex(a.unwrap_or([1.0, 0.0])), complex(b.unwrap_or([0.0, 0.0])))),
        }
    }
}

impl SpectrumParams {
    pub fn weights(&self) -> (num_complex::Complex64, num_complex::Complex64) {
        (
            complex(self.h_plus.unwrap_or([1.0, 0.0])),
            complex(self.h_minus.unwrap_or([0.0, 0.0])),
        )
    }
}

impl RandomParams {
    pub fn weights(&self) -> (num_complex::Complex64, num_complex::Complex64) {
        (
            complex(self.h_plus.unwrap_or([1.0, 0.0])),
            complex(self.h_minus.unwrap_or([-1.0, 0.0])),
        )
    }
}
