//! Experiment configuration.
//!
//! Settings come from three layers, later ones winning: per-experiment
//! defaults, a flat `key = value` file, and command-line flags. All layers
//! are reduced to the same string map before being resolved, so a flag and
//! a file key with the same name behave identically. Dashes and underscores
//! in keys are interchangeable.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lagvar::{BandwidthPlan, LagKernel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Garch,
    LogisticPlain,
    LogisticAdaptive,
    SyntheticOracle,
}

impl ExperimentKind {
    pub fn is_logistic(&self) -> bool {
        matches!(self, Self::LogisticPlain | Self::LogisticAdaptive)
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "garch" => Ok(Self::Garch),
            "logistic-plain" => Ok(Self::LogisticPlain),
            "logistic-adaptive" => Ok(Self::LogisticAdaptive),
            "synthetic-oracle" => Ok(Self::SyntheticOracle),
            other => Err(CliError::Config(format!(
                "unknown experiment `{other}` (expected garch, logistic-plain, logistic-adaptive or synthetic-oracle)"
            ))),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Garch => "garch",
            Self::LogisticPlain => "logistic-plain",
            Self::LogisticAdaptive => "logistic-adaptive",
            Self::SyntheticOracle => "synthetic-oracle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticProcess {
    Iid,
    Ar1,
}

/// Fully resolved experiment settings. Serialized into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub kernel: String,
    pub bandwidth: String,
    pub bandwidth_plan: BandwidthPlan,
    pub n_iter: usize,
    pub burn_in: usize,
    /// Running estimates are computed every `stride` post-burn-in samples.
    pub stride: usize,
    /// Skip running estimates and only report the final value.
    pub running: bool,
    pub seeds: Vec<u64>,
    pub level: f64,
    pub out: PathBuf,
    pub garch: GarchSettings,
    pub logistic: LogisticSettings,
    pub synthetic: SyntheticSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchSettings {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub h0: f64,
    pub nu: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticSettings {
    pub data: PathBuf,
    pub response: String,
    pub prior_sd: f64,
    /// Plain RWM proposal is `N(0, exp(log_scale) I)`.
    pub log_scale: f64,
    /// 1-based coefficient indices to track.
    pub coords: Vec<usize>,
    pub epsilon: f64,
    pub r1: f64,
    pub r2: f64,
    pub sigma0: f64,
    pub step_size: String,
    pub log_states: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSettings {
    pub process: SyntheticProcess,
    pub phi: f64,
    pub mean: f64,
    pub variance: f64,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment", "kernel", "bandwidth", "n_iter", "burn_in", "stride", "running", "seeds", "level", "out", "omega",
    "alpha", "beta", "h0", "nu", "data", "response", "prior_sd", "log_scale", "coords", "epsilon", "r1", "r2",
    "sigma0", "step_size", "log_states", "process", "phi", "mean", "variance",
];

/// Layered `key -> value` settings prior to resolution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = normalize_key(key);
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("unknown setting `{key}`")));
        }
        self.values.insert(key, value.into());
        Ok(())
    }

    /// Parses a flat `key = value` file. Blank lines and `#` comments are ignored.
    pub fn parse_flat(text: &str) -> Result<Self> {
        let mut settings = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got `{raw}`", i + 1)))?;
            settings
                .set(key.trim(), value.trim())
                .map_err(|e| CliError::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(settings)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse_flat(&text)
    }

    /// Overlays `other` on top of `self`.
    pub fn merge(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| CliError::Config(format!("invalid value `{v}` for {key}: {e}"))),
        }
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let experiment: ExperimentKind = self
            .get("experiment")
            .ok_or_else(|| CliError::Config("no experiment given".into()))?
            .parse()?;
        let d = Defaults::for_experiment(experiment);

        let kernel = self.get("kernel").unwrap_or("bartlett").to_string();
        kernel.parse::<LagKernel>().map_err(|e| CliError::Config(e.to_string()))?;
        let bandwidth = self.get("bandwidth").unwrap_or(d.bandwidth).to_string();
        let bandwidth_plan = parse_bandwidth(&bandwidth)?;

        let n_iter = self.parse("n_iter", d.n_iter)?;
        let burn_in = self.parse("burn_in", d.burn_in)?;
        if n_iter == 0 || burn_in >= n_iter {
            return Err(CliError::Config(format!("burn_in ({burn_in}) must be smaller than n_iter ({n_iter})")));
        }
        if n_iter - burn_in < 2 {
            return Err(CliError::Config("at least two post-burn-in samples are required".into()));
        }
        let stride = self.parse("stride", 1000usize)?;
        if stride == 0 {
            return Err(CliError::Config("stride must be >= 1".into()));
        }
        let level = self.parse("level", 0.95f64)?;
        if !(level > 0.0 && level < 1.0) {
            return Err(CliError::Config(format!("level must lie in (0, 1), got {level}")));
        }
        let seeds = parse_seeds(self.get("seeds").unwrap_or("1"))?;

        let garch = GarchSettings {
            omega: self.parse("omega", 1.0)?,
            alpha: self.parse("alpha", 0.1)?,
            beta: self.parse("beta", 0.7)?,
            h0: self.parse("h0", 1.0)?,
            nu: self.parse("nu", 4u32)?,
        };
        let coords = parse_coords(self.get("coords").unwrap_or("1,2,3,4"))?;
        let step_size = self.get("step_size").unwrap_or("harmonic").to_string();
        parse_step_size(&step_size)?;
        let logistic = LogisticSettings {
            data: PathBuf::from(self.get("data").unwrap_or("data/heart.csv")),
            response: self.get("response").unwrap_or("disease").to_string(),
            prior_sd: self.parse("prior_sd", lagvar::models::logistic::DEFAULT_PRIOR_SD)?,
            log_scale: self.parse("log_scale", -2.3)?,
            coords,
            epsilon: self.parse("epsilon", lagvar::sampler::DEFAULT_EPSILON)?,
            r1: self.parse("r1", lagvar::sampler::DEFAULT_RADIUS)?,
            r2: self.parse("r2", lagvar::sampler::DEFAULT_RADIUS)?,
            sigma0: self.parse("sigma0", lagvar::sampler::DEFAULT_SIGMA0)?,
            step_size,
            log_states: self.parse("log_states", false)?,
        };
        let process = match self.get("process").unwrap_or("iid") {
            "iid" => SyntheticProcess::Iid,
            "ar1" => SyntheticProcess::Ar1,
            other => return Err(CliError::Config(format!("unknown synthetic process `{other}` (expected iid or ar1)"))),
        };
        let synthetic = SyntheticSettings {
            process,
            phi: self.parse("phi", 0.5)?,
            mean: self.parse("mean", 0.0)?,
            variance: self.parse("variance", 1.0)?,
        };

        Ok(ExperimentConfig {
            experiment,
            kernel,
            bandwidth,
            bandwidth_plan,
            n_iter,
            burn_in,
            stride,
            running: self.parse("running", true)?,
            seeds,
            level,
            out: PathBuf::from(self.get("out").unwrap_or("results")),
            garch,
            logistic,
            synthetic,
        })
    }
}

/// Protocol defaults per experiment.
struct Defaults {
    n_iter: usize,
    burn_in: usize,
    bandwidth: &'static str,
}

impl Defaults {
    fn for_experiment(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::Garch => Self { n_iter: 250_000, burn_in: 10_000, bandwidth: "nw:c0=1.5" },
            ExperimentKind::LogisticPlain => Self { n_iter: 250_000, burn_in: 50_000, bandwidth: "nw:c0=20" },
            ExperimentKind::LogisticAdaptive => Self { n_iter: 250_000, burn_in: 50_000, bandwidth: "nw:c0=5" },
            ExperimentKind::SyntheticOracle => Self { n_iter: 100_000, burn_in: 0, bandwidth: "fixed:delta=0.3333333333333333,coef=1" },
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_").to_ascii_lowercase()
}

/// Parses `fixed:delta=..,coef=..`, `nw:c0=..[,m_exponent=..]` or `explicit:b=..`.
pub fn parse_bandwidth(input: &str) -> Result<BandwidthPlan> {
    let bad = |msg: &str| CliError::Config(format!("invalid bandwidth `{input}`: {msg}"));
    let (kind, rest) = input.trim().split_once(':').unwrap_or((input.trim(), ""));
    let mut params = BTreeMap::new();
    for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| bad("parameters must be key=value"))?;
        let v: f64 = v.trim().parse().map_err(|_| bad(&format!("`{v}` is not a number")))?;
        params.insert(k.trim().to_string(), v);
    }
    let mut take = |key: &str, default: Option<f64>| -> Result<f64> {
        params.remove(key).or(default).ok_or_else(|| bad(&format!("missing `{key}`")))
    };
    let plan = match kind {
        "fixed" => BandwidthPlan::FixedExponent { delta: take("delta", Some(1.0 / 3.0))?, coef: take("coef", Some(1.0))? },
        "nw" | "newey-west" => BandwidthPlan::NeweyWest {
            c0: take("c0", None)?,
            m_exponent: take("m_exponent", Some(lagvar::variance::NW_DEFAULT_M_EXPONENT))?,
        },
        "explicit" => BandwidthPlan::Explicit { b: take("b", None)? },
        _ => return Err(bad("expected fixed, nw or explicit")),
    };
    if let Some(extra) = params.keys().next() {
        return Err(bad(&format!("unknown parameter `{extra}`")));
    }
    plan.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(plan)
}

/// Parses `7`, `1,4,9` or the inclusive range `1-20`.
pub fn parse_seeds(input: &str) -> Result<Vec<u64>> {
    let bad = || CliError::Config(format!("invalid seeds `{input}` (use 7, 1,2,3 or 1-20)"));
    let input = input.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = input.split_once('-') {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if b < a {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        input.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn parse_coords(input: &str) -> Result<Vec<usize>> {
    let coords: Vec<usize> = input
        .split(',')
        .map(|s| s.trim().parse::<usize>().ok().filter(|&c| c >= 1))
        .collect::<Option<_>>()
        .ok_or_else(|| CliError::Config(format!("invalid coords `{input}` (1-based indices, comma separated)")))?;
    if coords.is_empty() {
        return Err(CliError::Config("coords must not be empty".into()));
    }
    Ok(coords)
}

pub fn parse_step_size(input: &str) -> Result<lagvar::StepSize> {
    match input.trim() {
        "harmonic" => Ok(lagvar::StepSize::Harmonic),
        other => other
            .strip_prefix("power:")
            .and_then(|e| e.parse::<f64>().ok())
            .filter(|e| *e > 0.0 && *e <= 1.0)
            .map(|exponent| lagvar::StepSize::Power { exponent })
            .ok_or_else(|| CliError::Config(format!("invalid step size `{other}` (harmonic or power:e with e in (0, 1])"))),
    }
}
