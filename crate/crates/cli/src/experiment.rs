//! Runs one configured experiment over all requested seeds and writes the
//! result files.
//!
//! Output directory layout:
//!
//! ```text
//! summary.json                         resolved config, per-seed results, aggregates, metadata
//! per_seed.csv                         one row per (seed, functional)
//! running/seed<S>_<functional>.csv     running estimates at every checkpoint
//! states/seed<S>.csv                   per-step chain log (logistic runs with log_states)
//! ```
//!
//! The `step` column of a running CSV is the chain iteration at which the
//! checkpoint was taken, i.e. burn-in plus the number of retained samples.

use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use lagvar::models::{self, GarchParams};
use lagvar::sampler::{self, ChainConfig, ProposalConfig};
use lagvar::{rng, AdaptiveState, LagKernel, SampleTrace, VarianceEstimate};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{parse_step_size, ExperimentConfig, ExperimentKind, SyntheticProcess};
use crate::error::{CliError, Result};

/// What was sampled. Two summaries are comparable only if their targets agree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetInfo {
    pub model: String,
    pub description: String,
    pub functionals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalResult {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub gamma2: f64,
    pub bandwidth: f64,
    pub max_lag: usize,
    pub lags_used: usize,
    pub negative_flag: bool,
    pub plug_in: Option<lagvar::NeweyWestFit>,
    /// `None` when the estimate is negative; see `ci_note`.
    pub ci: Option<(f64, f64)>,
    pub ci_note: Option<String>,
    pub oracle: Option<f64>,
    pub relative_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub acceptance_rate: Option<f64>,
    pub functionals: Vec<FunctionalResult>,
}

/// Across-seed statistics for one functional. Standard deviations use the
/// `n - 1` divisor and are `None` for a single seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub name: String,
    pub seeds: usize,
    pub gamma2_mean: f64,
    pub gamma2_sd: Option<f64>,
    pub mean_mean: f64,
    pub mean_sd: Option<f64>,
    pub oracle: Option<f64>,
    /// `(mean gamma2 - oracle) / oracle`.
    pub relative_error_of_mean: Option<f64>,
    /// Root mean squared relative error over seeds.
    pub relative_rmse: Option<f64>,
    pub negative_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub wall_clock_seconds: f64,
    pub finished_unix_seconds: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub target: TargetInfo,
    pub oracle: Option<f64>,
    pub level: f64,
    pub warnings: Vec<String>,
    pub seeds: Vec<SeedResult>,
    pub aggregates: Vec<Aggregate>,
    /// Run-dependent fields. Everything else is reproducible bit for bit.
    pub metadata: Metadata,
}

impl Summary {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Runtime(format!("{} is not a summary file: {e}", path.display())))
    }

    pub fn aggregate(&self, name: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.name == name)
    }
}

/// Traces produced by one seed, before estimation.
struct SeedTraces {
    traces: Vec<(String, SampleTrace)>,
    acceptance_rate: Option<f64>,
    state_log: Option<Vec<sampler::StateLogRow>>,
}

/// Everything a worker needs that does not depend on the seed.
enum Prepared {
    Garch(GarchParams),
    Synthetic,
    Logistic { posterior: models::LogisticPosterior, dim: usize },
}

/// Runs the experiment and writes all files under `config.out`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Summary> {
    let started = Instant::now();
    let kernel: LagKernel = config.kernel.parse().map_err(|e: lagvar::Error| CliError::Config(e.to_string()))?;
    let (prepared, target, oracle, warnings) = prepare(config)?;

    let out = &config.out;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    if config.running {
        let dir = out.join("running");
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    }
    if config.logistic.log_states && config.experiment.is_logistic() {
        let dir = out.join("states");
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    }

    let seeds: Vec<SeedResult> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, &prepared, &kernel, oracle, seed))
        .collect::<Result<_>>()?;

    let aggregates = target.functionals.iter().map(|name| aggregate(name, &seeds, oracle)).collect();
    let summary = Summary {
        config: config.clone(),
        target,
        oracle,
        level: config.level,
        warnings,
        seeds,
        aggregates,
        metadata: Metadata {
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            finished_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    write_per_seed(&summary, &out.join("per_seed.csv"))?;
    let path = out.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(summary)
}

fn prepare(config: &ExperimentConfig) -> Result<(Prepared, TargetInfo, Option<f64>, Vec<String>)> {
    match config.experiment {
        ExperimentKind::Garch => {
            let g = &config.garch;
            let params =
                GarchParams::new(g.omega, g.alpha, g.beta, g.nu).map_err(|e| CliError::Config(e.to_string()))?;
            let oracle = models::garch_sigma2_oracle(&params).ok();
            let target = TargetInfo {
                model: "garch".into(),
                description: format!("GARCH(1,1) squared returns, omega={}, alpha={}, beta={}, h0={}", g.omega, g.alpha, g.beta, g.h0),
                functionals: vec!["u2".into()],
            };
            Ok((Prepared::Garch(params), target, oracle, Vec::new()))
        }
        ExperimentKind::SyntheticOracle => {
            let s = &config.synthetic;
            let (description, oracle) = match s.process {
                SyntheticProcess::Iid => {
                    if !(s.variance.is_finite() && s.variance > 0.0) {
                        return Err(CliError::Config(format!("variance must be positive, got {}", s.variance)));
                    }
                    (format!("iid N({}, {})", s.mean, s.variance), s.variance)
                }
                SyntheticProcess::Ar1 => {
                    let oracle =
                        models::ar1_long_run_variance(s.phi).map_err(|e| CliError::Config(e.to_string()))?;
                    (format!("AR(1) phi={} unit innovations", s.phi), oracle)
                }
            };
            let target = TargetInfo { model: "synthetic".into(), description, functionals: vec!["x".into()] };
            Ok((Prepared::Synthetic, target, Some(oracle), Vec::new()))
        }
        ExperimentKind::LogisticPlain | ExperimentKind::LogisticAdaptive => {
            let l = &config.logistic;
            let data = models::load_heart_dataset(&l.data, &l.response)?;
            let dim = data.dim();
            if let Some(&bad) = l.coords.iter().find(|&&c| c > dim) {
                return Err(CliError::Config(format!("coordinate {bad} exceeds the model dimension {dim}")));
            }
            let posterior = data.posterior(l.prior_sd)?;
            let target = TargetInfo {
                model: "logistic".into(),
                description: format!(
                    "logistic posterior on {} (response={}, n_obs={}, d={}, prior_sd={}, standardized covariates, intercept first)",
                    file_name(&l.data),
                    l.response,
                    data.n_obs(),
                    dim,
                    l.prior_sd
                ),
                functionals: l.coords.iter().map(|c| format!("beta{c}")).collect(),
            };
            Ok((Prepared::Logistic { posterior, dim }, target, None, data.warnings))
        }
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

fn simulate(config: &ExperimentConfig, prepared: &Prepared, seed: u64) -> Result<SeedTraces> {
    let burn = config.burn_in;
    match prepared {
        Prepared::Garch(params) => {
            let path = models::garch_simulate(params, config.n_iter, config.garch.h0, &mut rng::seeded(seed))?;
            Ok(SeedTraces { traces: vec![("u2".into(), path.skip(burn)?)], acceptance_rate: None, state_log: None })
        }
        Prepared::Synthetic => {
            let s = &config.synthetic;
            let mut r = rng::seeded(seed);
            let path = match s.process {
                SyntheticProcess::Iid => models::iid_simulate(s.mean, s.variance, config.n_iter, &mut r)?,
                SyntheticProcess::Ar1 => models::ar1_simulate(s.phi, config.n_iter, &mut r)?,
            };
            Ok(SeedTraces { traces: vec![("x".into(), path.skip(burn)?)], acceptance_rate: None, state_log: None })
        }
        Prepared::Logistic { posterior, dim } => {
            let l = &config.logistic;
            let x0 = DVector::zeros(*dim);
            let proposal = if config.experiment == ExperimentKind::LogisticAdaptive {
                let mut state = AdaptiveState::new(&x0);
                state.sigma *= l.sigma0 / lagvar::sampler::DEFAULT_SIGMA0;
                state.epsilon = l.epsilon;
                state.r1 = l.r1;
                state.r2 = l.r2;
                state.step_size = parse_step_size(&l.step_size)?;
                ProposalConfig::Adaptive { state }
            } else {
                ProposalConfig::isotropic(*dim, l.log_scale)
            };
            let mut chain = ChainConfig::new(x0, proposal, config.n_iter, burn, seed);
            chain.log_states = l.log_states;
            let indices: Vec<usize> = l.coords.iter().map(|c| c - 1).collect();
            let closures: Vec<Box<dyn Fn(&[f64]) -> f64>> =
                indices.iter().map(|&i| Box::new(move |x: &[f64]| x[i]) as Box<dyn Fn(&[f64]) -> f64>).collect();
            let refs: Vec<&dyn Fn(&[f64]) -> f64> = closures.iter().map(|b| b.as_ref()).collect();
            let output = sampler::run_chain_multi(posterior, &chain, &refs)?;
            let traces = l.coords.iter().map(|c| format!("beta{c}")).zip(output.traces).collect();
            Ok(SeedTraces {
                traces,
                acceptance_rate: Some(output.acceptance_rate),
                state_log: l.log_states.then_some(output.log),
            })
        }
    }
}

fn run_seed(
    config: &ExperimentConfig,
    prepared: &Prepared,
    kernel: &LagKernel,
    oracle: Option<f64>,
    seed: u64,
) -> Result<SeedResult> {
    let simulated = simulate(config, prepared, seed)?;
    if let Some(log) = &simulated.state_log {
        let path = config.out.join("states").join(format!("seed{seed}.csv"));
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        sampler::write_state_log(log, std::io::BufWriter::new(file))?;
    }
    let mut functionals = Vec::with_capacity(simulated.traces.len());
    for (name, trace) in &simulated.traces {
        if config.running {
            let rows = lagvar::running_estimates(trace, kernel, &config.bandwidth_plan, config.stride)?;
            let path = config.out.join("running").join(format!("seed{seed}_{name}.csv"));
            write_running(&rows, config.burn_in, &path)?;
        }
        let est = lagvar::estimate(trace, kernel, &config.bandwidth_plan)?;
        functionals.push(finish(name, trace, est, config.level, oracle)?);
    }
    Ok(SeedResult { seed, acceptance_rate: simulated.acceptance_rate, functionals })
}

fn finish(name: &str, trace: &SampleTrace, est: VarianceEstimate, level: f64, oracle: Option<f64>) -> Result<FunctionalResult> {
    let (ci, ci_note) = match lagvar::confidence_interval(trace, &est, level) {
        Ok(ci) => (Some(ci), None),
        Err(lagvar::Error::NegativeEstimate { gamma2 }) => (
            None,
            Some(format!("negative estimate {gamma2}; use a positive semidefinite kernel or a different bandwidth")),
        ),
        Err(e) => return Err(e.into()),
    };
    Ok(FunctionalResult {
        name: name.to_string(),
        n: est.n,
        mean: est.mean,
        gamma2: est.gamma2,
        bandwidth: est.bandwidth,
        max_lag: est.max_lag,
        lags_used: est.lags_used,
        negative_flag: est.negative_flag,
        plug_in: est.plug_in,
        ci,
        ci_note,
        oracle,
        relative_error: oracle.map(|o| (est.gamma2 - o) / o),
    })
}

#[derive(Serialize)]
struct RunningRow {
    step: usize,
    gamma2: f64,
    bandwidth: f64,
    lags_used: usize,
    mean: f64,
    negative_flag: bool,
}

fn write_running(rows: &[VarianceEstimate], burn_in: usize, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for est in rows {
        w.serialize(RunningRow {
            step: burn_in + est.n,
            gamma2: est.gamma2,
            bandwidth: est.bandwidth,
            lags_used: est.lags_used,
            mean: est.mean,
            negative_flag: est.negative_flag,
        })
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct PerSeedRow<'a> {
    seed: u64,
    functional: &'a str,
    n: usize,
    mean: f64,
    gamma2: f64,
    bandwidth: f64,
    lags_used: usize,
    negative_flag: bool,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
    oracle: Option<f64>,
    relative_error: Option<f64>,
    acceptance_rate: Option<f64>,
}

fn write_per_seed(summary: &Summary, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for s in &summary.seeds {
        for f in &s.functionals {
            w.serialize(PerSeedRow {
                seed: s.seed,
                functional: &f.name,
                n: f.n,
                mean: f.mean,
                gamma2: f.gamma2,
                bandwidth: f.bandwidth,
                lags_used: f.lags_used,
                negative_flag: f.negative_flag,
                ci_lo: f.ci.map(|c| c.0),
                ci_hi: f.ci.map(|c| c.1),
                oracle: f.oracle,
                relative_error: f.relative_error,
                acceptance_rate: s.acceptance_rate,
            })
            .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::Runtime(format!("writing {}: {e}", path.display()))
}

fn aggregate(name: &str, seeds: &[SeedResult], oracle: Option<f64>) -> Aggregate {
    let rows: Vec<&FunctionalResult> =
        seeds.iter().flat_map(|s| s.functionals.iter().filter(|f| f.name == name)).collect();
    let gammas: Vec<f64> = rows.iter().map(|f| f.gamma2).collect();
    let means: Vec<f64> = rows.iter().map(|f| f.mean).collect();
    let (gamma2_mean, gamma2_sd) = mean_sd(&gammas);
    let (mean_mean, mean_sd) = mean_sd(&means);
    Aggregate {
        name: name.to_string(),
        seeds: rows.len(),
        gamma2_mean,
        gamma2_sd,
        mean_mean,
        mean_sd,
        oracle,
        relative_error_of_mean: oracle.map(|o| (gamma2_mean - o) / o),
        relative_rmse: oracle.map(|o| {
            (gammas.iter().map(|g| ((g - o) / o).powi(2)).sum::<f64>() / gammas.len() as f64).sqrt()
        }),
        negative_count: rows.iter().filter(|f| f.negative_flag).count(),
    }
}

fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1)
        .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, sd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_statistics() {
        assert_eq!(mean_sd(&[2.0]), (2.0, None));
        let (m, sd) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((sd.unwrap() - 1.0).abs() < 1e-15);
    }
}
