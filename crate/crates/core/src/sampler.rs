//! Random-walk Metropolis with a fixed or adaptively learned proposal.
//!
//! The adaptive sampler proposes from `N(x, (2.38^2 / d) Sigma_n + eps I_d)`
//! and, after each Metropolis step, updates
//!
//! ```text
//! mu_{n+1}    = P_mu(mu_n + g_{n+1} (X_{n+1} - mu_n))
//! Sigma_{n+1} = P_+(Sigma_n + g_{n+1} ((X_{n+1} - mu_n)(X_{n+1} - mu_n)^T - Sigma_n))
//! ```
//!
//! with `g_{n+1} = 1 / (n + 1)` by default. `P_mu` and `P_+` rescale radially
//! onto the balls `|mu| <= r1` and `|Sigma|_F <= r2`. Both lines use the
//! pre-update mean.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::acvf::SampleTrace;
use crate::rng::{self, ChainRng};
use crate::{Error, Result};

/// Scale of the adaptive proposal, `2.38^2 / d`, is built from this constant.
pub const ADAPTIVE_SCALE: f64 = 2.38;
pub const DEFAULT_EPSILON: f64 = 1e-5;
pub const DEFAULT_RADIUS: f64 = 1e6;
pub const DEFAULT_SIGMA0: f64 = 0.1;
/// Tolerance on the smallest eigenvalue when checking positive semidefiniteness.
pub const PSD_TOLERANCE: f64 = 1e-10;

/// Unnormalized log density on `R^d`; may return `-inf` outside the support.
pub trait TargetDensity {
    fn dim(&self) -> usize;
    fn log_density(&self, x: &[f64]) -> f64;
}

impl<T: TargetDensity + ?Sized> TargetDensity for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        (**self).log_density(x)
    }
}

/// Target given by a closure.
pub struct FnTarget<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FnTarget<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64> TargetDensity for FnTarget<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// Adaptation step-size sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepSize {
    /// `1 / (n + 1)`: recursive sample mean and covariance.
    Harmonic,
    /// `(n + 1)^(-exponent)`.
    Power { exponent: f64 },
}

impl StepSize {
    /// Gain applied when moving from step `n` to `n + 1`.
    pub fn gain(&self, n: u64) -> f64 {
        let next = (n + 1) as f64;
        match *self {
            StepSize::Harmonic => 1.0 / next,
            StepSize::Power { exponent } => next.powf(-exponent),
        }
    }
}

/// Adaptation parameter `(mu_n, Sigma_n)` with its projection radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveState {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
    pub step: u64,
    pub r1: f64,
    pub r2: f64,
    pub epsilon: f64,
    pub step_size: StepSize,
}

impl AdaptiveState {
    /// Defaults: `mu_0 = x0`, `Sigma_0 = 0.1 I`, `eps = 1e-5`, `r1 = r2 = 1e6`.
    pub fn new(x0: &DVector<f64>) -> Self {
        let d = x0.len();
        Self {
            mu: x0.clone(),
            sigma: DMatrix::identity(d, d) * DEFAULT_SIGMA0,
            step: 0,
            r1: DEFAULT_RADIUS,
            r2: DEFAULT_RADIUS,
            epsilon: DEFAULT_EPSILON,
            step_size: StepSize::Harmonic,
        }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.mu.len();
        if self.sigma.nrows() != d || self.sigma.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.sigma.nrows() });
        }
        for (name, v) in [("r1", self.r1), ("r2", self.r2), ("epsilon", self.epsilon)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if let StepSize::Power { exponent } = self.step_size {
            if !(exponent > 0.0 && exponent <= 1.0) {
                return Err(Error::InvalidParameter(format!("step-size exponent must lie in (0, 1], got {exponent}")));
            }
        }
        if self.mu.norm() > self.r1 {
            return Err(Error::InvalidParameter(format!("|mu| = {} exceeds r1 = {}", self.mu.norm(), self.r1)));
        }
        if self.sigma.norm() > self.r2 {
            return Err(Error::InvalidParameter(format!("|Sigma|_F = {} exceeds r2 = {}", self.sigma.norm(), self.r2)));
        }
        if (&self.sigma - self.sigma.transpose()).amax() > 0.0 {
            return Err(Error::NotPositiveDefinite("Sigma is not symmetric".into()));
        }
        check_psd(&self.sigma)
    }

    /// Smallest eigenvalue of `Sigma`.
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.sigma)
    }

    /// In-place version of [`adapt_update`].
    pub fn update(&mut self, x: &DVector<f64>) {
        let gain = self.step_size.gain(self.step);
        let innovation = x - &self.mu;
        let mu = &self.mu + &innovation * gain;
        let mut sigma = &self.sigma + (&innovation * innovation.transpose() - &self.sigma) * gain;
        symmetrize(&mut sigma);
        self.mu = project_vector(mu, self.r1);
        self.sigma = project_matrix(sigma, self.r2);
        self.step += 1;
    }

    pub fn proposal_cov(&self) -> DMatrix<f64> {
        adaptive_proposal_cov(self)
    }
}

/// One step of the projected recursion; returns the new state.
pub fn adapt_update(state: &AdaptiveState, x_next: &DVector<f64>) -> AdaptiveState {
    let mut next = state.clone();
    next.update(x_next);
    next
}

/// `(2.38^2 / d) Sigma + eps I`.
pub fn adaptive_proposal_cov(state: &AdaptiveState) -> DMatrix<f64> {
    let d = state.dim();
    let scale = ADAPTIVE_SCALE * ADAPTIVE_SCALE / d as f64;
    &state.sigma * scale + DMatrix::identity(d, d) * state.epsilon
}

/// Radial projection onto the Euclidean ball of radius `radius`.
fn project_vector(v: DVector<f64>, radius: f64) -> DVector<f64> {
    let norm = v.norm();
    if norm > radius {
        v * (radius / norm)
    } else {
        v
    }
}

/// Radial projection onto the Frobenius ball of radius `radius`.
fn project_matrix(m: DMatrix<f64>, radius: f64) -> DMatrix<f64> {
    let norm = m.norm();
    if norm > radius {
        m * (radius / norm)
    } else {
        m
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

fn check_psd(m: &DMatrix<f64>) -> Result<()> {
    let min = min_eigenvalue(m);
    if min < -PSD_TOLERANCE {
        return Err(Error::NotPositiveDefinite(format!("smallest eigenvalue {min:e}")));
    }
    Ok(())
}

/// Gaussian increment generator `N(0, cov)`.
#[derive(Debug, Clone)]
pub struct GaussianProposal {
    factor: DMatrix<f64>,
}

impl GaussianProposal {
    /// Accepts positive semidefinite covariances. Positive definite ones are
    /// factored by Cholesky; singular ones through their eigendecomposition.
    pub fn new(cov: &DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() {
            return Err(Error::DimensionMismatch { expected: cov.nrows(), got: cov.ncols() });
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotPositiveDefinite("covariance has non-finite entries".into()));
        }
        if (cov - cov.transpose()).amax() > PSD_TOLERANCE * cov.amax().max(1.0) {
            return Err(Error::NotPositiveDefinite("covariance is not symmetric".into()));
        }
        if let Some(chol) = cov.clone().cholesky() {
            return Ok(Self { factor: chol.l() });
        }
        let eig = cov.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min < -PSD_TOLERANCE {
            return Err(Error::NotPositiveDefinite(format!("smallest eigenvalue {min:e}")));
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        Ok(Self { factor: &eig.eigenvectors * DMatrix::from_diagonal(&roots) })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_iterator(self.dim(), (0..self.dim()).map(|_| StandardNormal.sample(rng)));
        &self.factor * z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RwmStep {
    pub x: DVector<f64>,
    pub log_density: f64,
    pub accepted: bool,
    /// `log pi(Y) - log pi(x)`; the acceptance probability is `min(1, exp(log_ratio))`.
    pub log_ratio: f64,
}

/// One Metropolis step from `x` (with cached `log pi(x)`).
///
/// Exactly one uniform is drawn per step after the proposal, so the random
/// stream does not depend on acceptance outcomes.
pub fn rwm_step<T, R>(target: &T, x: &DVector<f64>, log_px: f64, proposal: &GaussianProposal, rng: &mut R) -> RwmStep
where
    T: TargetDensity + ?Sized,
    R: Rng + ?Sized,
{
    let y = x + proposal.sample(rng);
    let log_py = target.log_density(y.as_slice());
    let log_ratio = if log_py.is_nan() { f64::NEG_INFINITY } else { log_py - log_px };
    let u: f64 = rng.random();
    let accepted = log_py > f64::NEG_INFINITY && (log_ratio >= 0.0 || u.ln() < log_ratio);
    if accepted {
        RwmStep { x: y, log_density: log_py, accepted, log_ratio }
    } else {
        RwmStep { x: x.clone(), log_density: log_px, accepted, log_ratio }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProposalConfig {
    Fixed { cov: DMatrix<f64> },
    Adaptive { state: AdaptiveState },
}

impl ProposalConfig {
    /// `N(0, e^log_scale I_d)` proposal increments.
    pub fn isotropic(dim: usize, log_scale: f64) -> Self {
        Self::Fixed { cov: DMatrix::identity(dim, dim) * log_scale.exp() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_iter: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub x0: DVector<f64>,
    pub proposal: ProposalConfig,
    /// Record every `stride`-th post-burn-in state.
    pub stride: usize,
    /// Keep a per-step log of acceptance and adaptation norms.
    pub log_states: bool,
}

impl ChainConfig {
    pub fn new(x0: DVector<f64>, proposal: ProposalConfig, n_iter: usize, burn_in: usize, seed: u64) -> Self {
        Self { n_iter, burn_in, seed, x0, proposal, stride: 1, log_states: false }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.n_iter == 0 || self.burn_in >= self.n_iter {
            return Err(Error::InvalidParameter(format!(
                "burn-in {} must be smaller than the number of iterations {}",
                self.burn_in, self.n_iter
            )));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("stride must be >= 1".into()));
        }
        if self.x0.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.x0.len() });
        }
        match &self.proposal {
            ProposalConfig::Fixed { cov } => {
                if cov.nrows() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: cov.nrows() });
                }
                GaussianProposal::new(cov).map(|_| ())
            }
            ProposalConfig::Adaptive { state } => {
                if state.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: state.dim() });
                }
                state.validate()
            }
        }
    }
}

/// Per-step record of a chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateLogRow {
    pub step: u64,
    pub accepted: bool,
    pub h: f64,
    pub mu_norm: Option<f64>,
    pub sigma_frobenius: Option<f64>,
}

/// Outcome of one transition of a [`Chain`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub step: u64,
    pub accepted: bool,
    /// `|mu_{n+1} - mu_n|`, zero for fixed proposals.
    pub mu_change: f64,
    /// `|Sigma_{n+1} - Sigma_n|_F`, zero for fixed proposals.
    pub sigma_change: f64,
}

enum Kernel {
    Fixed(GaussianProposal),
    Adaptive(AdaptiveState),
}

/// A running chain that owns its state and generator.
pub struct Chain<T> {
    target: T,
    x: DVector<f64>,
    log_px: f64,
    kernel: Kernel,
    rng: ChainRng,
    step: u64,
    accepted: u64,
}

impl<T: TargetDensity> Chain<T> {
    pub fn new(target: T, config: &ChainConfig) -> Result<Self> {
        config.validate(target.dim())?;
        let log_px = target.log_density(config.x0.as_slice());
        if !(log_px > f64::NEG_INFINITY) || log_px.is_nan() {
            return Err(Error::ZeroDensityStart);
        }
        let kernel = match &config.proposal {
            ProposalConfig::Fixed { cov } => Kernel::Fixed(GaussianProposal::new(cov)?),
            ProposalConfig::Adaptive { state } => Kernel::Adaptive(state.clone()),
        };
        Ok(Self { target, x: config.x0.clone(), log_px, kernel, rng: rng::seeded(config.seed), step: 0, accepted: 0 })
    }

    pub fn x(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn adaptive_state(&self) -> Option<&AdaptiveState> {
        match &self.kernel {
            Kernel::Adaptive(s) => Some(s),
            Kernel::Fixed(_) => None,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.step == 0 {
            0.0
        } else {
            self.accepted as f64 / self.step as f64
        }
    }

    /// Advances the chain by one transition (and one adaptation in adaptive mode).
    pub fn step(&mut self) -> Result<StepReport> {
        let (result, mu_change, sigma_change) = match &mut self.kernel {
            Kernel::Fixed(proposal) => (rwm_step(&self.target, &self.x, self.log_px, proposal, &mut self.rng), 0.0, 0.0),
            Kernel::Adaptive(state) => {
                let proposal = GaussianProposal::new(&state.proposal_cov())?;
                let result = rwm_step(&self.target, &self.x, self.log_px, &proposal, &mut self.rng);
                let (mu, sigma) = (state.mu.clone(), state.sigma.clone());
                state.update(&result.x);
                (result, (&state.mu - mu).norm(), (&state.sigma - sigma).norm())
            }
        };
        self.x = result.x;
        self.log_px = result.log_density;
        self.step += 1;
        if result.accepted {
            self.accepted += 1;
        }
        Ok(StepReport { step: self.step, accepted: result.accepted, mu_change, sigma_change })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    /// One trace per recorded functional, in the order given.
    pub traces: Vec<SampleTrace>,
    pub acceptance_rate: f64,
    pub final_x: DVector<f64>,
    pub final_state: Option<AdaptiveState>,
    pub log: Vec<StateLogRow>,
}

impl ChainOutput {
    pub fn trace(&self) -> &SampleTrace {
        &self.traces[0]
    }
}

/// Runs the chain and records `h(X_k)` for `k > burn_in` at the configured stride.
pub fn run_chain<T, H>(target: T, config: &ChainConfig, h: H) -> Result<ChainOutput>
where
    T: TargetDensity,
    H: Fn(&[f64]) -> f64,
{
    run_chain_multi(target, config, &[&h])
}

/// Like [`run_chain`], recording several functionals of the same path.
pub fn run_chain_multi<T: TargetDensity>(
    target: T,
    config: &ChainConfig,
    functionals: &[&dyn Fn(&[f64]) -> f64],
) -> Result<ChainOutput> {
    if functionals.is_empty() {
        return Err(Error::InvalidParameter("at least one functional is required".into()));
    }
    let mut chain = Chain::new(target, config)?;
    let kept = (config.n_iter - config.burn_in).div_ceil(config.stride);
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(kept); functionals.len()];
    let mut log = Vec::new();
    for k in 1..=config.n_iter {
        let report = chain.step()?;
        let record = k > config.burn_in && (k - config.burn_in - 1) % config.stride == 0;
        if record {
            for (f, out) in functionals.iter().zip(values.iter_mut()) {
                out.push(f(chain.x.as_slice()));
            }
        }
        if config.log_states {
            let state = chain.adaptive_state();
            log.push(StateLogRow {
                step: report.step,
                accepted: report.accepted,
                h: functionals[0](chain.x.as_slice()),
                mu_norm: state.map(|s| s.mu.norm()),
                sigma_frobenius: state.map(|s| s.sigma.norm()),
            });
        }
    }
    let traces = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| SampleTrace::new(format!("h{i}"), v))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainOutput {
        traces,
        acceptance_rate: chain.acceptance_rate(),
        final_x: chain.x.clone(),
        final_state: chain.adaptive_state().cloned(),
        log,
    })
}

/// Writes a state log as CSV with columns `step,accepted,h,mu_norm,sigma_frobenius`.
pub fn write_state_log<W: std::io::Write>(rows: &[StateLogRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
