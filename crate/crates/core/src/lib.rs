//! Long-run variance estimation for Monte Carlo averages produced by
//! adaptive and non-adaptive Markov chains.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernel`]: truncated lag-window kernels (power family, Parzen, custom)
//!   and their smoothness classification.
//! - [`acvf`]: sample mean and 1/n-normalised sample autocovariances, with an
//!   FFT path checked against the direct definition.
//! - [`variance`]: the lag-window estimator, bandwidth plans (fixed exponent,
//!   Newey-West plug-in, explicit) and CLT confidence intervals.
//! - [`sampler`]: random-walk Metropolis and the projected adaptive
//!   Metropolis recursion.
//! - [`models`]: GARCH(1,1) with its closed-form long-run variance, the
//!   Bayesian logistic-regression posterior, the heart-data loader and
//!   synthetic AR(1)/iid oracles.
//!
//! ```
//! use lagvar::{estimate, BandwidthPlan, LagKernel, SampleTrace};
//!
//! let trace = SampleTrace::new("toy", vec![1.0, -1.0, 1.0, -1.0]).unwrap();
//! let est = estimate(&trace, &LagKernel::bartlett(), &BandwidthPlan::Explicit { b: 0.6 }).unwrap();
//! assert!((est.gamma2 - 0.4).abs() < 1e-12);
//! ```

pub mod acvf;
pub mod kernel;
pub mod models;
pub mod rng;
pub mod sampler;
pub mod variance;

mod error;

pub use acvf::{acvf, acvf_direct, sample_autocorrelations, sample_mean, AcvfResult, SampleTrace};
pub use error::{Error, Result};
pub use kernel::{KernelKind, LagKernel, Smoothness};
pub use sampler::{
    adapt_update, adaptive_proposal_cov, run_chain, rwm_step, AdaptiveState, ChainConfig,
    ChainOutput, FnTarget, ProposalConfig, StepSize, TargetDensity,
};
pub use variance::{
    confidence_interval, default_delta, estimate, newey_west_c, running_estimates, BandwidthPlan,
    NeweyWestFit, VarianceEstimate,
};
