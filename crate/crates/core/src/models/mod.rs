//! Targets and simulators with known answers.
//!
//! - [`garch`]: GARCH(1,1) squared returns and their closed-form long-run variance.
//! - [`logistic`]: Bayesian logistic-regression posterior with a Gaussian prior.
//! - [`heart`]: CSV loader producing a standardized design matrix.
//! - [`synthetic`]: iid and AR(1) traces plus a Gaussian target for sampler tests.

pub mod garch;
pub mod heart;
pub mod logistic;
pub mod synthetic;

pub use garch::{e1_moment, garch_simulate, garch_sigma2_oracle, GarchMoments, GarchParams};
pub use heart::{load_heart_dataset, HeartData};
pub use logistic::LogisticPosterior;
pub use synthetic::{ar1_long_run_variance, ar1_simulate, iid_simulate, GaussianTarget};
