//! GARCH(1,1) squared returns.
//!
//! ```text
//! u_n = sqrt(h_n) eps_n,   h_n = omega + beta h_{n-1} + alpha u_{n-1}^2,   u_0 ~ N(0, h_0)
//! ```
//!
//! The chain `(u_n, h_n)` is geometrically ergodic when
//! `E[(beta + alpha Z^2)^nu] < 1` for some `nu > 0`. When the fourth moment of
//! `u` exists, `u^2` has autocorrelations `rho_n = rho_1 (alpha + beta)^(n-1)`
//! and a closed-form long-run variance.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::acvf::SampleTrace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Moment order at which the ergodicity condition was verified.
    pub nu: u32,
}

impl GarchParams {
    pub fn new(omega: f64, alpha: f64, beta: f64, nu: u32) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if !(alpha.is_finite() && alpha >= 0.0 && beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha and beta must be nonnegative, got ({alpha}, {beta})"
            )));
        }
        if nu == 0 {
            return Err(Error::InvalidParameter("moment order nu must be >= 1".into()));
        }
        let value = e1_moment(alpha, beta, nu);
        if value >= 1.0 {
            return Err(Error::MomentConditionViolated { nu, value });
        }
        Ok(Self { omega, alpha, beta, nu })
    }
}

/// `E[(beta + alpha Z^2)^nu]` for standard normal `Z`, expanded binomially
/// with `E[Z^(2k)] = (2k - 1)!!`.
pub fn e1_moment(alpha: f64, beta: f64, nu: u32) -> f64 {
    let mut total = 0.0;
    let mut binom = 1.0;
    let mut double_factorial = 1.0;
    for k in 0..=nu {
        if k > 0 {
            binom *= (nu - k + 1) as f64 / k as f64;
            double_factorial *= (2 * k - 1) as f64;
        }
        total += binom * beta.powi((nu - k) as i32) * alpha.powi(k as i32) * double_factorial;
    }
    total
}

/// Squared returns `u_0^2, ..., u_{n-1}^2` of the GARCH(1,1) recursion.
///
/// The full path is returned; burn-in is left to the caller.
pub fn garch_simulate<R: Rng + ?Sized>(params: &GarchParams, n: usize, h0: f64, rng: &mut R) -> Result<SampleTrace> {
    if n == 0 {
        return Err(Error::EmptyTrace);
    }
    if !(h0.is_finite() && h0 > 0.0) {
        return Err(Error::InvalidParameter(format!("h0 must be positive, got {h0}")));
    }
    let GarchParams { omega, alpha, beta, .. } = *params;
    let mut values = Vec::with_capacity(n);
    let mut h = h0;
    let eps: f64 = StandardNormal.sample(rng);
    let mut u2 = h * eps * eps;
    values.push(u2);
    for _ in 1..n {
        h = omega + beta * h + alpha * u2;
        let eps: f64 = StandardNormal.sample(rng);
        u2 = h * eps * eps;
        values.push(u2);
    }
    SampleTrace::new(format!("garch(omega={omega},alpha={alpha},beta={beta}) u^2"), values)
}

/// Stationary moments of `u^2` under GARCH(1,1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchMoments {
    pub mean: f64,
    pub variance: f64,
    pub rho1: f64,
    /// Long-run variance of `u^2`.
    pub sigma2: f64,
}

impl GarchMoments {
    pub fn new(params: &GarchParams) -> Result<Self> {
        let GarchParams { omega, alpha, beta, .. } = *params;
        let persistence = 1.0 - alpha - beta;
        let fourth = 1.0 - beta * beta - 2.0 * alpha * beta - 3.0 * alpha * alpha;
        let rho_den = 1.0 - 2.0 * alpha * beta - beta * beta;
        if persistence <= 0.0 {
            return Err(Error::NoFourthMoment(format!("1 - alpha - beta = {persistence} <= 0")));
        }
        if fourth <= 0.0 {
            return Err(Error::NoFourthMoment(format!("1 - beta^2 - 2 alpha beta - 3 alpha^2 = {fourth} <= 0")));
        }
        if rho_den <= 0.0 {
            return Err(Error::NoFourthMoment(format!("1 - 2 alpha beta - beta^2 = {rho_den} <= 0")));
        }
        let mean = omega / persistence;
        let rho1 = alpha * (1.0 - alpha * beta - beta * beta) / rho_den;
        let variance = 3.0 * omega * omega * (1.0 + alpha + beta) / (persistence * fourth) - mean * mean;
        let sigma2 = variance * (1.0 + 2.0 * rho1 / persistence);
        Ok(Self { mean, variance, rho1, sigma2 })
    }

    /// `Corr(u_0^2, u_lag^2)`.
    pub fn rho(&self, params: &GarchParams, lag: u32) -> f64 {
        match lag {
            0 => 1.0,
            l => self.rho1 * (params.alpha + params.beta).powi(l as i32 - 1),
        }
    }
}

/// Closed-form long-run variance of `u^2`.
pub fn garch_sigma2_oracle(params: &GarchParams) -> Result<f64> {
    Ok(GarchMoments::new(params)?.sigma2)
}
