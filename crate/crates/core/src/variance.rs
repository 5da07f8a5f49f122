//! Lag-window estimator of the long-run variance.
//!
//! ```text
//! gamma2 = gamma(0) + 2 * sum_{k=1}^{K} w(k * b) * gamma(k),   K = max{k : k * b < 1}
//! ```
//!
//! where `b` is the bandwidth produced by a [`BandwidthPlan`]. Negative
//! values are returned as computed and flagged; they never occur with the
//! Bartlett or Parzen windows because both have nonnegative spectral
//! windows and the autocovariances use the 1/n divisor.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::acvf::{acvf, compensated_sum, sample_autocorrelations, sample_mean, SampleTrace};
use crate::kernel::LagKernel;
use crate::{Error, Result};

/// Plug-in constant `c` is clamped to this range before forming the bandwidth.
pub const NW_C_MIN: f64 = 1e-3;
pub const NW_C_MAX: f64 = 1e3;
/// Smallest admissible `|1 + 2 sum rho|` in the plug-in.
pub const NW_MIN_DENOMINATOR: f64 = 1e-12;
pub const NW_DEFAULT_M_EXPONENT: f64 = 2.0 / 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandwidthPlan {
    /// `b_n = coef * n^(-delta)`.
    FixedExponent { coef: f64, delta: f64 },
    /// `b_n = 1 / (c n^(1/3))` with the Newey-West plug-in `c` computed from
    /// `m = floor(n^m_exponent)` sample autocorrelations.
    NeweyWest { c0: f64, m_exponent: f64 },
    Explicit { b: f64 },
}

impl BandwidthPlan {
    pub fn fixed(coef: f64, delta: f64) -> Self {
        Self::FixedExponent { coef, delta }
    }

    pub fn newey_west(c0: f64) -> Self {
        Self::NeweyWest { c0, m_exponent: NW_DEFAULT_M_EXPONENT }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidBandwidth(msg));
        match *self {
            Self::FixedExponent { coef, delta } => {
                if !(coef.is_finite() && coef > 0.0) {
                    return bad(format!("coefficient must be positive, got {coef}"));
                }
                if !(delta > 0.0 && delta <= 0.5) {
                    return bad(format!("exponent must lie in (0, 1/2], got {delta}"));
                }
            }
            Self::NeweyWest { c0, m_exponent } => {
                if !(c0.is_finite() && c0 > 0.0) {
                    return bad(format!("c0 must be positive, got {c0}"));
                }
                if !(m_exponent > 0.0 && m_exponent < 1.0) {
                    return bad(format!("m exponent must lie in (0, 1), got {m_exponent}"));
                }
            }
            Self::Explicit { b } => {
                if !(b.is_finite() && b > 0.0) {
                    return bad(format!("bandwidth must be positive, got {b}"));
                }
            }
        }
        Ok(())
    }

    /// Number of autocorrelations used by the plug-in: `floor(n^m_exponent)`,
    /// at least 1 and at most `n - 1`.
    pub fn plug_in_lags(n: usize, m_exponent: f64) -> usize {
        let m = (n as f64).powf(m_exponent).floor() as usize;
        m.max(1).min(n.saturating_sub(1).max(1))
    }

    /// Bandwidth for a trace of length `n` together with plug-in diagnostics.
    pub fn bandwidth(&self, trace: &SampleTrace) -> Result<(f64, Option<NeweyWestFit>)> {
        self.validate()?;
        let n = trace.len() as f64;
        match *self {
            Self::FixedExponent { coef, delta } => Ok((coef * n.powf(-delta), None)),
            Self::Explicit { b } => Ok((b, None)),
            Self::NeweyWest { c0, m_exponent } => {
                let m = Self::plug_in_lags(trace.len(), m_exponent);
                let mut fit = newey_west_fit(trace, c0, m)?;
                let c = fit.c_raw.clamp(NW_C_MIN, NW_C_MAX);
                fit.c_clamped = c != fit.c_raw;
                fit.c = c;
                let window = c * n.cbrt();
                let upper = (n - 1.0).max(1.0);
                let clamped = window.clamp(1.0, upper);
                fit.window_clamped = clamped != window;
                Ok((1.0 / clamped, Some(fit)))
            }
        }
    }
}

/// Diagnostics of the Newey-West plug-in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeweyWestFit {
    pub m: usize,
    /// `2 * sum l * rho_l`
    pub numerator: f64,
    /// `1 + 2 * sum rho_l`
    pub denominator: f64,
    /// `c0 * |numerator / denominator|^(1/3)` before clamping.
    pub c_raw: f64,
    /// Value actually used.
    pub c: f64,
    /// The ratio under the cube root was negative and its absolute value was used.
    pub negative_ratio: bool,
    pub c_clamped: bool,
    pub window_clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub gamma2: f64,
    pub bandwidth: f64,
    /// Largest positive lag `K` in the window.
    pub max_lag: usize,
    /// Number of lags `k` with `|k| b < 1`, i.e. `2K + 1`.
    pub lags_used: usize,
    pub negative_flag: bool,
    pub mean: f64,
    pub n: usize,
    pub plug_in: Option<NeweyWestFit>,
}

/// Bandwidth exponent `(2/3) (1 - max(1/2, 1/p))` for a moment order `p > 1`.
pub fn default_delta(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::InvalidParameter(format!("moment order must exceed 1, got {p}")));
    }
    Ok(2.0 / 3.0 * (1.0 - (1.0 / p).max(0.5)))
}

/// Raw Newey-West constant `c0 * |2 sum l rho_l / (1 + 2 sum rho_l)|^(1/3)`.
pub fn newey_west_c(trace: &SampleTrace, c0: f64, m: usize) -> Result<f64> {
    Ok(newey_west_fit(trace, c0, m)?.c_raw)
}

pub fn newey_west_fit(trace: &SampleTrace, c0: f64, m: usize) -> Result<NeweyWestFit> {
    if !(c0.is_finite() && c0 > 0.0) {
        return Err(Error::InvalidParameter(format!("c0 must be positive, got {c0}")));
    }
    let rho = sample_autocorrelations(trace, m)?;
    let (weighted, plain) = rho
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(w, p), (i, r)| (w + (i + 1) as f64 * r, p + r));
    let numerator = 2.0 * weighted;
    let denominator = 1.0 + 2.0 * plain;
    if denominator.abs() < NW_MIN_DENOMINATOR {
        return Err(Error::DegeneratePlugIn { denominator });
    }
    let ratio = numerator / denominator;
    let c_raw = c0 * ratio.abs().cbrt();
    Ok(NeweyWestFit {
        m,
        numerator,
        denominator,
        c_raw,
        c: c_raw,
        negative_ratio: ratio < 0.0,
        c_clamped: false,
        window_clamped: false,
    })
}

/// Largest `k` with `k * b < 1`.
fn window_half_width(b: f64) -> usize {
    let mut k = ((1.0 / b).ceil() as usize).saturating_sub(1);
    while ((k + 1) as f64) * b < 1.0 {
        k += 1;
    }
    while k > 0 && (k as f64) * b >= 1.0 {
        k -= 1;
    }
    k
}

pub fn estimate(trace: &SampleTrace, kernel: &LagKernel, plan: &BandwidthPlan) -> Result<VarianceEstimate> {
    let n = trace.len();
    if n < 2 {
        return Err(Error::InvalidParameter("estimation needs at least two observations".into()));
    }
    let (b, plug_in) = plan.bandwidth(trace)?;
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidBandwidth(format!("bandwidth must be positive, got {b}")));
    }
    if 1.0 / b > n as f64 {
        return Err(Error::InvalidBandwidth(format!("window 1/b = {} exceeds trace length {n}", 1.0 / b)));
    }
    let max_lag = window_half_width(b).min(n - 1);
    let acv = acvf(trace, max_lag)?;
    let weighted = acv.gamma[1..].iter().enumerate().map(|(i, g)| 2.0 * kernel.eval((i + 1) as f64 * b) * g);
    let gamma2 = compensated_sum(std::iter::once(acv.gamma[0]).chain(weighted));
    Ok(VarianceEstimate {
        gamma2,
        bandwidth: b,
        max_lag,
        lags_used: 2 * max_lag + 1,
        negative_flag: gamma2 < 0.0,
        mean: acv.mean,
        n,
        plug_in,
    })
}

/// Estimates on the prefixes of length `stride, 2 stride, ...` and on the
/// full trace. Each checkpoint is computed from scratch.
pub fn running_estimates(
    trace: &SampleTrace,
    kernel: &LagKernel,
    plan: &BandwidthPlan,
    stride: usize,
) -> Result<Vec<VarianceEstimate>> {
    checkpoints(trace.len(), stride)?
        .into_iter()
        .map(|len| estimate(&trace.head(len)?, kernel, plan))
        .collect()
}

/// Prefix lengths visited by [`running_estimates`]; prefixes shorter than 2 are skipped.
pub fn checkpoints(n: usize, stride: usize) -> Result<Vec<usize>> {
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be >= 1".into()));
    }
    let mut out: Vec<usize> = (1..=n / stride).map(|i| i * stride).filter(|&len| len >= 2).collect();
    if out.last() != Some(&n) && n >= 2 {
        out.push(n);
    }
    Ok(out)
}

/// CLT interval `mean +/- z_{(1+level)/2} sqrt(gamma2 / n)`.
pub fn confidence_interval(trace: &SampleTrace, estimate: &VarianceEstimate, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence level must lie in (0, 1), got {level}")));
    }
    if estimate.negative_flag || estimate.gamma2 < 0.0 {
        return Err(Error::NegativeEstimate { gamma2: estimate.gamma2 });
    }
    if trace.len() != estimate.n {
        return Err(Error::DimensionMismatch { expected: estimate.n, got: trace.len() });
    }
    let z = normal_quantile((1.0 + level) / 2.0);
    let mean = sample_mean(trace);
    let half = z * (estimate.gamma2 / trace.len() as f64).sqrt();
    Ok((mean - half, mean + half))
}

pub(crate) fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}
