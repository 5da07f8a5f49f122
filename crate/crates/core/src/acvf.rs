//! Sample mean and sample autocovariances of a scalar trace.
//!
//! Autocovariances always use the 1/n divisor:
//!
//! ```text
//! gamma(k) = (1/n) * sum_{j=0}^{n-k-1} (x_j - mean) (x_{j+k} - mean)
//! ```
//!
//! which keeps the sequence positive semidefinite. Lags beyond `n - 1` are
//! zero and `gamma(-k) = gamma(k)`; [`AcvfResult::at`] follows that
//! convention.

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Finite, nonempty scalar series `h(X_1), ..., h(X_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTrace {
    label: String,
    values: Vec<f64>,
}

impl SampleTrace {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteTrace { index });
        }
        Ok(Self { label: label.into(), values })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `n` values as a new trace (`1 <= n <= len`).
    pub fn head(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.values.len() {
            return Err(Error::InvalidParameter(format!(
                "prefix length {n} outside 1..={}",
                self.values.len()
            )));
        }
        Ok(Self { label: self.label.clone(), values: self.values[..n].to_vec() })
    }

    /// Drops the first `burn_in` values.
    pub fn skip(&self, burn_in: usize) -> Result<Self> {
        Self::new(self.label.clone(), self.values.get(burn_in..).unwrap_or_default().to_vec())
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcvfResult {
    pub mean: f64,
    /// `gamma[k]` for `k = 0..=max_lag`.
    pub gamma: Vec<f64>,
    pub n: usize,
}

impl AcvfResult {
    /// `gamma(k)` for any integer lag, zero beyond the stored range of a
    /// full-length result and beyond `n - 1`.
    pub fn at(&self, k: i64) -> f64 {
        let k = k.unsigned_abs() as usize;
        if k >= self.n {
            return 0.0;
        }
        self.gamma.get(k).copied().unwrap_or(0.0)
    }

    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// Arithmetic mean. A constant trace returns its value exactly, so its
/// centered series and autocovariances are exactly zero.
pub fn sample_mean(trace: &SampleTrace) -> f64 {
    if trace.is_constant() {
        return trace.values[0];
    }
    compensated_sum(trace.values.iter().copied()) / trace.len() as f64
}

/// Sum with a running TwoSum error term, accurate to about one rounding of
/// the result even under heavy cancellation.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (mut sum, mut err) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        let z = t - sum;
        err += (sum - (t - z)) + (v - z);
        sum = t;
    }
    sum + err
}

/// Work, in multiply-adds, below which the direct path is always used. Its
/// error does not grow with the transform length.
const DIRECT_BUDGET: f64 = (1u64 << 25) as f64;

/// Sample autocovariances up to `max_lag`. The direct path is used when it
/// is affordable or cheaper; long traces with wide windows go through the FFT.
pub fn acvf(trace: &SampleTrace, max_lag: usize) -> Result<AcvfResult> {
    let n = trace.len();
    check_lag(max_lag, n)?;
    let fft_len = fft_len(n);
    let direct_cost = n as f64 * (max_lag + 1) as f64;
    let fft_cost = 12.0 * fft_len as f64 * (fft_len as f64).log2();
    if n < 64 || direct_cost <= fft_cost.max(DIRECT_BUDGET) {
        acvf_direct(trace, max_lag)
    } else {
        acvf_fft(trace, max_lag)
    }
}

/// Double-loop evaluation of the definition with compensated sums.
pub fn acvf_direct(trace: &SampleTrace, max_lag: usize) -> Result<AcvfResult> {
    let n = trace.len();
    check_lag(max_lag, n)?;
    let mean = sample_mean(trace);
    let centered: Vec<f64> = trace.values().iter().map(|v| v - mean).collect();
    let gamma = (0..=max_lag)
        .map(|k| {
            compensated_sum(centered[..n - k].iter().zip(&centered[k..]).map(|(a, b)| a * b)) / n as f64
        })
        .collect();
    Ok(AcvfResult { mean, gamma, n })
}

/// Autocovariances through a zero-padded circular convolution.
///
/// Padding to at least `2n` removes wrap-around, so the circular
/// autocorrelation coincides with the linear one for every lag below `n`.
pub fn acvf_fft(trace: &SampleTrace, max_lag: usize) -> Result<AcvfResult> {
    let n = trace.len();
    check_lag(max_lag, n)?;
    let mean = sample_mean(trace);
    let len = fft_len(n);
    let mut buf: Vec<Complex<f64>> = trace
        .values()
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);

    let scale = 1.0 / (len as f64 * n as f64);
    let gamma = buf[..=max_lag].iter().map(|z| z.re * scale).collect();
    Ok(AcvfResult { mean, gamma, n })
}

/// Sample autocorrelations `rho_1, ..., rho_m`.
pub fn sample_autocorrelations(trace: &SampleTrace, m: usize) -> Result<Vec<f64>> {
    let n = trace.len();
    if m == 0 {
        return Err(Error::InvalidParameter("number of autocorrelations must be >= 1".into()));
    }
    if m >= n {
        return Err(Error::LagTooLarge { max_lag: m, n });
    }
    if trace.is_constant() {
        return Err(Error::DegenerateTrace);
    }
    let acv = acvf(trace, m)?;
    let g0 = acv.gamma[0];
    if g0 <= 0.0 {
        return Err(Error::DegenerateTrace);
    }
    Ok(acv.gamma[1..].iter().map(|g| g / g0).collect())
}

fn check_lag(max_lag: usize, n: usize) -> Result<()> {
    if max_lag >= n {
        return Err(Error::LagTooLarge { max_lag, n });
    }
    Ok(())
}

fn fft_len(n: usize) -> usize {
    (2 * n).next_power_of_two()
}
