//! Synthetic traces and targets with analytically known answers.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::acvf::SampleTrace;
use crate::sampler::TargetDensity;
use crate::{Error, Result};

/// Stationary AR(1) path `x_t = phi x_{t-1} + e_t` with unit-variance
/// Gaussian innovations. `x_0` is drawn from the stationary law.
pub fn ar1_simulate<R: Rng + ?Sized>(phi: f64, n: usize, rng: &mut R) -> Result<SampleTrace> {
    if !(phi.is_finite() && phi.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("AR(1) coefficient must satisfy |phi| < 1, got {phi}")));
    }
    if n == 0 {
        return Err(Error::EmptyTrace);
    }
    let z: f64 = StandardNormal.sample(rng);
    let mut x = z / (1.0 - phi * phi).sqrt();
    let mut values = Vec::with_capacity(n);
    values.push(x);
    for _ in 1..n {
        let e: f64 = StandardNormal.sample(rng);
        x = phi * x + e;
        values.push(x);
    }
    SampleTrace::new(format!("ar1(phi={phi})"), values)
}

/// Long-run variance of the identity functional of a unit-innovation AR(1).
pub fn ar1_long_run_variance(phi: f64) -> Result<f64> {
    if !(phi.is_finite() && phi.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!("AR(1) coefficient must satisfy |phi| < 1, got {phi}")));
    }
    Ok(1.0 / ((1.0 - phi) * (1.0 - phi)))
}

/// iid `N(mean, variance)` draws; long-run variance equals `variance`.
pub fn iid_simulate<R: Rng + ?Sized>(mean: f64, variance: f64, n: usize, rng: &mut R) -> Result<SampleTrace> {
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::InvalidParameter(format!("variance must be nonnegative, got {variance}")));
    }
    if n == 0 {
        return Err(Error::EmptyTrace);
    }
    let sd = variance.sqrt();
    let values = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            mean + sd * z
        })
        .collect();
    SampleTrace::new(format!("iid(mean={mean},var={variance})"), values)
}

/// Multivariate normal log density (up to a constant).
#[derive(Debug, Clone)]
pub struct GaussianTarget {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
}

impl GaussianTarget {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if covariance.nrows() != mean.len() || covariance.ncols() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: covariance.nrows() });
        }
        let chol = covariance
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("target covariance".into()))?;
        Ok(Self { precision: chol.inverse(), mean, covariance })
    }

    pub fn standard(dim: usize) -> Self {
        Self::new(DVector::zeros(dim), DMatrix::identity(dim, dim)).expect("identity is positive definite")
    }

    /// Bivariate target with unit variances and correlation `rho`.
    pub fn correlated_pair(rho: f64) -> Result<Self> {
        Self::new(DVector::zeros(2), DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }
}

impl TargetDensity for GaussianTarget {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        let d = DVector::from_column_slice(x) - &self.mean;
        -0.5 * d.dot(&(&self.precision * &d))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn ar1_oracles() {
        assert_eq!(ar1_long_run_variance(0.0).unwrap(), 1.0);
        assert_eq!(ar1_long_run_variance(0.5).unwrap(), 4.0);
        assert!((ar1_long_run_variance(-0.5).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        // (1 / (1 - phi^2)) (1 + 2 phi / (1 - phi)) is the same number.
        for phi in [0.5f64, -0.5, 0.9] {
            let alt = (1.0 / (1.0 - phi * phi)) * (1.0 + 2.0 * phi / (1.0 - phi));
            assert!((alt - ar1_long_run_variance(phi).unwrap()).abs() < 1e-12 * alt);
        }
        assert!(ar1_long_run_variance(1.0).is_err());
        assert!(ar1_simulate(-1.0, 10, &mut rng::seeded(1)).is_err());
    }

    #[test]
    fn ar1_moments() {
        let t = ar1_simulate(0.5, 200_000, &mut rng::seeded(2)).unwrap();
        let v = t.values();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.03);
        assert!((var - 4.0 / 3.0).abs() < 0.03);
    }

    #[test]
    fn iid_moments() {
        let t = iid_simulate(3.0, 2.0, 200_000, &mut rng::seeded(3)).unwrap();
        let v = t.values();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!((mean - 3.0).abs() < 0.01);
        assert!((var - 2.0).abs() < 0.03);
        assert!(iid_simulate(0.0, -1.0, 10, &mut rng::seeded(1)).is_err());
    }

    #[test]
    fn gaussian_log_density() {
        let g = GaussianTarget::correlated_pair(0.5).unwrap();
        assert_eq!(g.log_density(&[0.0, 0.0]), 0.0);
        // x' S^-1 x with S^-1 = [[4/3, -2/3], [-2/3, 4/3]] at (1, 0).
        assert!((g.log_density(&[1.0, 0.0]) + 2.0 / 3.0).abs() < 1e-12);
        assert!(GaussianTarget::correlated_pair(1.0).is_err());
    }
}
