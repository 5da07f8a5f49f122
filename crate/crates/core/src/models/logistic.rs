//! Bayesian logistic regression with an isotropic Gaussian prior.
//!
//! ```text
//! log pi(beta | X) = sum_i [ y_i x_i beta - log(1 + exp(x_i beta)) ] - |beta|^2 / (2 s^2)
//! ```

use crate::sampler::TargetDensity;
use crate::{Error, Result};

pub const DEFAULT_PRIOR_SD: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct LogisticPosterior {
    /// Row-major `n_obs x dim` design.
    design: Vec<f64>,
    response: Vec<f64>,
    n_obs: usize,
    dim: usize,
    prior_sd: f64,
}

impl LogisticPosterior {
    /// `rows[i]` is the covariate vector of observation `i`; responses are 0 or 1.
    /// `prior_sd` may be `f64::INFINITY` for a flat prior.
    pub fn new(rows: &[Vec<f64>], response: &[f64], prior_sd: f64) -> Result<Self> {
        let n_obs = rows.len();
        if n_obs == 0 {
            return Err(Error::Dataset("design matrix has no rows".into()));
        }
        if response.len() != n_obs {
            return Err(Error::DimensionMismatch { expected: n_obs, got: response.len() });
        }
        let dim = rows[0].len();
        if dim == 0 {
            return Err(Error::Dataset("design matrix has no columns".into()));
        }
        let mut design = Vec::with_capacity(n_obs * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dataset(format!("row {i} has {} columns, expected {dim}", row.len())));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!("row {i}, column {j} is not finite")));
            }
            design.extend_from_slice(row);
        }
        if let Some(i) = response.iter().position(|&y| y != 0.0 && y != 1.0) {
            return Err(Error::Dataset(format!("response {i} is {}, expected 0 or 1", response[i])));
        }
        if !(prior_sd > 0.0) {
            return Err(Error::InvalidParameter(format!("prior sd must be positive, got {prior_sd}")));
        }
        Ok(Self { design, response: response.to_vec(), n_obs, dim, prior_sd })
    }

    pub fn n_obs(&self) -> usize {
        self.n_obs
    }

    pub fn prior_sd(&self) -> f64 {
        self.prior_sd
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.design[i * self.dim..(i + 1) * self.dim]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    fn prior_precision(&self) -> f64 {
        1.0 / (self.prior_sd * self.prior_sd)
    }

    /// Log posterior up to an additive constant.
    pub fn log_posterior(&self, beta: &[f64]) -> f64 {
        assert_eq!(beta.len(), self.dim, "coefficient vector has the wrong length");
        let mut ll = 0.0;
        for (i, &y) in self.response.iter().enumerate() {
            let t = dot(self.row(i), beta);
            ll += y * t - softplus(t);
        }
        ll - 0.5 * self.prior_precision() * dot(beta, beta)
    }

    /// `sum_i (y_i - p_beta(x_i)) x_i - beta / s^2`.
    pub fn log_gradient(&self, beta: &[f64]) -> Vec<f64> {
        assert_eq!(beta.len(), self.dim, "coefficient vector has the wrong length");
        let prec = self.prior_precision();
        let mut grad: Vec<f64> = beta.iter().map(|b| -prec * b).collect();
        for (i, &y) in self.response.iter().enumerate() {
            let row = self.row(i);
            let r = y - logistic(dot(row, beta));
            for (g, x) in grad.iter_mut().zip(row) {
                *g += r * x;
            }
        }
        grad
    }
}

impl TargetDensity for LogisticPosterior {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        self.log_posterior(x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log(1 + e^t)` without overflow.
pub fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_problem(seed: u64, n: usize, d: usize) -> LogisticPosterior {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect();
        LogisticPosterior::new(&rows, &y, 3.0).unwrap()
    }

    #[test]
    fn zero_coefficients() {
        let p = random_problem(1, 37, 4);
        assert!((p.log_posterior(&[0.0; 4]) + 37.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn stable_branch() {
        let p = LogisticPosterior::new(&[vec![1.0]], &[1.0], f64::INFINITY).unwrap();
        let want = 10.0 - (1.0 + 10f64.exp()).ln();
        assert!((p.log_posterior(&[10.0]) - want).abs() < 1e-15);
        assert!((p.log_posterior(&[10.0]) + 4.54e-5).abs() < 1e-7);
        assert!(p.log_posterior(&[800.0]).abs() < 1e-300);
        assert!((p.log_posterior(&[-800.0]) + 800.0).abs() < 1e-9);
    }

    #[test]
    fn prior_only_gradient() {
        let p = LogisticPosterior::new(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[1.0, 0.0], 2.0).unwrap();
        let g = p.log_gradient(&[1.0, -3.0]);
        assert!((g[0] + 0.25).abs() < 1e-15 && (g[1] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn balanced_data_gradient_vanishes_at_zero() {
        let rows = vec![vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, -1.0], vec![1.0, -1.0]];
        let p = LogisticPosterior::new(&rows, &[1.0, 0.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(p.log_gradient(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let p = random_problem(7, 50, 5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let beta: Vec<f64> = (0..5).map(|_| rng.random_range(-1.5..1.5)).collect();
            let g = p.log_gradient(&beta);
            for j in 0..5 {
                let h = 1e-5;
                let mut up = beta.clone();
                let mut dn = beta.clone();
                up[j] += h;
                dn[j] -= h;
                let fd = (p.log_posterior(&up) - p.log_posterior(&dn)) / (2.0 * h);
                assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1.0), "{fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn validation() {
        assert!(LogisticPosterior::new(&[], &[], 1.0).is_err());
        assert!(LogisticPosterior::new(&[vec![1.0]], &[2.0], 1.0).is_err());
        assert!(LogisticPosterior::new(&[vec![1.0], vec![1.0, 2.0]], &[1.0, 0.0], 1.0).is_err());
        assert!(LogisticPosterior::new(&[vec![f64::NAN]], &[1.0], 1.0).is_err());
        assert!(LogisticPosterior::new(&[vec![1.0]], &[1.0], 0.0).is_err());
        assert!(LogisticPosterior::new(&[vec![1.0]], &[1.0, 0.0], 1.0).is_err());
    }
}
