//! Conjugate Bayesian linear regression over the model weights, yielding a
//! predictive mean and standard deviation per query point.

use super::{cohort_samples, phi, ModelError, ModelParams, Sample};
use crate::pick::PickDataset;

#[derive(Debug, Clone, Copy)]
pub struct BayesConfig {
    /// Variance of the zero-mean Gaussian prior on each weight.
    pub prior_variance: f64,
}

impl Default for BayesConfig {
    fn default() -> Self {
        BayesConfig {
            prior_variance: 1e4,
        }
    }
}

/// Posterior over (omega1, omega2) given logistic parameters held fixed.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub weight_mean: [f64; 2],
    pub weight_covariance: [[f64; 2]; 2],
    pub noise_variance: f64,
    /// Carrier for the fixed logistic parameters used by `phi`.
    pub nonlinear: ModelParams,
}

impl PosteriorSummary {
    /// Predictive mean and standard deviation at (tau, lambda). The std is
    /// reported as the model's confidence band (one-sigma, roughly a 2/3
    /// coverage interval).
    pub fn predictive(&self, tau_mm: f64, lambda_mm: f64) -> (f64, f64) {
        let x = [phi(tau_mm, &self.nonlinear) * lambda_mm, 1.0];
        let mean = self.weight_mean[0] * x[0] + self.weight_mean[1] * x[1];
        let c = &self.weight_covariance;
        let model_var = x[0] * (c[0][0] * x[0] + c[0][1] * x[1])
            + x[1] * (c[1][0] * x[0] + c[1][1] * x[1]);
        let var = model_var + self.noise_variance;
        (mean, var.max(0.0).sqrt())
    }

    /// Posterior mean turned into plain model parameters.
    pub fn mean_params(&self) -> ModelParams {
        ModelParams {
            omega1: self.weight_mean[0],
            omega2: self.weight_mean[1],
            ..self.nonlinear
        }
    }
}

fn invert_2x2(m: [[f64; 2]; 2]) -> Option<[[f64; 2]; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det.abs() < 1e-300 {
        return None;
    }
    Some([
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ])
}

fn moments(samples: &[Sample], nonlinear: &ModelParams) -> ([[f64; 2]; 2], [f64; 2], f64, f64) {
    let mut xtx = [[0.0; 2]; 2];
    let mut xty = [0.0; 2];
    for &(tau, lambda, y) in samples {
        let x = [phi(tau, nonlinear) * lambda, 1.0];
        for i in 0..2 {
            for j in 0..2 {
                xtx[i][j] += x[i] * x[j];
            }
            xty[i] += x[i] * y;
        }
    }
    let n = samples.len() as f64;
    let yy: f64 = samples.iter().map(|s| s.2 * s.2).sum();
    (xtx, xty, n, yy)
}

/// Conjugate Gaussian posterior over the weights given fixed logistic
/// parameters. Noise variance is the residual variance of the least-squares
/// solution on the same cohort.
pub fn bayes_fit(
    dataset: &PickDataset,
    spiky: bool,
    nonlinear: &ModelParams,
    config: &BayesConfig,
) -> Result<PosteriorSummary, ModelError> {
    let samples = cohort_samples(dataset, spiky);
    bayes_fit_samples(&samples, nonlinear, config)
}

/// Same as [`bayes_fit`] on pre-extracted samples.
pub fn bayes_fit_samples(
    samples: &[Sample],
    nonlinear: &ModelParams,
    config: &BayesConfig,
) -> Result<PosteriorSummary, ModelError> {
    if samples.len() < 3 {
        return Err(ModelError::CohortTooSmall {
            need: 3,
            got: samples.len(),
        });
    }
    let (xtx, xty, n, yy) = moments(samples, nonlinear);

    // Least squares for the noise level.
    let ls_cov = invert_2x2(xtx).ok_or(ModelError::DegenerateDesign)?;
    let ls = [
        ls_cov[0][0] * xty[0] + ls_cov[0][1] * xty[1],
        ls_cov[1][0] * xty[0] + ls_cov[1][1] * xty[1],
    ];
    let rss = (yy - ls[0] * xty[0] - ls[1] * xty[1]).max(0.0);
    let noise_variance = (rss / (n - 2.0).max(1.0)).max(1e-12);

    let alpha = config.prior_variance;
    let a = [
        [xtx[0][0] / noise_variance + 1.0 / alpha, xtx[0][1] / noise_variance],
        [xtx[1][0] / noise_variance, xtx[1][1] / noise_variance + 1.0 / alpha],
    ];
    let cov = invert_2x2(a).ok_or(ModelError::DegenerateDesign)?;
    let scaled = [xty[0] / noise_variance, xty[1] / noise_variance];
    let mean = [
        cov[0][0] * scaled[0] + cov[0][1] * scaled[1],
        cov[1][0] * scaled[0] + cov[1][1] * scaled[1],
    ];

    Ok(PosteriorSummary {
        weight_mean: mean,
        weight_covariance: cov,
        noise_variance,
        nonlinear: *nonlinear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::synthetic::synthetic_cohort;
    use crate::model::{predict, ModelParams};
    use approx::assert_relative_eq;

    #[test]
    fn diffuse_prior_matches_least_squares() {
        let truth = ModelParams::new(0.5, 2.0, 9.0, 0.5, false);
        let dataset = synthetic_cohort(&truth, 5, 0.0, 17);
        let config = BayesConfig {
            prior_variance: 1e12,
        };
        let posterior = bayes_fit(&dataset, false, &truth, &config).unwrap();
        assert_relative_eq!(posterior.weight_mean[0], 0.5, max_relative = 1e-8);
        assert_relative_eq!(posterior.weight_mean[1], 2.0, max_relative = 1e-8);
        // Predictive mean equals the noiseless generator.
        let (mean, _) = posterior.predictive(0.4, 60.0);
        assert_relative_eq!(mean, predict(0.4, 60.0, &truth), max_relative = 1e-8);
    }

    #[test]
    fn replication_shrinks_predictive_std() {
        let truth = ModelParams::new(0.5, 2.0, 9.0, 0.5, false);
        let dataset = synthetic_cohort(&truth, 4, 3.0, 23);
        let config = BayesConfig::default();
        let single = bayes_fit(&dataset, false, &truth, &config).unwrap();
        let mut doubled = dataset.clone();
        doubled.records.extend(dataset.records.clone());
        let double = bayes_fit(&doubled, false, &truth, &config).unwrap();
        for tau in [0.2, 0.4, 1.0, 2.5] {
            for lambda in [12.0, 60.0, 120.0] {
                let (_, s1) = single.predictive(tau, lambda);
                let (_, s2) = double.predictive(tau, lambda);
                assert!(
                    s2 < s1,
                    "std must strictly shrink with replication at ({tau}, {lambda})"
                );
            }
        }
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let truth = ModelParams::new(0.5, 2.0, 9.0, 0.5, true);
        let dataset = synthetic_cohort(&truth, 3, 2.0, 31);
        let posterior = bayes_fit(&dataset, true, &truth, &BayesConfig::default()).unwrap();
        let c = posterior.weight_covariance;
        assert_relative_eq!(c[0][1], c[1][0], max_relative = 1e-9);
        assert!(c[0][0] > 0.0 && c[1][1] > 0.0);
        assert!(c[0][0] * c[1][1] - c[0][1] * c[1][0] > 0.0);
    }
}
