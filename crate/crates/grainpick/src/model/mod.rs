//! Picked-amount prediction model: a linear length term modulated by a
//! logistic function of thickness, with cross-validated fitting and
//! Bayesian predictive intervals.

mod bayes;
mod fit;
pub mod synthetic;

pub use bayes::{bayes_fit, BayesConfig, PosteriorSummary};
pub use fit::{fit, FitConfig, FitReport};

use crate::pick::PickDataset;
use thiserror::Error;

/// Logistic range constant L (curve span).
pub const L_DEFAULT: f64 = 0.6;
/// Logistic offset constant L₀ (curve floor).
pub const L0_DEFAULT: f64 = 0.1;
/// Cohort normalizer for non-spiky targets.
pub const SIGMA_NONSPIKY: f64 = 27.44;
/// Cohort normalizer for spiky targets.
pub const SIGMA_SPIKY: f64 = 38.27;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("cohort too small: need at least {need} records, got {got}")]
    CohortTooSmall { need: usize, got: usize },
    #[error("degenerate design: all phi(tau)*lambda values identical")]
    DegenerateDesign,
    #[error("normalizer must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("length mismatch: {0} observations vs {1} predictions")]
    LengthMismatch(usize, usize),
    #[error("model file parse error: {0}")]
    Parse(String),
}

/// Coefficients of the prediction model for one cohort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega1: f64,
    pub omega2: f64,
    /// Logistic steepness (1/mm).
    pub theta1_per_mm: f64,
    /// Sigmoid midpoint (mm).
    pub theta2_mm: f64,
    pub l: f64,
    pub l0: f64,
    pub spiky: bool,
    pub sigma_normalizer: f64,
}

impl ModelParams {
    pub fn new(omega1: f64, omega2: f64, theta1_per_mm: f64, theta2_mm: f64, spiky: bool) -> Self {
        ModelParams {
            omega1,
            omega2,
            theta1_per_mm,
            theta2_mm,
            l: L_DEFAULT,
            l0: L0_DEFAULT,
            spiky,
            sigma_normalizer: if spiky { SIGMA_SPIKY } else { SIGMA_NONSPIKY },
        }
    }

    /// Serialize as flat key=value text; floats keep their shortest
    /// round-trippable representation so read-back is bit-exact.
    pub fn to_kv(&self) -> String {
        format!(
            "omega1={}\nomega2={}\ntheta1_per_mm={}\ntheta2_mm={}\nL={}\nL0={}\nspiky={}\nsigma_normalizer={}\n",
            self.omega1,
            self.omega2,
            self.theta1_per_mm,
            self.theta2_mm,
            self.l,
            self.l0,
            self.spiky,
            self.sigma_normalizer
        )
    }

    pub fn from_kv(text: &str) -> Result<ModelParams, ModelError> {
        let mut map = std::collections::HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ModelError::Parse(format!("line {}: missing '='", idx + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get_f = |k: &str| -> Result<f64, ModelError> {
            map.get(k)
                .ok_or_else(|| ModelError::Parse(format!("missing key {k}")))?
                .parse::<f64>()
                .map_err(|e| ModelError::Parse(format!("key {k}: {e}")))
        };
        let spiky = map
            .get("spiky")
            .ok_or_else(|| ModelError::Parse("missing key spiky".into()))?
            .parse::<bool>()
            .map_err(|e| ModelError::Parse(format!("key spiky: {e}")))?;
        Ok(ModelParams {
            omega1: get_f("omega1")?,
            omega2: get_f("omega2")?,
            theta1_per_mm: get_f("theta1_per_mm")?,
            theta2_mm: get_f("theta2_mm")?,
            l: get_f("L")?,
            l0: get_f("L0")?,
            spiky,
            sigma_normalizer: get_f("sigma_normalizer")?,
        })
    }
}

/// Logistic thickness modulation:
/// `phi(tau) = L / (1 + exp(-theta1 (tau - theta2))) + L0`.
pub fn phi(tau_mm: f64, params: &ModelParams) -> f64 {
    params.l / (1.0 + (-params.theta1_per_mm * (tau_mm - params.theta2_mm)).exp()) + params.l0
}

/// Predicted picked amount: `omega1 * phi(tau) * lambda + omega2` (raw,
/// unclamped; clamping to the available-unit range is a reporting concern).
pub fn predict(tau_mm: f64, lambda_mm: f64, params: &ModelParams) -> f64 {
    params.omega1 * phi(tau_mm, params) * lambda_mm + params.omega2
}

/// Raw prediction clamped to the number of units a container holds.
pub fn predict_clamped(tau_mm: f64, lambda_mm: f64, params: &ModelParams, available: u32) -> f64 {
    predict(tau_mm, lambda_mm, params).clamp(0.0, available as f64)
}

/// Normalised mean squared error: MSE divided by the cohort standard
/// deviation sigma (not sigma squared).
pub fn nmse(y: &[f64], y_hat: &[f64], sigma: f64) -> Result<f64, ModelError> {
    if y.len() != y_hat.len() {
        return Err(ModelError::LengthMismatch(y.len(), y_hat.len()));
    }
    if !(sigma > 0.0) {
        return Err(ModelError::NonPositiveSigma(sigma));
    }
    let mse = y
        .iter()
        .zip(y_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / y.len() as f64;
    Ok(mse / sigma)
}

/// One training sample: (tau, lambda, picked units).
pub type Sample = (f64, f64, f64);

/// Extract a cohort from a dataset: spiky keeps records with spikes >= 1,
/// non-spiky keeps spikes == 0. The response is the continuous unit count
/// picked_mass / unit_mass (the rounded `picked_units` is a reporting
/// value). Samples are canonically sorted so the fit is invariant to
/// record order.
pub fn cohort_samples(dataset: &PickDataset, spiky: bool) -> Vec<Sample> {
    let mut samples: Vec<Sample> = dataset
        .records
        .iter()
        .filter(|r| (r.spikes >= 1) == spiky)
        .map(|r| {
            let y = if r.unit_mass_g > 0.0 {
                r.picked_mass_g / r.unit_mass_g
            } else {
                r.picked_units as f64
            };
            (r.tau_mm, r.lambda_mm, y)
        })
        .collect();
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn paper_params() -> ModelParams {
        ModelParams::new(0.5, 2.0, 8.0, 0.5, false)
    }

    #[test]
    fn phi_midpoint_and_asymptotes() {
        let p = paper_params();
        assert_relative_eq!(phi(p.theta2_mm, &p), 0.4, epsilon = 1e-12);
        assert_relative_eq!(phi(1e6, &p), 0.7, epsilon = 1e-9);
        assert_relative_eq!(phi(-1e6, &p), 0.1, epsilon = 1e-9);
        let flat = ModelParams {
            theta1_per_mm: 0.0,
            ..p
        };
        for tau in [0.0, 0.3, 1.0, 7.0] {
            assert_relative_eq!(phi(tau, &flat), 0.4, epsilon = 1e-12);
        }
    }

    #[test]
    fn predict_hand_values() {
        let p = ModelParams {
            omega1: 1.0,
            omega2: 0.0,
            theta1_per_mm: 0.0,
            ..paper_params()
        };
        // phi == 0.4 everywhere, so prediction is 0.4 * lambda.
        assert_relative_eq!(predict(0.5, 60.0, &p), 24.0, epsilon = 1e-12);
        let constant = ModelParams {
            omega1: 0.0,
            omega2: 7.5,
            ..paper_params()
        };
        assert_relative_eq!(predict(0.3, 999.0, &constant), 7.5);
    }

    #[test]
    fn predict_affine_in_lambda() {
        let p = paper_params();
        for tau in [0.2, 0.4, 1.0] {
            let base = predict(tau, 30.0, &p) - p.omega2;
            let double = predict(tau, 60.0, &p) - p.omega2;
            assert_relative_eq!(double, 2.0 * base, max_relative = 1e-12);
            // Slope against central finite differences.
            let h = 1e-4;
            let fd = (predict(tau, 30.0 + h, &p) - predict(tau, 30.0 - h, &p)) / (2.0 * h);
            assert_relative_eq!(fd, p.omega1 * phi(tau, &p), max_relative = 1e-6);
        }
    }

    #[test]
    fn nmse_hand_values() {
        assert_relative_eq!(nmse(&[1.0, 2.0], &[1.0, 2.0], 3.0).unwrap(), 0.0);
        assert_relative_eq!(nmse(&[0.0, 2.0], &[0.0, 0.0], 2.0).unwrap(), 1.0);
        let half = nmse(&[0.0, 2.0], &[0.0, 0.0], 4.0).unwrap();
        assert_relative_eq!(half, 0.5, epsilon = 1e-12);
        assert!(nmse(&[1.0], &[1.0], 0.0).is_err());
        assert!(nmse(&[1.0], &[1.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn model_file_round_trips_bit_exactly() {
        let p = ModelParams::new(
            0.123456789123456789,
            -3.9999999999999996,
            7.77777777,
            0.30000000000000004,
            true,
        );
        let text = p.to_kv();
        let back = ModelParams::from_kv(&text).unwrap();
        assert_eq!(p, back);
        assert_eq!(text, back.to_kv());
    }

    proptest! {
        #[test]
        fn phi_bounded_and_monotone(
            tau1 in -50.0..50.0f64,
            tau2 in -50.0..50.0f64,
            theta1 in 0.01..50.0f64,
            theta2 in 0.0..2.0f64,
        ) {
            let p = ModelParams::new(1.0, 0.0, theta1, theta2, false);
            let f1 = phi(tau1, &p);
            let f2 = phi(tau2, &p);
            prop_assert!(f1 >= p.l0 - 1e-12 && f1 <= p.l + p.l0 + 1e-12);
            if tau1 < tau2 {
                prop_assert!(f1 <= f2 + 1e-12);
            }
        }

        #[test]
        fn nmse_scales_inversely_with_sigma(
            values in proptest::collection::vec(0.0..50.0f64, 2..20),
            sigma in 0.1..10.0f64,
        ) {
            let zeros = vec![0.0; values.len()];
            let one = nmse(&values, &zeros, sigma).unwrap();
            let two = nmse(&values, &zeros, 2.0 * sigma).unwrap();
            prop_assert!((two - one / 2.0).abs() <= 1e-9 * one.max(1.0));
        }
    }
}
