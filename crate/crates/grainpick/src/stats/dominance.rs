//! Dominance analysis over all predictor subsets with McFadden pseudo-R².

use super::{mcfadden_r2, StatsError};
use crate::exec::map_ordered;
use crate::pick::PickDataset;
use nalgebra::{DMatrix, DVector};

/// Variance floor for the Gaussian residual likelihood; keeps exact fits
/// from producing infinite log-likelihoods.
const RESIDUAL_VARIANCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DominanceReport {
    pub predictors: Vec<String>,
    /// McFadden R² per predictor subset, keyed by bitmask over `predictors`.
    pub subset_r2: Vec<(u32, f64)>,
    /// Subsets whose design matrix was singular and were skipped.
    pub skipped_subsets: Vec<u32>,
    pub full_r2: f64,
    /// Interactional dominance per predictor: R²(full) - R²(full without p).
    pub interactional_dominance: Vec<f64>,
    /// 100 · ID[p] / full R².
    pub relative_importance_pct: Vec<f64>,
}

impl DominanceReport {
    pub fn r2_for_mask(&self, mask: u32) -> Option<f64> {
        self.subset_r2
            .iter()
            .find(|(m, _)| *m == mask)
            .map(|(_, r2)| *r2)
    }
}

/// Gaussian log-likelihood of an OLS fit of `y` on the masked columns of
/// `columns` plus an intercept. Returns None when the normal equations are
/// singular.
fn subset_log_likelihood(columns: &[Vec<f64>], y: &[f64], mask: u32) -> Option<f64> {
    let n = y.len();
    let active: Vec<usize> = (0..columns.len()).filter(|i| mask & (1 << i) != 0).collect();
    let k = active.len() + 1;
    let mut x = DMatrix::zeros(n, k);
    for row in 0..n {
        x[(row, 0)] = 1.0;
        for (j, &col) in active.iter().enumerate() {
            x[(row, j + 1)] = columns[col][row];
        }
    }
    let yv = DVector::from_column_slice(y);
    let xtx = x.transpose() * &x;
    let xty = x.transpose() * &yv;
    let chol = xtx.clone().cholesky()?;
    // Cholesky can numerically succeed on a rank-deficient normal matrix;
    // reject when a pivot collapses relative to the largest diagonal.
    let l = chol.l();
    let max_diag = (0..k).map(|i| l[(i, i)]).fold(0.0f64, f64::max);
    if (0..k).any(|i| l[(i, i)] < 1e-7 * max_diag) {
        return None;
    }
    let beta = chol.solve(&xty);
    let resid = &yv - &x * beta;
    let rss: f64 = resid.iter().map(|r| r * r).sum();
    let sigma2 = (rss / n as f64).max(RESIDUAL_VARIANCE_FLOOR);
    Some(-0.5 * n as f64 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0))
}

/// Fit all 2ⁿ - 1 predictor subsets and derive interactional dominance and
/// relative importance for each predictor.
pub fn dominance_analysis(
    columns: &[Vec<f64>],
    y: &[f64],
    predictor_names: &[&str],
) -> Result<DominanceReport, StatsError> {
    let n_pred = columns.len();
    assert_eq!(n_pred, predictor_names.len());
    if n_pred == 0 || y.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    for c in columns {
        assert_eq!(c.len(), y.len(), "predictor column length mismatch");
    }
    if y.len() < n_pred + 2 {
        return Err(StatsError::SampleTooSmall {
            need: n_pred + 2,
            got: y.len(),
        });
    }

    let ll_null =
        subset_log_likelihood(columns, y, 0).ok_or(StatsError::SingularDesign)?;
    if !(ll_null < 0.0) {
        return Err(StatsError::DegenerateNull);
    }

    let full_mask = (1u32 << n_pred) - 1;
    let masks: Vec<u32> = (1..=full_mask).collect();
    let lls = map_ordered(masks.clone(), |mask| {
        (mask, subset_log_likelihood(columns, y, mask))
    });

    let mut subset_r2 = Vec::new();
    let mut skipped = Vec::new();
    for (mask, ll) in &lls {
        match ll {
            Some(ll) => subset_r2.push((*mask, mcfadden_r2(*ll, ll_null)?)),
            None => skipped.push(*mask),
        }
    }

    let full_r2 = subset_r2
        .iter()
        .find(|(m, _)| *m == full_mask)
        .map(|(_, r2)| *r2)
        .ok_or(StatsError::SingularDesign)?;

    let mut interactional = Vec::with_capacity(n_pred);
    let mut importance = Vec::with_capacity(n_pred);
    for p in 0..n_pred {
        let without = full_mask & !(1 << p);
        let r2_without = if without == 0 {
            0.0
        } else {
            subset_r2
                .iter()
                .find(|(m, _)| *m == without)
                .map(|(_, r2)| *r2)
                .ok_or(StatsError::SingularDesign)?
        };
        let id = full_r2 - r2_without;
        interactional.push(id);
        importance.push(100.0 * id / full_r2);
    }

    Ok(DominanceReport {
        predictors: predictor_names.iter().map(|s| s.to_string()).collect(),
        subset_r2,
        skipped_subsets: skipped,
        full_r2,
        interactional_dominance: interactional,
        relative_importance_pct: importance,
    })
}

/// Normalize given interactional dominances against a full-model R².
///
/// This is the arithmetic applied to externally computed dominance values
/// (e.g. published tables): 100 · ID / R².
pub fn relative_importance_pct(ids: &[f64], full_r2: f64) -> Vec<f64> {
    ids.iter().map(|id| 100.0 * id / full_r2).collect()
}

/// Geometric predictors recognized by [`dominance_on_dataset`].
pub const DATASET_PREDICTORS: [&str; 4] = ["length", "thickness", "spikes", "grain_count"];

/// Dominance analysis of picked units against geometric predictors taken
/// from a picking dataset.
pub fn dominance_on_dataset(
    dataset: &PickDataset,
    predictors: &[&str],
) -> Result<DominanceReport, StatsError> {
    if dataset.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut columns = Vec::with_capacity(predictors.len());
    for &p in predictors {
        let col: Vec<f64> = dataset
            .records
            .iter()
            .map(|r| match p {
                "length" => r.lambda_mm,
                "thickness" => r.tau_mm,
                "spikes" => r.spikes as f64,
                "grain_count" => r.grain_count as f64,
                other => panic!("unknown predictor {other}"),
            })
            .collect();
        columns.push(col);
    }
    let y: Vec<f64> = dataset
        .records
        .iter()
        .map(|r| r.picked_units as f64)
        .collect();
    dominance_analysis(&columns, &y, predictors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_predictor_owns_everything() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = vec![1.1, 1.9, 3.2, 3.9, 5.1, 5.9];
        let report = dominance_analysis(&[x], &y, &["x"]).unwrap();
        assert_relative_eq!(
            report.interactional_dominance[0],
            report.full_r2,
            epsilon = 1e-12
        );
        assert_relative_eq!(report.relative_importance_pct[0], 100.0, epsilon = 1e-9);
    }

    #[test]
    fn dominant_predictor_wins_rank_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 120;
        let x1: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let x3: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        // y depends on x1 alone; x2 and x3 are pure noise regressors.
        let y: Vec<f64> = x1.clone();
        let report =
            dominance_analysis(&[x1, x2, x3], &y, &["x1", "x2", "x3"]).unwrap();
        assert!(report.relative_importance_pct[0] > 95.0);
        assert!(report.relative_importance_pct[0] > report.relative_importance_pct[1]);
        assert!(report.relative_importance_pct[0] > report.relative_importance_pct[2]);
        assert!((report.relative_importance_pct[1] - report.relative_importance_pct[2]).abs() < 5.0);
        assert_eq!(report.subset_r2.len(), 7);
    }

    #[test]
    fn importances_derive_from_subset_r2() {
        // Brute-force over all subsets on a small synthetic, checked against
        // the report's own subset table.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let x1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 * x1[i] + 0.5 * x2[i] + 0.05 * rng.gen_range(-1.0..1.0))
            .collect();
        let report = dominance_analysis(&[x1, x2], &y, &["x1", "x2"]).unwrap();
        let full = report.r2_for_mask(0b11).unwrap();
        assert_relative_eq!(report.full_r2, full, epsilon = 1e-12);
        let id_x1 = full - report.r2_for_mask(0b10).unwrap();
        let id_x2 = full - report.r2_for_mask(0b01).unwrap();
        assert_relative_eq!(report.interactional_dominance[0], id_x1, epsilon = 1e-12);
        assert_relative_eq!(report.interactional_dominance[1], id_x2, epsilon = 1e-12);
    }

    #[test]
    fn relabeling_predictors_preserves_ids() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 80;
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
        let y: Vec<f64> = (0..n).map(|i| a[i] + 3.0 * b[i]).collect();
        let fwd = dominance_analysis(&[a.clone(), b.clone()], &y, &["a", "b"]).unwrap();
        let rev = dominance_analysis(&[b, a], &y, &["b", "a"]).unwrap();
        assert_relative_eq!(
            fwd.interactional_dominance[0],
            rev.interactional_dominance[1],
            epsilon = 1e-10
        );
        assert_relative_eq!(
            fwd.interactional_dominance[1],
            rev.interactional_dominance[0],
            epsilon = 1e-10
        );
    }

    #[test]
    fn constant_column_reports_singular_subset() {
        let x1 = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let x2 = vec![2.0; 7];
        let y = vec![1.0, 2.1, 2.9, 4.2, 5.0, 6.1, 7.2];
        let report = dominance_analysis(&[x1, x2], &y, &["x1", "const"]);
        // A constant column duplicates the intercept; the subsets containing
        // it are singular. The full model is one of them, so the analysis
        // fails loudly rather than inventing importances.
        assert!(matches!(report, Err(StatsError::SingularDesign)));
    }
}
