//! Significance tests, dominance analysis, and the small descriptive
//! statistics the picking experiments report.

pub mod dist;
mod dominance;

pub use dominance::{dominance_analysis, dominance_on_dataset, DominanceReport};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("sample too small: need at least {need} values, got {got}")]
    SampleTooSmall { need: usize, got: usize },
    #[error("degenerate samples: both variances are zero")]
    ZeroVariance,
    #[error("mean is zero; normalized std undefined")]
    ZeroMean,
    #[error("null log-likelihood must be negative")]
    DegenerateNull,
    #[error("design matrix is singular for the full model")]
    SingularDesign,
    #[error("empty input")]
    EmptyInput,
}

/// Significance threshold used throughout the analysis.
pub const SIGNIFICANCE_P: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    TTestMean,
    FTestVariance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub kind: TestKind,
    pub significant: bool,
}

impl TestResult {
    fn new(statistic: f64, p_value: f64, kind: TestKind) -> TestResult {
        TestResult {
            statistic,
            p_value,
            kind,
            significant: p_value < SIGNIFICANCE_P,
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the n-1 denominator.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

/// McFadden pseudo-R²: 1 - ll_full / ll_null.
pub fn mcfadden_r2(ll_full: f64, ll_null: f64) -> Result<f64, StatsError> {
    if !(ll_null < 0.0) {
        return Err(StatsError::DegenerateNull);
    }
    Ok(1.0 - ll_full / ll_null)
}

/// Welch two-sample t-test for means, two-sided.
pub fn t_test_mean(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::SampleTooSmall {
            need: 2,
            got: a.len().min(b.len()),
        });
    }
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a), sample_variance(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let se2 = va / na + vb / nb;
    if se2 == 0.0 {
        if ma == mb {
            // Identical constant samples: no evidence of a difference.
            return Ok(TestResult::new(0.0, 1.0, TestKind::TTestMean));
        }
        return Err(StatsError::ZeroVariance);
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2
        / ((va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0));
    let p = 2.0 * (1.0 - dist::student_t_cdf(t.abs(), df));
    Ok(TestResult::new(t, p.clamp(0.0, 1.0), TestKind::TTestMean))
}

/// F-test for equality of variances; the statistic is the larger-over-smaller
/// variance ratio and the p-value is two-sided.
pub fn f_test_variance(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(StatsError::SampleTooSmall {
            need: 2,
            got: a.len().min(b.len()),
        });
    }
    let (va, vb) = (sample_variance(a), sample_variance(b));
    if va == 0.0 && vb == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let (num, den, d1, d2) = if va >= vb {
        (va, vb, a.len() as f64 - 1.0, b.len() as f64 - 1.0)
    } else {
        (vb, va, b.len() as f64 - 1.0, a.len() as f64 - 1.0)
    };
    if den == 0.0 {
        return Ok(TestResult::new(f64::INFINITY, 0.0, TestKind::FTestVariance));
    }
    let f = num / den;
    let cdf = dist::f_cdf(f, d1, d2);
    let p = (2.0 * cdf.min(1.0 - cdf)).clamp(0.0, 1.0);
    Ok(TestResult::new(f, p, TestKind::FTestVariance))
}

/// Standard deviation divided by the mean (coefficient of variation).
pub fn normalized_std(sample: &[f64]) -> Result<f64, StatsError> {
    if sample.len() < 2 {
        return Err(StatsError::SampleTooSmall {
            need: 2,
            got: sample.len(),
        });
    }
    let m = mean(sample);
    if m == 0.0 {
        return Err(StatsError::ZeroMean);
    }
    Ok(sample_std(sample) / m)
}

#[derive(Debug, Clone, Copy)]
pub struct SpearmanResult {
    pub rho: f64,
    /// Two-sided p-value from the t approximation.
    pub p_two_sided: f64,
    /// One-sided p-value for the alternative rho > 0.
    pub p_positive: f64,
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap());
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // Tied values share the average rank.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[order[k]] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with tie-averaged ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<SpearmanResult, StatsError> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(StatsError::SampleTooSmall {
            need: 3,
            got: x.len().min(y.len()),
        });
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let (mx, my) = (mean(&rx), mean(&ry));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..rx.len() {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let n = x.len() as f64;
    let (p_two, p_pos) = if rho.abs() >= 1.0 {
        (0.0, if rho > 0.0 { 0.0 } else { 1.0 })
    } else {
        let t = rho * ((n - 2.0) / (1.0 - rho * rho)).sqrt();
        let upper = 1.0 - dist::student_t_cdf(t, n - 2.0);
        (2.0 * upper.min(1.0 - upper), upper)
    };
    Ok(SpearmanResult {
        rho,
        p_two_sided: p_two.clamp(0.0, 1.0),
        p_positive: p_pos.clamp(0.0, 1.0),
    })
}
