//! Evaluation metrics for flow prediction: mean absolute error, coefficient
//! of determination, and the common part of commuters (the Sørensen-Dice
//! overlap of generated and real flows), plus per-rule normalization.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("evaluation vectors are empty")]
    Empty,
    #[error("actual and predicted lengths differ: {actual} vs {predicted}")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("R² needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("R² is undefined: actual values are constant")]
    ConstantActual,
    #[error("CPC requires nonnegative entries; found {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("CPC is undefined: both vectors sum to zero")]
    BothZero,
    #[error("per-rule normalization needs n_rules >= 1")]
    ZeroRules,
}

/// Paired observed/predicted flow vectors validated for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalVectors {
    actual: Vec<f64>,
    predicted: Vec<f64>,
}

impl EvalVectors {
    pub fn new(actual: Vec<f64>, predicted: Vec<f64>) -> Result<Self, MetricsError> {
        if actual.is_empty() {
            return Err(MetricsError::Empty);
        }
        if actual.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch {
                actual: actual.len(),
                predicted: predicted.len(),
            });
        }
        for (i, (&a, &p)) in actual.iter().zip(&predicted).enumerate() {
            if !a.is_finite() || !p.is_finite() {
                return Err(MetricsError::NonFinite(i));
            }
        }
        Ok(Self { actual, predicted })
    }

    pub fn len(&self) -> usize {
        self.actual.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actual.is_empty()
    }

    pub fn actual(&self) -> &[f64] {
        &self.actual
    }

    pub fn predicted(&self) -> &[f64] {
        &self.predicted
    }
}

/// Mean absolute error: `(1/n) * sum |y_i - yhat_i|`.
pub fn mae(v: &EvalVectors) -> Result<f64, MetricsError> {
    let n = v.len() as f64;
    Ok(v.actual.iter().zip(&v.predicted).map(|(a, p)| (a - p).abs()).sum::<f64>() / n)
}

/// Coefficient of determination:
/// `1 - sum (y_i - yhat_i)^2 / sum (y_i - ybar)^2`.
///
/// A constant actual vector makes the denominator zero and is an error
/// rather than a sentinel.
pub fn r_squared(v: &EvalVectors) -> Result<f64, MetricsError> {
    if v.len() < 2 {
        return Err(MetricsError::TooFewPoints(v.len()));
    }
    let mean = v.actual.iter().sum::<f64>() / v.len() as f64;
    let ss_tot: f64 = v.actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    if ss_tot == 0.0 {
        return Err(MetricsError::ConstantActual);
    }
    let ss_res: f64 = v
        .actual
        .iter()
        .zip(&v.predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Common part of commuters (Sørensen-Dice index) over all OD rows:
/// `2 * sum min(y_g, y_r) / (sum y_g + sum y_r)`.
///
/// Both vectors must be elementwise nonnegative (clamp predictions
/// upstream); two all-zero vectors are an error.
pub fn cpc(v: &EvalVectors) -> Result<f64, MetricsError> {
    for (i, &value) in v.actual.iter().chain(&v.predicted).enumerate() {
        if value < 0.0 {
            return Err(MetricsError::NegativeEntry { index: i % v.len(), value });
        }
    }
    let sum_min: f64 = v.actual.iter().zip(&v.predicted).map(|(a, p)| a.min(*p)).sum();
    let total: f64 = v.actual.iter().sum::<f64>() + v.predicted.iter().sum::<f64>();
    if total == 0.0 {
        return Err(MetricsError::BothZero);
    }
    Ok(2.0 * sum_min / total)
}

/// The three metrics of one evaluation, with optional per-rule variants.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub mae: f64,
    pub r2: f64,
    pub cpc: f64,
    pub n_rules: usize,
    pub mae_per_rule: Option<f64>,
    pub r2_per_rule: Option<f64>,
    pub cpc_per_rule: Option<f64>,
}

impl MetricsReport {
    pub fn new(mae: f64, r2: f64, cpc: f64) -> Self {
        Self { mae, r2, cpc, n_rules: 0, mae_per_rule: None, r2_per_rule: None, cpc_per_rule: None }
    }
}

/// Divides each metric by `n_rules` and records the divisor.
pub fn per_rule(report: &MetricsReport, n_rules: usize) -> Result<MetricsReport, MetricsError> {
    if n_rules == 0 {
        return Err(MetricsError::ZeroRules);
    }
    let d = n_rules as f64;
    Ok(MetricsReport {
        mae: report.mae,
        r2: report.r2,
        cpc: report.cpc,
        n_rules,
        mae_per_rule: Some(report.mae / d),
        r2_per_rule: Some(report.r2 / d),
        cpc_per_rule: Some(report.cpc / d),
    })
}
