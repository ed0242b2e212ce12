use serde::{Deserialize, Serialize};

use super::StatsError;

/// Sum of squared successive differences over the residual sum of squares.
pub fn durbin_watson(residuals: &[f64]) -> Result<f64, StatsError> {
    let ss: f64 = residuals.iter().map(|r| r * r).sum();
    if residuals.is_empty() || ss == 0.0 {
        return Err(StatsError::Degenerate("residuals are all zero"));
    }
    let diff: f64 = residuals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(diff / ss)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JarqueBera {
    pub statistic: f64,
    pub p_value: f64,
    pub skew: f64,
    /// Plain (not excess) kurtosis; 3 for a normal sample.
    pub kurtosis: f64,
}

/// Normality test from the sample's third and fourth central moments.
///
/// `skew = m3 / m2^1.5`, `kurtosis = m4 / m2^2`,
/// `JB = n/6 · (skew² + (kurtosis − 3)² / 4)`, p from χ² with 2 degrees of
/// freedom (`exp(−JB/2)`).
pub fn jarque_bera(residuals: &[f64]) -> Result<JarqueBera, StatsError> {
    let n = residuals.len() as f64;
    if residuals.is_empty() {
        return Err(StatsError::Degenerate("no residuals"));
    }
    let mean = residuals.iter().sum::<f64>() / n;
    let moment = |k: i32| residuals.iter().map(|r| (r - mean).powi(k)).sum::<f64>() / n;
    let m2 = moment(2);
    if m2 == 0.0 {
        return Err(StatsError::Degenerate("residual variance is zero"));
    }
    let skew = moment(3) / m2.powf(1.5);
    let kurtosis = moment(4) / (m2 * m2);
    let statistic = n / 6.0 * (skew * skew + (kurtosis - 3.0).powi(2) / 4.0);
    Ok(JarqueBera {
        statistic,
        p_value: (-statistic / 2.0).exp(),
        skew,
        kurtosis,
    })
}
