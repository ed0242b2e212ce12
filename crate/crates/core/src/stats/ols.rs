use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use super::design::DesignMatrix;
use super::diagnostics::{durbin_watson, jarque_bera, JarqueBera};
use super::StatsError;

/// Relative singular-value cutoff for declaring the design rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t: f64,
    /// Two-sided, Student t with `df_resid` degrees of freedom.
    pub p_value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

/// Fit summary in the layout of a classic OLS regression table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsReport {
    pub n: usize,
    pub k: usize,
    pub df_model: usize,
    pub df_resid: usize,
    pub coefficients: Vec<Coefficient>,
    pub ssr: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_statistic: f64,
    pub f_p_value: f64,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    /// `None` when every residual is zero.
    pub durbin_watson: Option<f64>,
    /// `None` when the residual variance is zero.
    pub jarque_bera: Option<JarqueBera>,
    /// Ratio of the largest to the smallest singular value of the design.
    pub condition_number: f64,
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

impl OlsReport {
    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    pub fn std_errors(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.std_error).collect()
    }
}

fn rank(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let max = sv.max();
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * max).count()
}

/// Columns that add nothing to the span of the ones before them.
fn dependent_columns(x: &DesignMatrix) -> Vec<String> {
    let m = x.matrix();
    let mut kept: Vec<usize> = Vec::new();
    let mut dependent = Vec::new();
    for j in 0..m.ncols() {
        let mut trial = kept.clone();
        trial.push(j);
        if rank(&m.select_columns(&trial)) == trial.len() {
            kept.push(j);
        } else {
            dependent.push(x.column_names()[j].clone());
        }
    }
    dependent
}

/// Least-squares fit of `y` on `x` via Householder QR.
///
/// `σ² = SSR/(n−k)`, standard errors from `σ²·(XᵀX)⁻¹ = σ²·R⁻¹R⁻ᵀ`. R² is
/// centred on the mean of `y` (the design is expected to carry an
/// intercept). Log-likelihood is Gaussian with the MLE variance `SSR/n`;
/// `AIC = 2k − 2ℓ`, `BIC = k·ln n − 2ℓ`.
pub fn fit_ols(y: &DVector<f64>, x: &DesignMatrix) -> Result<OlsReport, StatsError> {
    let (n, k) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(StatsError::Design(format!("{} responses for {n} rows", y.len())));
    }
    let sv = x.matrix().singular_values();
    let (s_max, s_min) = (sv.max(), sv.min());
    if s_min <= RANK_TOLERANCE * s_max {
        return Err(StatsError::Singular(dependent_columns(x)));
    }

    let qr = x.matrix().clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| StatsError::Singular(dependent_columns(x)))?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| StatsError::Singular(dependent_columns(x)))?;
    let cov_unscaled = &r_inv * r_inv.transpose();

    let fitted = x.matrix() * &beta;
    let residuals: Vec<f64> = (y - &fitted).iter().copied().collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let df_resid = n - k;
    let df_model = k - 1;
    let sigma2 = ssr / df_resid as f64;

    let mean = y.mean();
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let r_squared = 1.0 - ssr / tss;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n - 1) as f64 / df_resid as f64;

    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64).map_err(|e| StatsError::Distribution(e.to_string()))?;
    let t_crit = t_dist.inverse_cdf(0.975);
    let coefficients = (0..k)
        .map(|j| {
            let estimate = beta[j];
            let std_error = (sigma2 * cov_unscaled[(j, j)]).sqrt();
            let t = estimate / std_error;
            Coefficient {
                name: x.column_names()[j].clone(),
                estimate,
                std_error,
                t,
                p_value: 2.0 * t_dist.sf(t.abs()),
                ci_lower: estimate - t_crit * std_error,
                ci_upper: estimate + t_crit * std_error,
            }
        })
        .collect();

    let (f_statistic, f_p_value) = if df_model == 0 {
        (f64::NAN, f64::NAN)
    } else {
        let f = (r_squared / df_model as f64) / ((1.0 - r_squared) / df_resid as f64);
        let dist = FisherSnedecor::new(df_model as f64, df_resid as f64)
            .map_err(|e| StatsError::Distribution(e.to_string()))?;
        let p = if f.is_finite() { dist.sf(f) } else { 0.0 };
        (f, p)
    };

    let nf = n as f64;
    let log_likelihood = -nf / 2.0 * ((2.0 * std::f64::consts::PI).ln() + (ssr / nf).ln() + 1.0);
    let kf = k as f64;

    Ok(OlsReport {
        n,
        k,
        df_model,
        df_resid,
        coefficients,
        ssr,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_p_value,
        log_likelihood,
        aic: 2.0 * kf - 2.0 * log_likelihood,
        bic: kf * nf.ln() - 2.0 * log_likelihood,
        durbin_watson: durbin_watson(&residuals).ok(),
        jarque_bera: jarque_bera(&residuals).ok(),
        condition_number: s_max / s_min,
        residuals,
    })
}
