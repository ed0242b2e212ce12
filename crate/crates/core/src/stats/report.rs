use std::fmt::Write;

use super::ols::OlsReport;

const WIDTH: usize = 78;

fn num(v: f64, decimals: usize) -> String {
    if v.is_finite() {
        format!("{v:.decimals$}")
    } else {
        "nan".to_string()
    }
}

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map(|v| num(v, decimals)).unwrap_or_else(|| "nan".to_string())
}

/// Fixed-width regression summary, laid out like the usual statistics-package
/// OLS printout.
pub fn render_text(title: &str, report: &OlsReport) -> String {
    let mut s = String::new();
    let rule = "=".repeat(WIDTH);
    let thin = "-".repeat(WIDTH);
    let pair = |s: &mut String, l: &str, lv: String, r: &str, rv: String| {
        let _ = writeln!(s, "{l:<20}{lv:>18}   {r:<22}{rv:>15}");
    };

    let _ = writeln!(s, "{title:^WIDTH$}");
    let _ = writeln!(s, "{rule}");
    pair(&mut s, "Dep. Variable:", "y".into(), "R-squared:", num(report.r_squared, 3));
    pair(&mut s, "Model:", "OLS".into(), "Adj. R-squared:", num(report.adj_r_squared, 3));
    pair(&mut s, "Method:", "Least Squares".into(), "F-statistic:", num(report.f_statistic, 4));
    pair(&mut s, "No. Observations:", report.n.to_string(), "Prob (F-statistic):", num(report.f_p_value, 3));
    pair(&mut s, "Df Residuals:", report.df_resid.to_string(), "Log-Likelihood:", num(report.log_likelihood, 3));
    pair(&mut s, "Df Model:", report.df_model.to_string(), "AIC:", num(report.aic, 2));
    pair(&mut s, "", String::new(), "BIC:", num(report.bic, 2));
    let _ = writeln!(s, "{rule}");
    let _ = writeln!(
        s,
        "{:<16}{:>10}{:>10}{:>10}{:>10}{:>11}{:>11}",
        "", "coef", "std err", "t", "P>|t|", "[0.025", "0.975]"
    );
    let _ = writeln!(s, "{thin}");
    for c in &report.coefficients {
        let _ = writeln!(
            s,
            "{:<16}{:>10}{:>10}{:>10}{:>10}{:>11}{:>11}",
            c.name,
            num(c.estimate, 4),
            num(c.std_error, 3),
            num(c.t, 3),
            num(c.p_value, 3),
            num(c.ci_lower, 3),
            num(c.ci_upper, 3)
        );
    }
    let _ = writeln!(s, "{rule}");
    let jb = report.jarque_bera;
    pair(&mut s, "Skew:", opt(jb.map(|j| j.skew), 3), "Durbin-Watson:", opt(report.durbin_watson, 3));
    pair(&mut s, "Kurtosis:", opt(jb.map(|j| j.kurtosis), 3), "Jarque-Bera (JB):", opt(jb.map(|j| j.statistic), 3));
    pair(&mut s, "", String::new(), "Prob(JB):", opt(jb.map(|j| j.p_value), 3));
    pair(&mut s, "", String::new(), "Cond. No.", num(report.condition_number, 2));
    let _ = writeln!(s, "{rule}");
    s
}
