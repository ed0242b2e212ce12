//! Correctness tables, dummy-coded OLS fits and per-condition accuracy.

mod accuracy;
mod design;
mod diagnostics;
mod ols;
mod report;
mod table;

use thiserror::Error;

pub use nalgebra::{DMatrix, DVector};

pub use accuracy::{accuracy_table, read_cell_counts, write_accuracy_csv, AccuracyRow};
pub use design::{build_design, DesignMatrix};
pub use diagnostics::{durbin_watson, jarque_bera, JarqueBera};
pub use ols::{fit_ols, Coefficient, OlsReport, RANK_TOLERANCE};
pub use report::render_text;
pub use table::{CorrectnessRow, CorrectnessTable, ReportFamily};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("correctness table: {0}")]
    Table(String),
    #[error("design matrix: {0}")]
    Design(String),
    #[error("design matrix is rank deficient; dependent columns: {}", .0.join(", "))]
    Singular(Vec<String>),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("distribution: {0}")]
    Distribution(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Builds and fits the regression for one report family.
pub fn fit_family(table: &CorrectnessTable, family: ReportFamily) -> Result<OlsReport, StatsError> {
    let (y, x) = build_design(table, family)?;
    fit_ols(&y, &x)
}
