use nalgebra::{DMatrix, DVector};

use super::table::{CorrectnessTable, ReportFamily};
use super::StatsError;
use crate::experiment::Agent;

/// Regressor matrix with named columns; more rows than columns and no
/// all-zero column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    matrix: DMatrix<f64>,
    column_names: Vec<String>,
}

impl DesignMatrix {
    pub fn new(matrix: DMatrix<f64>, column_names: Vec<String>) -> Result<Self, StatsError> {
        let (n, k) = matrix.shape();
        if column_names.len() != k {
            return Err(StatsError::Design(format!(
                "{k} columns but {} names",
                column_names.len()
            )));
        }
        if k == 0 || n <= k {
            return Err(StatsError::Design(format!(
                "need more observations than regressors, got {n} x {k}"
            )));
        }
        if let Some(j) = (0..k).find(|&j| matrix.column(j).iter().all(|&v| v == 0.0)) {
            return Err(StatsError::Design(format!("column {} is all zero", column_names[j])));
        }
        Ok(Self { matrix, column_names })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }
}

/// Builds the dummy-coded regression for one report family.
///
/// Columns: intercept (named for humans, the reference level), then one
/// indicator each for VOneResNet50, ResNet101 and ResNet50. Rows: all human
/// trials, then each network's, each block in ascending trial id. The order
/// matters for Durbin–Watson.
pub fn build_design(table: &CorrectnessTable, family: ReportFamily) -> Result<(DVector<f64>, DesignMatrix), StatsError> {
    let mut ordered: Vec<_> = table.rows().iter().filter(|r| family.matches(&r.transform)).collect();
    ordered.sort_by_key(|r| (Agent::ALL.iter().position(|&a| a == r.agent), r.trial_id));
    let n = ordered.len();
    let y = DVector::from_iterator(n, ordered.iter().map(|r| if r.correct { 1.0 } else { 0.0 }));
    let x = DMatrix::from_fn(n, 4, |i, j| match j {
        0 => 1.0,
        j if ordered[i].agent == Agent::ALL[j] => 1.0,
        _ => 0.0,
    });
    let names = Agent::ALL.iter().map(|a| a.display_name().to_string()).collect();
    Ok((y, DesignMatrix::new(x, names)?))
}
