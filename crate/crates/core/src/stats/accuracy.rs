use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::table::{CorrectnessRow, CorrectnessTable};
use super::StatsError;
use crate::experiment::{conditions, manifest_transform, Agent};
use crate::transforms::{Transform, TransformKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub transform: Transform,
    pub agent: Agent,
    pub trials: usize,
    pub correct: usize,
}

impl AccuracyRow {
    pub fn accuracy_pct(&self) -> f64 {
        100.0 * self.correct as f64 / self.trials as f64
    }
}

/// Percent correct per (condition, agent). Conditions follow manifest order
/// with baseline first; conditions outside the manifest come last in tag
/// order. Groups with no trials are left out.
pub fn accuracy_table(table: &CorrectnessTable) -> Vec<AccuracyRow> {
    let order = conditions();
    let rank = |t: &Transform| order.iter().position(|c| c == t).unwrap_or(order.len());
    let mut out: Vec<AccuracyRow> = Vec::new();
    for r in table.rows() {
        match out.iter_mut().find(|a| a.transform == r.transform && a.agent == r.agent) {
            Some(a) => {
                a.trials += 1;
                a.correct += r.correct as usize;
            }
            None => out.push(AccuracyRow {
                transform: r.transform,
                agent: r.agent,
                trials: 1,
                correct: r.correct as usize,
            }),
        }
    }
    out.sort_by_key(|a| (rank(&a.transform), a.transform.to_string(), a.agent));
    out
}

/// CSV with header
/// `transform,probability,block_size,agent,trials,correct,accuracy_pct`;
/// parameters that do not apply are empty.
pub fn write_accuracy_csv<W: Write>(w: W, rows: &[AccuracyRow]) -> Result<(), StatsError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["transform", "probability", "block_size", "agent", "trials", "correct", "accuracy_pct"])?;
    for r in rows {
        out.write_record([
            r.transform.kind().name().to_string(),
            r.transform.probability().map(|p| p.get().to_string()).unwrap_or_default(),
            r.transform.block_size().map(|b| b.to_string()).unwrap_or_default(),
            r.agent.id().to_string(),
            r.trials.to_string(),
            r.correct.to_string(),
            format!("{:.2}", r.accuracy_pct()),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct CountRecord {
    transform: String,
    probability: Option<f64>,
    block_size: Option<usize>,
    agent: String,
    trials: usize,
    correct: usize,
}

/// Expands per-(condition, agent) counts, in the layout written by
/// [`write_accuracy_csv`], back into one row per trial.
///
/// Trial ids are assigned per condition in file order; within a condition
/// the first `correct` trials of each agent are the correct ones. Every agent
/// of a condition must report the same trial count.
pub fn read_cell_counts<R: Read>(r: R) -> Result<CorrectnessTable, StatsError> {
    let mut cells: Vec<(Transform, usize, Vec<(Agent, usize)>)> = Vec::new();
    for (line, rec) in csv::Reader::from_reader(r).deserialize::<CountRecord>().enumerate() {
        let rec = rec?;
        let bad = |msg: String| StatsError::Table(format!("count row {}: {msg}", line + 1));
        let kind: TransformKind = rec.transform.parse().map_err(bad)?;
        let transform = manifest_transform(kind, rec.block_size, rec.probability)
            .ok_or_else(|| bad(format!("{} is not a manifest condition", rec.transform)))?;
        let agent: Agent = rec.agent.parse().map_err(bad)?;
        if rec.correct > rec.trials {
            return Err(bad(format!("{} correct out of {}", rec.correct, rec.trials)));
        }
        match cells.iter_mut().find(|c| c.0 == transform) {
            Some(cell) if cell.1 != rec.trials => {
                return Err(bad(format!("{} trials but the condition has {}", rec.trials, cell.1)))
            }
            Some(cell) => cell.2.push((agent, rec.correct)),
            None => cells.push((transform, rec.trials, vec![(agent, rec.correct)])),
        }
    }
    let mut rows = Vec::new();
    let mut next_id = 0u32;
    for (transform, trials, agents) in cells {
        for (agent, correct) in agents {
            for i in 0..trials {
                rows.push(CorrectnessRow {
                    trial_id: next_id + i as u32,
                    transform,
                    agent,
                    correct: i < correct,
                });
            }
        }
        next_id += trials as u32;
    }
    CorrectnessTable::new(rows)
}
