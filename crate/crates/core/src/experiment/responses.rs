use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::schedule::{Schedule, OPTION_COUNT};

pub const MIN_CONFIDENCE: u8 = 1;
pub const MAX_CONFIDENCE: u8 = 5;

/// Who answered a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    Human,
    Vone,
    Resnet101,
    Resnet50,
}

impl Agent {
    /// Design-matrix order: humans are the reference level.
    pub const ALL: [Agent; 4] = [Agent::Human, Agent::Vone, Agent::Resnet101, Agent::Resnet50];
    pub const NETWORKS: [Agent; 3] = [Agent::Vone, Agent::Resnet101, Agent::Resnet50];

    pub fn id(self) -> &'static str {
        match self {
            Agent::Human => "human",
            Agent::Vone => "vone",
            Agent::Resnet101 => "resnet101",
            Agent::Resnet50 => "resnet50",
        }
    }

    /// Label used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Agent::Human => "Humans",
            Agent::Vone => "VOneResNet50",
            Agent::Resnet101 => "ResNet101",
            Agent::Resnet50 => "ResNet50",
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl std::str::FromStr for Agent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Agent::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| format!("unknown agent {s:?}"))
    }
}

/// One participant answer, as stored in the JSON-lines response log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub trial_id: u32,
    pub chosen_option: usize,
    pub confidence: u8,
    /// Client-measured time from stimulus render to submit.
    pub reaction_time_ms: u64,
    /// Server receive time, milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub correct: bool,
}

pub fn write_response_log<W: Write>(mut w: W, records: &[ResponseRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_response_log<R: BufRead>(r: R) -> Result<Vec<ResponseRecord>, ResponseError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| ResponseError::Log {
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum ResponseError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("response log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("row {row}: {message}")]
    BadRow { row: usize, message: String },
    #[error("row {row}: trial {trial_id} is not a test trial of this schedule")]
    UnknownTrial { row: usize, trial_id: u32 },
    #[error("row {row}: duplicate answer from {agent} for trial {trial_id}")]
    Duplicate { row: usize, agent: Agent, trial_id: u32 },
    #[error("missing answers: {}", format_gaps(.0))]
    Gaps(BTreeMap<Agent, Vec<u32>>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_gaps(gaps: &BTreeMap<Agent, Vec<u32>>) -> String {
    gaps.iter()
        .map(|(agent, ids)| {
            let ids: Vec<String> = ids.iter().map(u32::to_string).collect();
            format!("{agent} lacks trials [{}]", ids.join(", "))
        })
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Deserialize)]
struct NetworkRow {
    trial_id: u32,
    agent: String,
    chosen_option: usize,
}

/// Per-network correctness, keyed by trial id (test trials only).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NetworkResponses {
    pub correct: BTreeMap<Agent, BTreeMap<u32, bool>>,
}

impl NetworkResponses {
    pub fn accuracy(&self, agent: Agent) -> Option<f64> {
        let answers = self.correct.get(&agent)?;
        if answers.is_empty() {
            return None;
        }
        Some(answers.values().filter(|&&c| c).count() as f64 / answers.len() as f64)
    }
}

/// Reads a `trial_id,agent,chosen_option` CSV of network answers and scores
/// them against `schedule`. Every test trial needs one row per network.
pub fn load_network_responses<R: Read>(reader: R, schedule: &Schedule) -> Result<NetworkResponses, ResponseError> {
    let test: BTreeMap<u32, usize> = schedule.test().map(|t| (t.trial_id, t.correct_option)).collect();
    let mut out = NetworkResponses::default();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for (i, row) in rdr.deserialize::<NetworkRow>().enumerate() {
        let row_no = i + 1;
        let row = row?;
        let agent: Agent = row.agent.parse().map_err(|message| ResponseError::BadRow { row: row_no, message })?;
        if agent == Agent::Human {
            return Err(ResponseError::BadRow {
                row: row_no,
                message: "human answers belong in the response log".into(),
            });
        }
        if row.chosen_option >= OPTION_COUNT {
            return Err(ResponseError::BadRow {
                row: row_no,
                message: format!("chosen_option {} out of range", row.chosen_option),
            });
        }
        let correct_option = *test.get(&row.trial_id).ok_or(ResponseError::UnknownTrial {
            row: row_no,
            trial_id: row.trial_id,
        })?;
        let answers = out.correct.entry(agent).or_default();
        if answers.insert(row.trial_id, row.chosen_option == correct_option).is_some() {
            return Err(ResponseError::Duplicate {
                row: row_no,
                agent,
                trial_id: row.trial_id,
            });
        }
    }

    let mut gaps = BTreeMap::new();
    for agent in Agent::NETWORKS {
        let answered: BTreeSet<u32> = out.correct.get(&agent).map(|m| m.keys().copied().collect()).unwrap_or_default();
        let missing: Vec<u32> = test.keys().filter(|id| !answered.contains(id)).copied().collect();
        if !missing.is_empty() {
            gaps.insert(agent, missing);
        }
    }
    if !gaps.is_empty() {
        return Err(ResponseError::Gaps(gaps));
    }
    Ok(out)
}

/// Writes network answers in the fixture CSV format.
pub fn write_network_csv<W: Write>(w: W, rows: &[(u32, Agent, usize)]) -> Result<(), ResponseError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["trial_id", "agent", "chosen_option"])?;
    for (trial_id, agent, chosen) in rows {
        wtr.write_record([trial_id.to_string(), agent.id().to_string(), chosen.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
