use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::StatsError;
use crate::experiment::{Agent, NetworkResponses, ResponseRecord, Schedule};
use crate::transforms::{Transform, TransformKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessRow {
    pub trial_id: u32,
    pub transform: Transform,
    pub agent: Agent,
    pub correct: bool,
}

/// Per-trial 0/1 correctness for humans and each network.
///
/// Every trial id appears exactly once per agent, always with the same
/// transform.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrectnessTable {
    rows: Vec<CorrectnessRow>,
}

impl CorrectnessTable {
    pub fn new(rows: Vec<CorrectnessRow>) -> Result<Self, StatsError> {
        let mut per_agent: BTreeMap<Agent, BTreeSet<u32>> = BTreeMap::new();
        let mut transform_of: BTreeMap<u32, Transform> = BTreeMap::new();
        for r in &rows {
            if !per_agent.entry(r.agent).or_default().insert(r.trial_id) {
                return Err(StatsError::Table(format!(
                    "trial {} appears twice for {}",
                    r.trial_id, r.agent
                )));
            }
            if let Some(t) = transform_of.insert(r.trial_id, r.transform) {
                if t != r.transform {
                    return Err(StatsError::Table(format!(
                        "trial {} is tagged {} and {}",
                        r.trial_id, t, r.transform
                    )));
                }
            }
        }
        let all: BTreeSet<u32> = transform_of.keys().copied().collect();
        for agent in Agent::ALL {
            let have = per_agent.get(&agent).cloned().unwrap_or_default();
            if !rows.is_empty() && have != all {
                let missing: Vec<String> = all.difference(&have).map(u32::to_string).collect();
                return Err(StatsError::Table(format!(
                    "{agent} lacks trials [{}]",
                    missing.join(", ")
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Joins one participant's responses and the network answers over the
    /// test trials of `schedule`. Practice responses are ignored.
    pub fn assemble(
        schedule: &Schedule,
        human: &[ResponseRecord],
        networks: &NetworkResponses,
    ) -> Result<Self, StatsError> {
        let human: BTreeMap<u32, bool> = human.iter().map(|r| (r.trial_id, r.correct)).collect();
        let mut rows = Vec::new();
        let mut missing_human = Vec::new();
        for agent in Agent::ALL {
            for t in schedule.test() {
                let correct = match agent {
                    Agent::Human => match human.get(&t.trial_id) {
                        Some(&c) => c,
                        None => {
                            missing_human.push(t.trial_id.to_string());
                            continue;
                        }
                    },
                    net => *networks
                        .correct
                        .get(&net)
                        .and_then(|m| m.get(&t.trial_id))
                        .ok_or_else(|| StatsError::Table(format!("{net} lacks trial {}", t.trial_id)))?,
                };
                rows.push(CorrectnessRow {
                    trial_id: t.trial_id,
                    transform: t.spec.transform,
                    agent,
                    correct,
                });
            }
        }
        if !missing_human.is_empty() {
            return Err(StatsError::Table(format!(
                "human responses lack trials [{}]",
                missing_human.join(", ")
            )));
        }
        Self::new(rows)
    }

    pub fn rows(&self) -> &[CorrectnessRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// The subsets of trials analysed separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFamily {
    AllData,
    Baseline,
    RandomizedShuffle,
    GridShuffle,
    WithinGridShuffle,
    LocalGridShuffle,
    ColorFlatten,
    /// Grid, within-grid and local-grid shuffles with 16×16 blocks.
    AllBlock16,
}

impl ReportFamily {
    pub const ALL: [ReportFamily; 8] = [
        ReportFamily::AllData,
        ReportFamily::Baseline,
        ReportFamily::RandomizedShuffle,
        ReportFamily::GridShuffle,
        ReportFamily::WithinGridShuffle,
        ReportFamily::LocalGridShuffle,
        ReportFamily::ColorFlatten,
        ReportFamily::AllBlock16,
    ];

    pub fn matches(self, t: &Transform) -> bool {
        let family_kind = match self {
            ReportFamily::AllData => return true,
            ReportFamily::AllBlock16 => {
                return matches!(
                    t.kind(),
                    TransformKind::GridShuffle | TransformKind::WithinGridShuffle | TransformKind::LocalGridShuffle
                ) && t.block_size() == Some(16)
            }
            ReportFamily::Baseline => TransformKind::Baseline,
            ReportFamily::RandomizedShuffle => TransformKind::RandomizedShuffle,
            ReportFamily::GridShuffle => TransformKind::GridShuffle,
            ReportFamily::WithinGridShuffle => TransformKind::WithinGridShuffle,
            ReportFamily::LocalGridShuffle => TransformKind::LocalGridShuffle,
            ReportFamily::ColorFlatten => TransformKind::ColorFlatten,
        };
        t.kind() == family_kind
    }

    pub fn id(self) -> &'static str {
        match self {
            ReportFamily::AllData => "all_data",
            ReportFamily::Baseline => "baseline",
            ReportFamily::RandomizedShuffle => "randomized_shuffle",
            ReportFamily::GridShuffle => "grid_shuffle",
            ReportFamily::WithinGridShuffle => "within_grid_shuffle",
            ReportFamily::LocalGridShuffle => "local_grid_shuffle",
            ReportFamily::ColorFlatten => "color_flatten",
            ReportFamily::AllBlock16 => "all_16x16",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            ReportFamily::AllData => "OLS for all data (baseline and transforms)",
            ReportFamily::Baseline => "OLS for Baseline",
            ReportFamily::RandomizedShuffle => "OLS for Randomized Image Shuffle",
            ReportFamily::GridShuffle => "OLS for Grid Shuffle (all parameters)",
            ReportFamily::WithinGridShuffle => "OLS for Within Grid Shuffle",
            ReportFamily::LocalGridShuffle => "OLS for Local Grid Shuffle",
            ReportFamily::ColorFlatten => "OLS for Color Flatten",
            ReportFamily::AllBlock16 => "OLS for all transforms with 16x16 grid",
        }
    }
}

impl std::str::FromStr for ReportFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReportFamily::ALL
            .into_iter()
            .find(|f| f.id() == s)
            .ok_or_else(|| format!("unknown report family {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::Probability;

    fn row(trial_id: u32, agent: Agent, correct: bool) -> CorrectnessRow {
        CorrectnessRow {
            trial_id,
            transform: Transform::Baseline,
            agent,
            correct,
        }
    }

    #[test]
    fn requires_every_agent_for_every_trial() {
        let mut rows: Vec<_> = Agent::ALL.iter().map(|&a| row(1, a, true)).collect();
        assert!(CorrectnessTable::new(rows.clone()).is_ok());
        rows.pop();
        assert!(CorrectnessTable::new(rows.clone()).is_err());
        rows.push(row(1, Agent::Resnet50, true));
        rows.push(row(1, Agent::Resnet50, false));
        assert!(CorrectnessTable::new(rows).is_err());
    }

    #[test]
    fn rejects_inconsistent_tags() {
        let mut rows: Vec<_> = Agent::ALL.iter().map(|&a| row(1, a, true)).collect();
        rows[2].transform = Transform::ColorFlatten;
        assert!(CorrectnessTable::new(rows).is_err());
    }

    #[test]
    fn block16_family_membership() {
        let f = ReportFamily::AllBlock16;
        let p = Probability::HALF;
        assert!(f.matches(&Transform::GridShuffle { block_size: 16, probability: Probability::ONE }));
        assert!(f.matches(&Transform::WithinGridShuffle { block_size: 16, probability: p }));
        assert!(f.matches(&Transform::LocalGridShuffle { block_size: 16, probability: p }));
        assert!(!f.matches(&Transform::LocalGridShuffle { block_size: 8, probability: p }));
        assert!(!f.matches(&Transform::RandomizedShuffle { probability: p }));
        assert!(ReportFamily::AllData.matches(&Transform::ColorFlatten));
        assert_eq!("all_16x16".parse::<ReportFamily>(), Ok(ReportFamily::AllBlock16));
    }
}
