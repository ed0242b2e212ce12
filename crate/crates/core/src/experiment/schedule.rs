use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::manifest::{build_manifest, conditions, SCHEMA_VERSION};
use crate::imagecore::{Dataset, Split, FINE_CLASSES};
use crate::transforms::{Prng, Probability, Transform, TransformKind, TransformSpec};

pub const OPTION_COUNT: usize = 5;
pub const CANONICAL_PRACTICE_TRIALS: usize = 17;
pub const CANONICAL_TEST_TRIALS: usize = 93;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("test plan sums to {planned} trials but {configured} are configured")]
    PlanTotal { planned: usize, configured: usize },
    #[error("{requested} practice trials requested but only {available} distinct conditions exist")]
    TooManyPractice { requested: usize, available: usize },
    #[error("schedules are drawn from the test split, got {0}")]
    WrongSplit(Split),
    #[error("dataset cannot supply {needed} images of distinct classes for {condition}")]
    DatasetTooSmall { condition: String, needed: usize },
    #[error("test plan lists {0} more than once")]
    DuplicatePlanEntry(String),
    #[error("trial {trial_id}: {reason}")]
    InvalidTrial { trial_id: u32, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Practice,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageRef {
    pub split: Split,
    pub index: usize,
}

/// One stimulus presentation with its five labelled options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub trial_id: u32,
    pub phase: Phase,
    pub image_ref: ImageRef,
    /// Transform shown; `spec.seed` equals `display_seed`.
    pub spec: TransformSpec,
    /// Fine-label ids offered to the participant.
    pub options: [u8; OPTION_COUNT],
    pub correct_option: usize,
    pub display_seed: u64,
}

impl Trial {
    pub fn true_label(&self) -> u8 {
        self.options[self.correct_option]
    }

    fn validate(&self) -> Result<(), ScheduleError> {
        let fail = |reason: &str| ScheduleError::InvalidTrial {
            trial_id: self.trial_id,
            reason: reason.to_string(),
        };
        if self.correct_option >= OPTION_COUNT {
            return Err(fail("correct option out of range"));
        }
        let distinct: HashSet<u8> = self.options.iter().copied().collect();
        if distinct.len() != OPTION_COUNT {
            return Err(fail("options are not distinct"));
        }
        if self.options.iter().any(|&o| o as usize >= FINE_CLASSES) {
            return Err(fail("option is not a fine label"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    #[serde(flatten)]
    pub transform: Transform,
    pub trials: usize,
}

/// Number of test trials per condition (baseline or manifest transform).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestPlan {
    pub entries: Vec<PlanEntry>,
}

impl TestPlan {
    /// Baseline 5, randomized shuffle 4 per probability, every other
    /// configuration 5: 93 trials in all.
    pub fn canonical() -> Self {
        let entries = conditions()
            .into_iter()
            .map(|transform| PlanEntry {
                trials: if transform.kind() == TransformKind::RandomizedShuffle { 4 } else { 5 },
                transform,
            })
            .collect();
        Self { entries }
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.trials).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub n_practice: usize,
    pub n_test: usize,
    pub plan: TestPlan,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            n_practice: CANONICAL_PRACTICE_TRIALS,
            n_test: CANONICAL_TEST_TRIALS,
            plan: TestPlan::canonical(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub schema: u32,
    pub seed: u64,
    pub trials: Vec<Trial>,
}

impl Schedule {
    pub fn practice(&self) -> impl Iterator<Item = &Trial> {
        self.trials.iter().filter(|t| t.phase == Phase::Practice)
    }

    pub fn test(&self) -> impl Iterator<Item = &Trial> {
        self.trials.iter().filter(|t| t.phase == Phase::Test)
    }

    pub fn trial(&self, trial_id: u32) -> Option<&Trial> {
        self.trials.iter().find(|t| t.trial_id == trial_id)
    }

    /// Checks option integrity, unique ids and practice-before-test ordering.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        let mut ids = HashSet::new();
        let mut seen_test = false;
        for t in &self.trials {
            t.validate()?;
            if !ids.insert(t.trial_id) {
                return Err(ScheduleError::InvalidTrial {
                    trial_id: t.trial_id,
                    reason: "duplicate trial id".into(),
                });
            }
            match t.phase {
                Phase::Test => seen_test = true,
                Phase::Practice if seen_test => {
                    return Err(ScheduleError::InvalidTrial {
                        trial_id: t.trial_id,
                        reason: "practice trial after a test trial".into(),
                    })
                }
                Phase::Practice => {}
            }
        }
        Ok(())
    }
}

/// Draws four distractors uniformly without replacement from the other 99
/// fine labels and places the truth at a uniform position.
fn draw_options(truth: u8, rng: &mut Prng) -> ([u8; OPTION_COUNT], usize) {
    let mut pool: Vec<u8> = (0..FINE_CLASSES as u8).filter(|&l| l != truth).collect();
    // partial Fisher–Yates: first four slots become the sample
    for i in 0..OPTION_COUNT - 1 {
        let j = i + rng.index_below(pool.len() - i);
        pool.swap(i, j);
    }
    let correct = rng.index_below(OPTION_COUNT);
    let mut options = [0u8; OPTION_COUNT];
    let mut distractors = pool.into_iter();
    for (slot, opt) in options.iter_mut().enumerate() {
        *opt = if slot == correct {
            truth
        } else {
            distractors.next().expect("four distractors")
        };
    }
    (options, correct)
}

struct Draft {
    phase: Phase,
    index: usize,
    transform: Transform,
}

/// Picks `count` images from `pool` (consumed front to back) with pairwise
/// distinct fine labels; chosen indices are removed from the pool.
fn take_distinct_classes(
    dataset: &Dataset,
    pool: &mut Vec<usize>,
    count: usize,
    transform: &Transform,
) -> Result<Vec<usize>, ScheduleError> {
    let mut classes = HashSet::new();
    let mut chosen = Vec::with_capacity(count);
    let mut pos = 0;
    while chosen.len() < count && pos < pool.len() {
        let idx = pool[pos];
        if classes.insert(dataset.records[idx].fine_label) {
            chosen.push(pool.remove(pos));
        } else {
            pos += 1;
        }
    }
    if chosen.len() < count {
        return Err(ScheduleError::DatasetTooSmall {
            condition: transform.to_string(),
            needed: count,
        });
    }
    Ok(chosen)
}

/// Builds the practice and test trials for one participant.
///
/// Stream order from `Prng::new(seed)`: practice condition shuffle, practice
/// image picks, one index shuffle per transform family (in plan order of
/// first appearance), test presentation shuffle, then per trial (in final
/// order) the option draw and the display seed.
///
/// - Practice uses `n_practice` distinct conditions out of baseline plus the
///   18 manifest transforms, each on a different image.
/// - Within a test condition, images have distinct fine labels.
/// - No image is used twice with the same transform family.
pub fn generate_schedule(dataset: &Dataset, seed: u64, config: &ScheduleConfig) -> Result<Schedule, ScheduleError> {
    if dataset.split != Split::Test {
        return Err(ScheduleError::WrongSplit(dataset.split));
    }
    let planned = config.plan.total();
    if planned != config.n_test {
        return Err(ScheduleError::PlanTotal {
            planned,
            configured: config.n_test,
        });
    }
    for (i, e) in config.plan.entries.iter().enumerate() {
        if config.plan.entries[..i].iter().any(|o| o.transform == e.transform) {
            return Err(ScheduleError::DuplicatePlanEntry(e.transform.to_string()));
        }
    }
    let all_conditions = conditions();
    if config.n_practice > all_conditions.len() {
        return Err(ScheduleError::TooManyPractice {
            requested: config.n_practice,
            available: all_conditions.len(),
        });
    }

    let mut rng = Prng::new(seed);
    let mut drafts = Vec::with_capacity(config.n_practice + config.n_test);

    let mut practice_conditions = all_conditions;
    rng.shuffle(&mut practice_conditions);
    practice_conditions.truncate(config.n_practice);
    if dataset.len() < config.n_practice {
        return Err(ScheduleError::DatasetTooSmall {
            condition: "practice".into(),
            needed: config.n_practice,
        });
    }
    let mut used = HashSet::new();
    for transform in practice_conditions {
        let index = loop {
            let idx = rng.index_below(dataset.len());
            if used.insert(idx) {
                break idx;
            }
        };
        drafts.push(Draft {
            phase: Phase::Practice,
            index,
            transform,
        });
    }

    let mut test = Vec::with_capacity(config.n_test);
    let mut families: Vec<TransformKind> = Vec::new();
    for e in &config.plan.entries {
        if !families.contains(&e.transform.kind()) {
            families.push(e.transform.kind());
        }
    }
    for family in families {
        let mut pool: Vec<usize> = (0..dataset.len()).collect();
        rng.shuffle(&mut pool);
        for e in config.plan.entries.iter().filter(|e| e.transform.kind() == family) {
            for index in take_distinct_classes(dataset, &mut pool, e.trials, &e.transform)? {
                test.push(Draft {
                    phase: Phase::Test,
                    index,
                    transform: e.transform,
                });
            }
        }
    }
    rng.shuffle(&mut test);
    drafts.extend(test);

    let trials = drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let truth = dataset.records[d.index].fine_label;
            let (options, correct_option) = draw_options(truth, &mut rng);
            let display_seed = rng.next_u64();
            Trial {
                trial_id: i as u32,
                phase: d.phase,
                image_ref: ImageRef {
                    split: dataset.split,
                    index: d.index,
                },
                spec: d.transform.with_seed(display_seed),
                options,
                correct_option,
                display_seed,
            }
        })
        .collect();

    Ok(Schedule {
        schema: SCHEMA_VERSION,
        seed,
        trials,
    })
}

/// Looks up the manifest entry matching a probability/block pair, for callers
/// that build plans by hand.
pub fn manifest_transform(kind: TransformKind, block_size: Option<usize>, probability: Option<f64>) -> Option<Transform> {
    let matches = |t: &Transform| {
        t.kind() == kind
            && t.block_size() == block_size
            && t.probability().map(Probability::get) == probability
    };
    std::iter::once(Transform::Baseline)
        .chain(build_manifest().transforms())
        .find(matches)
}
