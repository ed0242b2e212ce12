use serde::{Deserialize, Serialize};

use crate::transforms::{Probability, Transform, TransformSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Block sizes used by the three grid-based transforms.
pub const BLOCK_SIZES: [usize; 3] = [4, 8, 16];
/// Pixel-shuffle probabilities used by the probabilistic transforms.
pub const SHUFFLE_PROBABILITIES: [Probability; 2] = [Probability::HALF, Probability::ONE];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformManifest {
    pub schema: u32,
    pub entries: Vec<TransformSpec>,
}

impl TransformManifest {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn transforms(&self) -> impl Iterator<Item = Transform> + '_ {
        self.entries.iter().map(|e| e.transform)
    }
}

/// The 18 transform configurations, in fixed order:
/// randomized × {0.5, 1}; grid × {4, 8, 16} at p = 1; within-grid and
/// local-grid × {4, 8, 16} × {0.5, 1}; colour flatten. Seeds are 0.
pub fn build_manifest() -> TransformManifest {
    let mut entries = Vec::with_capacity(18);
    for probability in SHUFFLE_PROBABILITIES {
        entries.push(Transform::RandomizedShuffle { probability });
    }
    for block_size in BLOCK_SIZES {
        entries.push(Transform::GridShuffle {
            block_size,
            probability: Probability::ONE,
        });
    }
    for block_size in BLOCK_SIZES {
        for probability in SHUFFLE_PROBABILITIES {
            entries.push(Transform::WithinGridShuffle { block_size, probability });
        }
    }
    for block_size in BLOCK_SIZES {
        for probability in SHUFFLE_PROBABILITIES {
            entries.push(Transform::LocalGridShuffle { block_size, probability });
        }
    }
    entries.push(Transform::ColorFlatten);
    TransformManifest {
        schema: SCHEMA_VERSION,
        entries: entries.into_iter().map(|t| t.with_seed(0)).collect(),
    }
}

/// Baseline followed by the 18 manifest transforms.
pub fn conditions() -> Vec<Transform> {
    std::iter::once(Transform::Baseline)
        .chain(build_manifest().transforms())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::TransformKind;

    #[test]
    fn eighteen_entries() {
        let m = build_manifest();
        assert_eq!(m.len(), 18);
        assert_eq!(m.schema, 1);
        let count = |k: TransformKind| m.transforms().filter(|t| t.kind() == k).count();
        assert_eq!(count(TransformKind::RandomizedShuffle), 2);
        assert_eq!(count(TransformKind::GridShuffle), 3);
        assert_eq!(count(TransformKind::WithinGridShuffle), 6);
        assert_eq!(count(TransformKind::LocalGridShuffle), 6);
        assert_eq!(count(TransformKind::ColorFlatten), 1);
    }

    #[test]
    fn grid_shuffle_always_full_probability() {
        let m = build_manifest();
        assert!(m.transforms().any(|t| t
            == Transform::GridShuffle {
                block_size: 16,
                probability: Probability::ONE
            }));
        assert!(m
            .transforms()
            .filter(|t| t.kind() == TransformKind::GridShuffle)
            .all(|t| t.probability() == Some(Probability::ONE)));
    }

    #[test]
    fn entries_are_distinct() {
        let all = conditions();
        assert_eq!(all.len(), 19);
        for (i, a) in all.iter().enumerate() {
            assert!(all[i + 1..].iter().all(|b| a != b));
        }
    }

    #[test]
    fn json_round_trip() {
        let m = build_manifest();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.starts_with(r#"{"schema":1,"entries":[{"kind":"randomized_shuffle""#));
        assert_eq!(serde_json::from_str::<TransformManifest>(&json).unwrap(), m);
    }
}
