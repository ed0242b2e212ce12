//! The five shuffling transforms and their seeded dispatch.

mod flatten;
mod prng;
mod shuffle;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::Image;

pub use flatten::{color_flatten, unflatten, FlattenedImage};
pub use prng::Prng;
pub use shuffle::{grid_shuffle, local_grid_shuffle, randomized_shuffle, subset_permute, within_grid_shuffle};

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("block size {block_size} does not evenly divide a {width}x{height} image")]
    Dimension {
        width: usize,
        height: usize,
        block_size: usize,
    },
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("colour flatten needs a square 3-channel image, got {width}x{height}x{channels}")]
    FlattenShape {
        width: usize,
        height: usize,
        channels: usize,
    },
    #[error("flattened channel holds {actual} samples, expected {expected}")]
    FlattenLength { expected: usize, actual: usize },
}

/// A shuffle probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub const ZERO: Probability = Probability(0.0);
    pub const HALF: Probability = Probability(0.5);
    pub const ONE: Probability = Probability(1.0);

    pub fn new(p: f64) -> Result<Self, TransformError> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self(p))
        } else {
            Err(TransformError::Probability(p))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = TransformError;

    fn try_from(p: f64) -> Result<Self, Self::Error> {
        Self::new(p)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

/// Which transform to run, with its hyperparameters (no seed).
///
/// Serialized flat: `{"kind": "within_grid_shuffle", "block_size": 8, "probability": 0.5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transform {
    Baseline,
    GridShuffle { block_size: usize, probability: Probability },
    RandomizedShuffle { probability: Probability },
    WithinGridShuffle { block_size: usize, probability: Probability },
    LocalGridShuffle { block_size: usize, probability: Probability },
    ColorFlatten,
}

/// Transform family, ignoring hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Baseline,
    GridShuffle,
    RandomizedShuffle,
    WithinGridShuffle,
    LocalGridShuffle,
    ColorFlatten,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Baseline => "baseline",
            TransformKind::GridShuffle => "grid_shuffle",
            TransformKind::RandomizedShuffle => "randomized_shuffle",
            TransformKind::WithinGridShuffle => "within_grid_shuffle",
            TransformKind::LocalGridShuffle => "local_grid_shuffle",
            TransformKind::ColorFlatten => "color_flatten",
        }
    }
}

impl std::str::FromStr for TransformKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            TransformKind::Baseline,
            TransformKind::GridShuffle,
            TransformKind::RandomizedShuffle,
            TransformKind::WithinGridShuffle,
            TransformKind::LocalGridShuffle,
            TransformKind::ColorFlatten,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| format!("unknown transform kind {s:?}"))
    }
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Transform {
    pub fn kind(&self) -> TransformKind {
        match self {
            Transform::Baseline => TransformKind::Baseline,
            Transform::GridShuffle { .. } => TransformKind::GridShuffle,
            Transform::RandomizedShuffle { .. } => TransformKind::RandomizedShuffle,
            Transform::WithinGridShuffle { .. } => TransformKind::WithinGridShuffle,
            Transform::LocalGridShuffle { .. } => TransformKind::LocalGridShuffle,
            Transform::ColorFlatten => TransformKind::ColorFlatten,
        }
    }

    pub fn block_size(&self) -> Option<usize> {
        match *self {
            Transform::GridShuffle { block_size, .. }
            | Transform::WithinGridShuffle { block_size, .. }
            | Transform::LocalGridShuffle { block_size, .. } => Some(block_size),
            _ => None,
        }
    }

    pub fn probability(&self) -> Option<Probability> {
        match *self {
            Transform::GridShuffle { probability, .. }
            | Transform::RandomizedShuffle { probability }
            | Transform::WithinGridShuffle { probability, .. }
            | Transform::LocalGridShuffle { probability, .. } => Some(probability),
            _ => None,
        }
    }

    pub fn with_seed(self, seed: u64) -> TransformSpec {
        TransformSpec { transform: self, seed }
    }
}

impl fmt::Display for Transform {
    /// Compact tag such as `within_grid_shuffle/b8/p0.5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind().name())?;
        if let Some(b) = self.block_size() {
            write!(f, "/b{b}")?;
        }
        if let Some(p) = self.probability() {
            write!(f, "/p{}", p.get())?;
        }
        Ok(())
    }
}

/// A transform plus the seed of the single PRNG stream it consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    #[serde(flatten)]
    pub transform: Transform,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformOutput {
    Image(Image),
    Flattened(FlattenedImage),
}

impl TransformOutput {
    /// Displayable raster; flattened output renders as stacked channel planes.
    pub fn into_display_image(self) -> Image {
        match self {
            TransformOutput::Image(img) => img,
            TransformOutput::Flattened(flat) => flat.visualization(),
        }
    }
}

/// Runs `spec` on `img` with a fresh [`Prng`] seeded from `spec.seed`.
pub fn apply(spec: &TransformSpec, img: &Image) -> Result<TransformOutput, TransformError> {
    let mut rng = Prng::new(spec.seed);
    let out = match spec.transform {
        Transform::Baseline => img.clone(),
        Transform::GridShuffle { block_size, probability } => grid_shuffle(img, block_size, probability, &mut rng)?,
        Transform::RandomizedShuffle { probability } => randomized_shuffle(img, probability, &mut rng),
        Transform::WithinGridShuffle { block_size, probability } => {
            within_grid_shuffle(img, block_size, probability, &mut rng)?
        }
        Transform::LocalGridShuffle { block_size, probability } => {
            local_grid_shuffle(img, block_size, probability, &mut rng)?
        }
        Transform::ColorFlatten => return color_flatten(img).map(TransformOutput::Flattened),
    };
    Ok(TransformOutput::Image(out))
}
