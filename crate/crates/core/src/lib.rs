//! Extreme pixel-shuffling transforms for object-recognition robustness
//! studies, plus the tooling to compare humans and networks on them.
//!
//! - [`imagecore`]: rasters, CIFAR-100 binary ingestion, PNG/PPM IO, display scaling.
//! - [`transforms`]: grid, randomized, within-grid and local-grid shuffles and
//!   colour flattening, all deterministic under an explicit seed.
//! - [`experiment`]: manifest, trial schedules, session state machine, responses.
//! - [`stats`]: correctness tables, dummy-coded OLS and accuracy summaries.

pub mod imagecore;
pub mod experiment;
pub mod stats;
pub mod transforms;

pub use imagecore::{Dataset, Image, ImageError, LabeledImage, Split};
pub use transforms::{apply, Prng, Probability, Transform, TransformKind, TransformOutput, TransformSpec};
pub use stats::{fit_ols, CorrectnessTable, OlsReport, ReportFamily, StatsError};
