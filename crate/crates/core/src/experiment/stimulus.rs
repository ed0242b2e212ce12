use thiserror::Error;

use super::schedule::Trial;
use crate::imagecore::{scale_linear, Dataset, Image, ImageError};
use crate::transforms::{apply, TransformError};

/// Side length of the square stimulus shown to human participants.
pub const DISPLAY_SIDE: usize = 128;

#[derive(Debug, Error)]
pub enum StimulusError {
    #[error("trial references image {index} but the {split} split holds {len}")]
    MissingImage { index: usize, split: String, len: usize },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// The picture a human sees for `trial`: the dataset image scaled to
/// 128×128, then transformed with the trial's spec. Colour-flatten trials
/// render as their stacked channel planes.
pub fn render_stimulus(dataset: &Dataset, trial: &Trial) -> Result<Image, StimulusError> {
    let record = dataset
        .records
        .get(trial.image_ref.index)
        .ok_or_else(|| StimulusError::MissingImage {
            index: trial.image_ref.index,
            split: dataset.split.to_string(),
            len: dataset.len(),
        })?;
    let scaled = scale_linear(&record.image, DISPLAY_SIDE, DISPLAY_SIDE)?;
    Ok(apply(&trial.spec, &scaled)?.into_display_image())
}
