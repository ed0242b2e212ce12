//! Benchmark fixtures shared by the criterion targets.

use xshuffle_core::{Dataset, Image, Split};

/// A 32×32 RGB image drawn from the seeded synthetic test split.
pub fn sample_image(seed: u64) -> Image {
    Dataset::synthetic(Split::Test, 1, seed).records.remove(0).image
}
