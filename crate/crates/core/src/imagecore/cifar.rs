use std::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Image;

pub const CIFAR_IMAGE_SIDE: usize = 32;
const PLANE: usize = CIFAR_IMAGE_SIDE * CIFAR_IMAGE_SIDE;
/// coarse label, fine label, 3 planes of 32x32
pub const CIFAR_RECORD_BYTES: usize = 2 + 3 * PLANE;
pub const FINE_CLASSES: usize = 100;
pub const COARSE_CLASSES: usize = 20;

const TRAIN_RECORDS: usize = 50_000;
const TEST_RECORDS: usize = 10_000;

#[derive(Debug, Error)]
pub enum CifarError {
    #[error("stream of {len} bytes is not a whole number of {CIFAR_RECORD_BYTES}-byte records ({complete} complete)")]
    Truncated { len: usize, complete: usize },
    #[error("record {record}: fine label {label} out of range (must be < {FINE_CLASSES})")]
    FineLabel { record: usize, label: u8 },
    #[error("record {record}: coarse label {label} out of range (must be < {COARSE_CLASSES})")]
    CoarseLabel { record: usize, label: u8 },
    #[error("record {record}: image must be 32x32x3")]
    NotCifarShape { record: usize },
    #[error("label name table has {actual} entries, expected {expected}")]
    LabelTable { expected: usize, actual: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn canonical_len(self) -> usize {
        match self {
            Split::Train => TRAIN_RECORDS,
            Split::Test => TEST_RECORDS,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledImage {
    pub image: Image,
    pub fine_label: u8,
    pub coarse_label: u8,
}

/// Human-readable names for fine and coarse classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelNames {
    fine: Vec<String>,
    coarse: Vec<String>,
}

const FINE_NAMES: [&str; FINE_CLASSES] = [
    "apple", "aquarium_fish", "baby", "bear", "beaver", "bed", "bee", "beetle", "bicycle", "bottle",
    "bowl", "boy", "bridge", "bus", "butterfly", "camel", "can", "castle", "caterpillar", "cattle",
    "chair", "chimpanzee", "clock", "cloud", "cockroach", "couch", "crab", "crocodile", "cup",
    "dinosaur", "dolphin", "elephant", "flatfish", "forest", "fox", "girl", "hamster", "house",
    "kangaroo", "keyboard", "lamp", "lawn_mower", "leopard", "lion", "lizard", "lobster", "man",
    "maple_tree", "motorcycle", "mountain", "mouse", "mushroom", "oak_tree", "orange", "orchid",
    "otter", "palm_tree", "pear", "pickup_truck", "pine_tree", "plain", "plate", "poppy",
    "porcupine", "possum", "rabbit", "raccoon", "ray", "road", "rocket", "rose", "sea", "seal",
    "shark", "shrew", "skunk", "skyscraper", "snail", "snake", "spider", "squirrel", "streetcar",
    "sunflower", "sweet_pepper", "table", "tank", "telephone", "television", "tiger", "tractor",
    "train", "trout", "tulip", "turtle", "wardrobe", "whale", "willow_tree", "wolf", "woman",
    "worm",
];

const COARSE_NAMES: [&str; COARSE_CLASSES] = [
    "aquatic_mammals",
    "fish",
    "flowers",
    "food_containers",
    "fruit_and_vegetables",
    "household_electrical_devices",
    "household_furniture",
    "insects",
    "large_carnivores",
    "large_man-made_outdoor_things",
    "large_natural_outdoor_scenes",
    "large_omnivores_and_herbivores",
    "medium_mammals",
    "non-insect_invertebrates",
    "people",
    "reptiles",
    "small_mammals",
    "trees",
    "vehicles_1",
    "vehicles_2",
];

impl Default for LabelNames {
    /// The names shipped with the canonical CIFAR-100 distribution.
    fn default() -> Self {
        Self {
            fine: FINE_NAMES.iter().map(|s| s.to_string()).collect(),
            coarse: COARSE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl LabelNames {
    pub fn new(fine: Vec<String>, coarse: Vec<String>) -> Result<Self, CifarError> {
        if fine.len() != FINE_CLASSES {
            return Err(CifarError::LabelTable {
                expected: FINE_CLASSES,
                actual: fine.len(),
            });
        }
        if coarse.len() != COARSE_CLASSES {
            return Err(CifarError::LabelTable {
                expected: COARSE_CLASSES,
                actual: coarse.len(),
            });
        }
        Ok(Self { fine, coarse })
    }

    /// Parses the one-name-per-line text files of the binary distribution.
    pub fn from_text(fine: &str, coarse: &str) -> Result<Self, CifarError> {
        let lines = |s: &str| {
            s.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(String::from)
                .collect::<Vec<_>>()
        };
        Self::new(lines(fine), lines(coarse))
    }

    pub fn fine(&self, label: u8) -> &str {
        &self.fine[label as usize]
    }

    pub fn coarse(&self, label: u8) -> &str {
        &self.coarse[label as usize]
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub split: Split,
    pub records: Vec<LabeledImage>,
    pub label_names: LabelNames,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// True when the record count matches the official split size.
    pub fn is_canonical(&self) -> bool {
        self.records.len() == self.split.canonical_len()
    }

    /// Seeded stand-in dataset in the CIFAR shape for demos and tests.
    ///
    /// Each image is a smooth two-colour gradient with a bright disc, so
    /// neighbouring pixels are strongly correlated the way photographs are.
    /// Fine labels cycle through all 100 classes; coarse label is `fine / 5`.
    pub fn synthetic(split: Split, len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let side = CIFAR_IMAGE_SIDE;
        let records = (0..len)
            .map(|i| {
                let mut byte = || (rng.next_u32() & 0xff) as f64;
                let a = [byte(), byte(), byte()];
                let b = [byte(), byte(), byte()];
                let disc = [byte(), byte(), byte()];
                let cx = byte() / 255.0 * side as f64;
                let cy = byte() / 255.0 * side as f64;
                let radius = 4.0 + byte() / 255.0 * 8.0;
                let image = Image::from_fn(side, side, 3, |x, y, c| {
                    let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                    if dx * dx + dy * dy <= radius * radius {
                        disc[c] as u8
                    } else {
                        let t = (x + y) as f64 / (2 * (side - 1)) as f64;
                        (a[c] * (1.0 - t) + b[c] * t).round() as u8
                    }
                })
                .expect("fixed 32x32x3 shape");
                let fine_label = (i % FINE_CLASSES) as u8;
                LabeledImage {
                    image,
                    fine_label,
                    coarse_label: fine_label / 5,
                }
            })
            .collect();
        Self {
            split,
            records,
            label_names: LabelNames::default(),
        }
    }
}

/// Parses the CIFAR-100 binary format: per record one coarse-label byte, one
/// fine-label byte, then 1024 red, 1024 green and 1024 blue bytes (each plane
/// row-major 32x32).
pub fn load_cifar100_binary(bytes: &[u8], split: Split) -> Result<Dataset, CifarError> {
    if bytes.len() % CIFAR_RECORD_BYTES != 0 {
        return Err(CifarError::Truncated {
            len: bytes.len(),
            complete: bytes.len() / CIFAR_RECORD_BYTES,
        });
    }
    let mut records = Vec::with_capacity(bytes.len() / CIFAR_RECORD_BYTES);
    for (record, chunk) in bytes.chunks_exact(CIFAR_RECORD_BYTES).enumerate() {
        let (coarse_label, fine_label) = (chunk[0], chunk[1]);
        if coarse_label as usize >= COARSE_CLASSES {
            return Err(CifarError::CoarseLabel {
                record,
                label: coarse_label,
            });
        }
        if fine_label as usize >= FINE_CLASSES {
            return Err(CifarError::FineLabel {
                record,
                label: fine_label,
            });
        }
        let planes = &chunk[2..];
        let mut data = Vec::with_capacity(3 * PLANE);
        for i in 0..PLANE {
            data.extend_from_slice(&[planes[i], planes[PLANE + i], planes[2 * PLANE + i]]);
        }
        let image = Image::new(CIFAR_IMAGE_SIDE, CIFAR_IMAGE_SIDE, 3, data)
            .expect("record size fixes the shape");
        records.push(LabeledImage {
            image,
            fine_label,
            coarse_label,
        });
    }
    Ok(Dataset {
        split,
        records,
        label_names: LabelNames::default(),
    })
}

/// Writes records back in the planar binary layout read by [`load_cifar100_binary`].
pub fn serialize_cifar100_binary(records: &[LabeledImage]) -> Result<Vec<u8>, CifarError> {
    let mut out = Vec::with_capacity(records.len() * CIFAR_RECORD_BYTES);
    for (record, r) in records.iter().enumerate() {
        let img = &r.image;
        if img.width() != CIFAR_IMAGE_SIDE || img.height() != CIFAR_IMAGE_SIDE || img.channels() != 3 {
            return Err(CifarError::NotCifarShape { record });
        }
        out.push(r.coarse_label);
        out.push(r.fine_label);
        for c in 0..3 {
            out.extend(img.data().iter().skip(c).step_by(3));
        }
    }
    Ok(out)
}
