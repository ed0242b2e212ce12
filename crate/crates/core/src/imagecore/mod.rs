//! Pixel containers, CIFAR-100 ingestion, image file IO and display scaling.
//!
//! Images are stored row-major and pixel-interleaved (`R,G,B,R,G,B,...` for
//! three-channel data). The CIFAR-100 planar layout is converted once at load.

mod cifar;
mod codec;
mod scale;

pub use cifar::{
    load_cifar100_binary, serialize_cifar100_binary, Dataset, LabelNames, LabeledImage, Split,
    CIFAR_IMAGE_SIDE, CIFAR_RECORD_BYTES, COARSE_CLASSES, FINE_CLASSES,
};
pub use codec::{read_image, read_image_file, write_image, write_image_file, ImageFormat};
pub use scale::scale_linear;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    ZeroDimension { width: usize, height: usize },
    #[error("unsupported channel count {0}; expected 1 or 3")]
    BadChannels(usize),
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("png codec: {0}")]
    Png(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroDimension { width, height });
        }
        if channels != 1 && channels != 3 {
            return Err(ImageError::BadChannels(channels));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(ImageError::LengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every sample set to `value`.
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Result<Self, ImageError> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    /// Builds an image from a per-sample function `f(x, y, channel)`.
    pub fn from_fn<F>(width: usize, height: usize, channels: usize, mut f: F) -> Result<Self, ImageError>
    where
        F: FnMut(usize, usize, usize) -> u8,
    {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// The samples of pixel `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// The samples of the pixel at row-major position `index`.
    pub fn pixel_at(&self, index: usize) -> &[u8] {
        let start = index * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Builds a same-shaped image where output pixel `i` is input pixel `source[i]`.
    ///
    /// `source` must be a permutation of `0..pixel_count()`.
    pub(crate) fn gather_pixels(&self, source: &[usize]) -> Image {
        debug_assert_eq!(source.len(), self.pixel_count());
        let mut data = Vec::with_capacity(self.data.len());
        for &src in source {
            data.extend_from_slice(self.pixel_at(src));
        }
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            data,
        }
    }
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .field("bytes", &self.data.len())
            .finish()
    }
}
