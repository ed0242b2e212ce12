use super::TransformError;
use crate::imagecore::Image;

/// The three colour planes of a square RGB image, each a row-major vector of
/// length `side * side`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlattenedImage {
    side: usize,
    channels: [Vec<u8>; 3],
}

impl FlattenedImage {
    pub fn new(side: usize, channels: [Vec<u8>; 3]) -> Result<Self, TransformError> {
        let expected = side * side;
        if side == 0 {
            return Err(TransformError::FlattenLength { expected: 1, actual: 0 });
        }
        if let Some(bad) = channels.iter().find(|c| c.len() != expected) {
            return Err(TransformError::FlattenLength {
                expected,
                actual: bad.len(),
            });
        }
        Ok(Self { side, channels })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn channel(&self, c: usize) -> &[u8] {
        &self.channels[c]
    }

    /// Raw serialization: the R, G and B vectors back to back (`3·N²` bytes).
    pub fn to_bytes(&self) -> Vec<u8> {
        self.channels.concat()
    }

    pub fn from_bytes(side: usize, bytes: &[u8]) -> Result<Self, TransformError> {
        let n = side * side;
        if bytes.len() != 3 * n {
            return Err(TransformError::FlattenLength {
                expected: 3 * n,
                actual: bytes.len(),
            });
        }
        Self::new(
            side,
            [
                bytes[..n].to_vec(),
                bytes[n..2 * n].to_vec(),
                bytes[2 * n..].to_vec(),
            ],
        )
    }

    /// Grayscale picture of the three planes stacked vertically (N wide, 3N tall).
    pub fn visualization(&self) -> Image {
        Image::new(self.side, 3 * self.side, 1, self.to_bytes()).expect("planes are N*N each")
    }
}

pub fn color_flatten(img: &Image) -> Result<FlattenedImage, TransformError> {
    if img.channels() != 3 || img.width() != img.height() {
        return Err(TransformError::FlattenShape {
            width: img.width(),
            height: img.height(),
            channels: img.channels(),
        });
    }
    let planes = [0, 1, 2].map(|c| img.data().iter().skip(c).step_by(3).copied().collect());
    FlattenedImage::new(img.width(), planes)
}

pub fn unflatten(flat: &FlattenedImage) -> Image {
    let n = flat.side * flat.side;
    let mut data = Vec::with_capacity(3 * n);
    for i in 0..n {
        data.extend(flat.channels.iter().map(|c| c[i]));
    }
    Image::new(flat.side, flat.side, 3, data).expect("validated at construction")
}
