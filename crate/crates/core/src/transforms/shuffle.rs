//! Pixel and block shuffles.
//!
//! Every shuffle is expressed as a source map: output position `i` takes the
//! content of input position `source[i]`. RGB triples always move together.
//!
//! Stream order for one call: all Bernoulli draws for a unit (whole image or
//! one block) in row-major scan order, then the Fisher–Yates swaps for that
//! unit. Blocks are visited in row-major block order.

use super::{Prng, Probability, TransformError};
use crate::imagecore::Image;

/// Selects each of `0..n` independently with probability `p` (scan order),
/// then rearranges the selected positions with a uniform Fisher–Yates
/// permutation. Unselected positions map to themselves; selected positions
/// may also end up fixed.
pub fn subset_permute(n: usize, p: Probability, rng: &mut Prng) -> Vec<usize> {
    let selected: Vec<usize> = (0..n).filter(|_| rng.bernoulli(p.get())).collect();
    let mut moved = selected.clone();
    rng.shuffle(&mut moved);
    let mut source: Vec<usize> = (0..n).collect();
    for (&dst, &src) in selected.iter().zip(&moved) {
        source[dst] = src;
    }
    source
}

#[derive(Debug, Clone, Copy)]
struct BlockGrid {
    block: usize,
    cols: usize,
    rows: usize,
    width: usize,
}

impl BlockGrid {
    fn new(img: &Image, block: usize) -> Result<Self, TransformError> {
        let (width, height) = (img.width(), img.height());
        if block == 0 || width % block != 0 || height % block != 0 {
            return Err(TransformError::Dimension {
                width,
                height,
                block_size: block,
            });
        }
        Ok(Self {
            block,
            cols: width / block,
            rows: height / block,
            width,
        })
    }

    fn count(&self) -> usize {
        self.cols * self.rows
    }

    /// Row-major pixel index of local offset `(dx, dy)` inside block `b`.
    fn pixel(&self, b: usize, dx: usize, dy: usize) -> usize {
        let (bx, by) = (b % self.cols, b / self.cols);
        (by * self.block + dy) * self.width + bx * self.block + dx
    }

    /// Row-major pixel index of the `k`-th pixel (local row-major) in block `b`.
    fn local(&self, b: usize, k: usize) -> usize {
        self.pixel(b, k % self.block, k / self.block)
    }
}

/// Permutes the positions of the `block`×`block` tiles; tile interiors are
/// copied verbatim.
pub fn grid_shuffle(img: &Image, block: usize, p: Probability, rng: &mut Prng) -> Result<Image, TransformError> {
    let grid = BlockGrid::new(img, block)?;
    let blocks = subset_permute(grid.count(), p, rng);
    let mut source = vec![0; img.pixel_count()];
    for (dst, &src) in blocks.iter().enumerate() {
        for k in 0..block * block {
            source[grid.local(dst, k)] = grid.local(src, k);
        }
    }
    Ok(img.gather_pixels(&source))
}

/// Shuffles individual pixels anywhere in the image.
pub fn randomized_shuffle(img: &Image, p: Probability, rng: &mut Prng) -> Image {
    let source = subset_permute(img.pixel_count(), p, rng);
    img.gather_pixels(&source)
}

/// Shuffles pixels inside each tile independently; tiles stay in place.
pub fn within_grid_shuffle(img: &Image, block: usize, p: Probability, rng: &mut Prng) -> Result<Image, TransformError> {
    let grid = BlockGrid::new(img, block)?;
    let mut source: Vec<usize> = (0..img.pixel_count()).collect();
    for b in 0..grid.count() {
        let local = subset_permute(block * block, p, rng);
        for (dst, &src) in local.iter().enumerate() {
            source[grid.local(b, dst)] = grid.local(b, src);
        }
    }
    Ok(img.gather_pixels(&source))
}

/// Within-tile pixel shuffle at probability `p`, then a full tile
/// permutation, both drawing from the same stream in that order.
pub fn local_grid_shuffle(img: &Image, block: usize, p: Probability, rng: &mut Prng) -> Result<Image, TransformError> {
    let inner = within_grid_shuffle(img, block, p, rng)?;
    grid_shuffle(&inner, block, Probability::ONE, rng)
}
