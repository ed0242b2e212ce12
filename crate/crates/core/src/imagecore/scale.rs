use super::{Image, ImageError};

/// Per-axis sampling taps: lower index, upper index, weight of the upper one.
fn taps(input: usize, output: usize) -> Vec<(usize, usize, f64)> {
    let scale = input as f64 / output as f64;
    let max = (input - 1) as f64;
    (0..output)
        .map(|i| {
            let src = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
            let lo = src.floor() as usize;
            let hi = (lo + 1).min(input - 1);
            (lo, hi, src - lo as f64)
        })
        .collect()
}

/// Bilinear resize using pixel-centre alignment.
///
/// Output pixel `i` samples source coordinate `(i + 0.5) * in / out - 0.5`,
/// clamped to `[0, in - 1]`. Channels are interpolated independently and
/// rounded to nearest, ties away from zero.
pub fn scale_linear(img: &Image, out_w: usize, out_h: usize) -> Result<Image, ImageError> {
    if out_w == 0 || out_h == 0 {
        return Err(ImageError::ZeroDimension {
            width: out_w,
            height: out_h,
        });
    }
    let xs = taps(img.width(), out_w);
    let ys = taps(img.height(), out_h);
    let ch = img.channels();
    let sample = |x: usize, y: usize, c: usize| img.data()[(y * img.width() + x) * ch + c] as f64;

    let mut data = Vec::with_capacity(out_w * out_h * ch);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            for c in 0..ch {
                let top = sample(x0, y0, c) * (1.0 - tx) + sample(x1, y0, c) * tx;
                let bottom = sample(x0, y1, c) * (1.0 - tx) + sample(x1, y1, c) * tx;
                let v = top * (1.0 - ty) + bottom * ty;
                data.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    Image::new(out_w, out_h, ch, data)
}
