use std::io::{BufRead, Cursor, Seek};
use std::path::Path;

use super::{Image, ImageError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    /// 8-bit gray or RGB, non-interlaced.
    Png,
    /// Binary netpbm, maxval 255: P6 for RGB, P5 for gray.
    Ppm,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "png" => Some(Self::Png),
            "ppm" | "pgm" | "pnm" => Some(Self::Ppm),
            _ => None,
        }
    }
}

impl std::str::FromStr for ImageFormat {
    type Err = ImageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "png" => Ok(Self::Png),
            "ppm" | "pgm" | "pnm" => Ok(Self::Ppm),
            other => Err(ImageError::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn read_image(bytes: &[u8], format: ImageFormat) -> Result<Image, ImageError> {
    match format {
        ImageFormat::Png => read_png(bytes),
        ImageFormat::Ppm => read_pnm(bytes),
    }
}

pub fn write_image(img: &Image, format: ImageFormat) -> Result<Vec<u8>, ImageError> {
    match format {
        ImageFormat::Png => write_png(img),
        ImageFormat::Ppm => Ok(write_pnm(img)),
    }
}

fn format_for(path: &Path) -> Result<ImageFormat, ImageError> {
    ImageFormat::from_path(path)
        .ok_or_else(|| ImageError::UnsupportedFormat(path.display().to_string()))
}

/// Reads a PNG or PPM file, choosing the codec by extension.
pub fn read_image_file(path: &Path) -> Result<Image, ImageError> {
    let format = format_for(path)?;
    read_image(&std::fs::read(path)?, format)
}

pub fn write_image_file(path: &Path, img: &Image, format: Option<ImageFormat>) -> Result<(), ImageError> {
    let format = match format {
        Some(f) => f,
        None => format_for(path)?,
    };
    std::fs::write(path, write_image(img, format)?)?;
    Ok(())
}

fn write_pnm(img: &Image) -> Vec<u8> {
    let magic = if img.channels() == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

fn read_pnm(bytes: &[u8]) -> Result<Image, ImageError> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    let channels = match magic.as_str() {
        "P6" => 3,
        "P5" => 1,
        other => {
            return Err(ImageError::MalformedHeader(format!(
                "unsupported netpbm magic {other:?}"
            )))
        }
    };
    let width = parse_field(bytes, &mut pos, "width")?;
    let height = parse_field(bytes, &mut pos, "height")?;
    let maxval = parse_field(bytes, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(ImageError::UnsupportedBitDepth(format!("maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(ImageError::MalformedHeader("missing raster separator".into())),
    }
    let expected = width * height * channels;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(ImageError::LengthMismatch {
            expected,
            actual: raster.len(),
        });
    }
    Image::new(width, height, channels, raster[..expected].to_vec())
}

fn next_token(bytes: &[u8], pos: &mut usize) -> Result<String, ImageError> {
    loop {
        match bytes.get(*pos) {
            Some(b'#') => {
                while !matches!(bytes.get(*pos), None | Some(b'\n')) {
                    *pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
            None => return Err(ImageError::MalformedHeader("unexpected end of header".into())),
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if !b.is_ascii_whitespace() && *b != b'#') {
        *pos += 1;
    }
    Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
}

fn parse_field(bytes: &[u8], pos: &mut usize, name: &str) -> Result<usize, ImageError> {
    let token = next_token(bytes, pos)?;
    token
        .parse()
        .map_err(|_| ImageError::MalformedHeader(format!("bad {name} {token:?}")))
}

fn write_png(img: &Image) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        encoder.set_color(if img.channels() == 3 {
            png::ColorType::Rgb
        } else {
            png::ColorType::Grayscale
        });
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| ImageError::Png(e.to_string()))?;
        writer
            .write_image_data(img.data())
            .map_err(|e| ImageError::Png(e.to_string()))?;
        writer.finish().map_err(|e| ImageError::Png(e.to_string()))?;
    }
    Ok(out)
}

fn read_png(bytes: &[u8]) -> Result<Image, ImageError> {
    read_png_from(Cursor::new(bytes))
}

fn read_png_from<R: BufRead + Seek>(reader: R) -> Result<Image, ImageError> {
    let mut decoder = png::Decoder::new(reader);
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| ImageError::MalformedHeader(e.to_string()))?;
    let info = reader.info();
    if info.interlaced {
        return Err(ImageError::UnsupportedFormat("interlaced png".into()));
    }
    if info.bit_depth != png::BitDepth::Eight {
        return Err(ImageError::UnsupportedBitDepth(format!("{:?}", info.bit_depth)));
    }
    let channels = match info.color_type {
        png::ColorType::Rgb => 3,
        png::ColorType::Grayscale => 1,
        other => return Err(ImageError::UnsupportedFormat(format!("png colour type {other:?}"))),
    };
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImageError::MalformedHeader("png too large".into()))?;
    let mut buf = vec![0; size];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| ImageError::Png(e.to_string()))?;
    let (w, h) = (frame.width as usize, frame.height as usize);
    let row = w * channels;
    // rows may be padded to line_size
    let mut data = Vec::with_capacity(row * h);
    for line in buf.chunks(frame.line_size).take(h) {
        data.extend_from_slice(&line[..row]);
    }
    Image::new(w, h, channels, data)
}
