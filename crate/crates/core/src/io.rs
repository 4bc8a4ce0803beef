//! 8-bit PNG conversion. Loading divides by 255; saving rounds half-to-even
//! and clamps to `[0, 255]`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image_ops::Image;

pub fn to_u8(v: f64) -> u8 {
    (v * 255.0).round_ties_even().clamp(0.0, 255.0) as u8
}

pub fn from_u8(v: u8) -> f64 {
    v as f64 / 255.0
}

/// Round-trips an image through 8-bit quantization.
pub fn quantize(image: &Image) -> Image {
    let data = image.data().iter().map(|v| from_u8(to_u8(*v))).collect();
    Image::from_raw(image.height(), image.width(), data)
}

/// Reads a PNG; an alpha channel is composited onto `background`.
pub fn load_png(path: &Path, background: [f64; 3]) -> Result<Image> {
    let decoded = image::open(path).map_err(|source| match source {
        image::ImageError::IoError(e) => Error::io(path, e),
        source => Error::Codec {
            path: path.to_path_buf(),
            source,
        },
    })?;
    let rgba = decoded.to_rgba8();
    let (width, height) = rgba.dimensions();
    let mut data = Vec::with_capacity(width as usize * height as usize * 3);
    for px in rgba.pixels() {
        let alpha = from_u8(px[3]);
        for c in 0..3 {
            let v = from_u8(px[c]);
            data.push(if px[3] == 255 {
                v
            } else {
                v * alpha + background[c] * (1.0 - alpha)
            });
        }
    }
    Image::from_unclipped(height as usize, width as usize, data)
}

pub fn save_png(path: &Path, image: &Image) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let bytes: Vec<u8> = image.data().iter().map(|v| to_u8(*v)).collect();
    let buffer = image::RgbImage::from_raw(image.width() as u32, image.height() as u32, bytes)
        .ok_or_else(|| Error::invalid("image buffer does not match its dimensions"))?;
    buffer.save(path).map_err(|source| Error::Codec {
        path: path.to_path_buf(),
        source,
    })
}
