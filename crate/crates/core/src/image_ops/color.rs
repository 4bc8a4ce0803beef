//! Color-space helpers: hexcone HSV with hue measured in turns, and luma.

use crate::error::{Error, Result};

use super::Image;

pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Converts an RGB triple in `[0, 1]` to `(h, s, v)` with `h` in `[0, 1)` turns.
/// Achromatic pixels get hue 0.
pub fn rgb_to_hsv(rgb: [f64; 3]) -> Result<[f64; 3]> {
    if rgb.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(Error::invalid(format!("rgb {rgb:?} outside [0, 1]")));
    }
    Ok(rgb_to_hsv_unchecked(rgb))
}

/// Converts `(h, s, v)` back to RGB. `h` must lie in `[0, 1)`, `s` and `v` in `[0, 1]`.
pub fn hsv_to_rgb(hsv: [f64; 3]) -> Result<[f64; 3]> {
    let [h, s, v] = hsv;
    if !(0.0..1.0).contains(&h) || !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid(format!("hsv {hsv:?} outside valid ranges")));
    }
    Ok(hsv_to_rgb_unchecked(hsv))
}

pub(crate) fn rgb_to_hsv_unchecked([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let chroma = max - min;
    let v = max;
    let s = if max > 0.0 { chroma / max } else { 0.0 };
    if chroma == 0.0 {
        return [0.0, s, v];
    }
    let sector = if max == r {
        ((g - b) / chroma).rem_euclid(6.0)
    } else if max == g {
        (b - r) / chroma + 2.0
    } else {
        (r - g) / chroma + 4.0
    };
    let h = (sector / 6.0).rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    [if h >= 1.0 { 0.0 } else { h }, s, v]
}

pub(crate) fn hsv_to_rgb_unchecked([h, s, v]: [f64; 3]) -> [f64; 3] {
    let chroma = v * s;
    let sector = h * 6.0;
    let x = chroma * (1.0 - ((sector % 2.0) - 1.0).abs());
    let m = v - chroma;
    let (r, g, b) = match sector as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    [r + m, g + m, b + m]
}

pub fn luma(rgb: [f64; 3]) -> f64 {
    LUMA_WEIGHTS[0] * rgb[0] + LUMA_WEIGHTS[1] * rgb[1] + LUMA_WEIGHTS[2] * rgb[2]
}

/// Per-pixel luma, `height * width` values.
pub fn grayscale(image: &Image) -> Vec<f64> {
    image
        .data()
        .chunks_exact(3)
        .map(|px| luma([px[0], px[1], px[2]]))
        .collect()
}
