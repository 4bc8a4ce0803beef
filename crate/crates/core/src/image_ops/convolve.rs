use crate::error::{Error, Result};

use super::image::clip_in_place;
use super::Image;

/// Odd-sized square convolution kernel, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size == 0 || size.is_multiple_of(2) {
            return Err(Error::invalid(format!("kernel size {size} must be odd and positive")));
        }
        if weights.len() != size * size {
            return Err(Error::invalid(format!(
                "kernel of size {size} needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        Ok(Self { size, weights })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.weights[row * self.size + col]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Normalized `size x size` box filter.
pub fn box_kernel(size: usize) -> Result<Kernel> {
    let n = size * size;
    Kernel::new(size, vec![1.0 / n as f64; n])
}

/// Normalized line kernel of odd size `k` through the center at angle `phi`
/// (radians, counter-clockwise from the +x image axis). `phi = 0` is horizontal.
pub fn motion_blur_kernel(k: usize, phi: f64) -> Result<Kernel> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::invalid(format!("motion blur kernel size {k} must be odd and positive")));
    }
    if !phi.is_finite() {
        return Err(Error::invalid("motion blur angle must be finite"));
    }
    let r = (k / 2) as isize;
    let mut weights = vec![0.0; k * k];
    let (sin, cos) = phi.sin_cos();
    for step in -r..=r {
        let col = (step as f64 * cos).round() as isize + r;
        // image rows grow downward
        let row = (-(step as f64) * sin).round() as isize + r;
        weights[row as usize * k + col as usize] = 1.0;
    }
    let count = weights.iter().filter(|w| **w > 0.0).count() as f64;
    for w in &mut weights {
        *w /= count;
    }
    Kernel::new(k, weights)
}

/// Horizontal motion-blur kernel for a line length that may be a half-integer.
///
/// Odd integer lengths give the plain line kernel. A half-integer length
/// `n + 0.5` (n even) is realized as the length-`n` line averaged over its two
/// possible centerings, which is symmetric and spans `n + 1` taps:
/// `2.5` becomes the 3x3 kernel with center row `(0.25, 0.5, 0.25)`.
pub fn horizontal_blur_for_length(length: f64) -> Result<Kernel> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::invalid(format!("motion blur length {length} must be positive")));
    }
    if length.fract() == 0.0 {
        let k = length as usize;
        if k.is_multiple_of(2) {
            return Err(Error::invalid(format!("motion blur kernel size {k} must be odd")));
        }
        return motion_blur_kernel(k, 0.0);
    }
    let base = length.floor();
    if length - base != 0.5 || !(base as usize).is_multiple_of(2) || base < 2.0 {
        return Err(Error::invalid(format!(
            "motion blur length {length} must be an odd integer or an even integer plus one half"
        )));
    }
    let n = base as usize;
    let k = n + 1;
    let mut weights = vec![0.0; k * k];
    let center = k / 2;
    for col in 0..k {
        let w = if col == 0 || col == k - 1 { 0.5 } else { 1.0 };
        weights[center * k + col] = w / n as f64;
    }
    Kernel::new(k, weights)
}

/// Per-channel 2D convolution with edge-replicate padding; output is clipped.
pub fn convolve2d(image: &Image, kernel: &Kernel) -> Image {
    let mut out = convolve_raw(image, kernel);
    clip_in_place(&mut out);
    image.with_data(out)
}

/// Unclipped convolution result.
pub(crate) fn convolve_raw(image: &Image, kernel: &Kernel) -> Vec<f64> {
    let (h, w) = (image.height() as isize, image.width() as isize);
    let k = kernel.size() as isize;
    let r = k / 2;
    let src = image.data();
    let mut out = vec![0.0; src.len()];
    for row in 0..h {
        for col in 0..w {
            let mut acc = [0.0; 3];
            for kr in 0..k {
                // true convolution: flip the kernel
                let sr = (row + r - kr).clamp(0, h - 1);
                for kc in 0..k {
                    let weight = kernel.get(kr as usize, kc as usize);
                    if weight == 0.0 {
                        continue;
                    }
                    let sc = (col + r - kc).clamp(0, w - 1);
                    let i = ((sr * w + sc) * 3) as usize;
                    acc[0] += weight * src[i];
                    acc[1] += weight * src[i + 1];
                    acc[2] += weight * src[i + 2];
                }
            }
            let o = ((row * w + col) * 3) as usize;
            out[o..o + 3].copy_from_slice(&acc);
        }
    }
    out
}
