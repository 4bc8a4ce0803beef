//! The five parameterized color manipulations. Each one is the identity at `p = 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::color::{grayscale, hsv_to_rgb_unchecked, rgb_to_hsv_unchecked};
use super::convolve::{box_kernel, convolve_raw};
use super::image::clip_in_place;
use super::Image;

/// A color manipulation. The discriminant is the row of the appearance
/// embedding table, so `Identity` is row 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManipulationKind {
    Identity = 0,
    Contrast = 1,
    Hue = 2,
    Saturation = 3,
    Sharpness = 4,
    Brightness = 5,
}

impl ManipulationKind {
    /// Number of kinds including identity.
    pub const COUNT: usize = 6;

    pub const ALL: [ManipulationKind; 6] = [
        ManipulationKind::Identity,
        ManipulationKind::Contrast,
        ManipulationKind::Hue,
        ManipulationKind::Saturation,
        ManipulationKind::Sharpness,
        ManipulationKind::Brightness,
    ];

    pub const NON_IDENTITY: [ManipulationKind; 5] = [
        ManipulationKind::Contrast,
        ManipulationKind::Hue,
        ManipulationKind::Saturation,
        ManipulationKind::Sharpness,
        ManipulationKind::Brightness,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ManipulationKind::Identity => "identity",
            ManipulationKind::Contrast => "contrast",
            ManipulationKind::Hue => "hue",
            ManipulationKind::Saturation => "saturation",
            ManipulationKind::Sharpness => "sharpness",
            ManipulationKind::Brightness => "brightness",
        }
    }
}

impl fmt::Display for ManipulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManipulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown manipulation '{s}', expected one of identity, contrast, hue, saturation, sharpness, brightness"
                ))
            })
    }
}

/// Applies manipulation `kind` with intensity `p`.
///
/// All forms use the enhancement factor `1 + p`:
/// brightness scales, contrast pushes away from the image's mean luma,
/// saturation pushes away from per-pixel luma, sharpness adds `p` times the
/// detail left over by a 3x3 box blur, and hue rotates by `p` turns.
pub fn apply_manipulation(image: &Image, kind: ManipulationKind, p: f64) -> Result<Image> {
    if !p.is_finite() {
        return Err(Error::invalid(format!("manipulation intensity {p} is not finite")));
    }
    image.validate()?;
    if kind == ManipulationKind::Identity || p == 0.0 {
        return Ok(image.clone());
    }
    let src = image.data();
    let factor = 1.0 + p;
    let mut out = match kind {
        ManipulationKind::Identity => unreachable!(),
        ManipulationKind::Brightness => src.iter().map(|v| v * factor).collect::<Vec<_>>(),
        ManipulationKind::Contrast => {
            let gray = grayscale(image);
            let mean = if gray.is_empty() {
                0.0
            } else {
                gray.iter().sum::<f64>() / gray.len() as f64
            };
            src.iter().map(|v| mean + factor * (v - mean)).collect()
        }
        ManipulationKind::Saturation => {
            let gray = grayscale(image);
            src.chunks_exact(3)
                .zip(&gray)
                .flat_map(|(px, g)| [0, 1, 2].map(|c| g + factor * (px[c] - g)))
                .collect()
        }
        ManipulationKind::Sharpness => {
            let blurred = convolve_raw(image, &box_kernel(3)?);
            src.iter()
                .zip(&blurred)
                .map(|(v, b)| v + p * (v - b))
                .collect()
        }
        ManipulationKind::Hue => src
            .chunks_exact(3)
            .flat_map(|px| {
                let [h, s, v] = rgb_to_hsv_unchecked([px[0], px[1], px[2]]);
                let mut h = (h + p).rem_euclid(1.0);
                if h >= 1.0 {
                    h = 0.0;
                }
                hsv_to_rgb_unchecked([h, s, v])
            })
            .collect(),
    };
    clip_in_place(&mut out);
    Ok(image.with_data(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(seed: u64, h: usize, w: usize) -> Image {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Image::from_fn(h, w, |_, _| [rng.random(), rng.random(), rng.random()])
    }

    #[test]
    fn zero_intensity_is_exact_identity() {
        for seed in 0..10 {
            let img = random_image(seed, 7, 5);
            for kind in ManipulationKind::ALL {
                assert_eq!(apply_manipulation(&img, kind, 0.0).unwrap(), img);
            }
        }
    }

    #[test]
    fn identity_ignores_intensity() {
        let img = random_image(3, 4, 4);
        assert_eq!(apply_manipulation(&img, ManipulationKind::Identity, 0.7).unwrap(), img);
    }

    #[test]
    fn brightness_is_multiplicative() {
        let img = Image::new(1, 1, vec![0.2, 0.4, 0.6]).unwrap();
        let out = apply_manipulation(&img, ManipulationKind::Brightness, 0.5).unwrap();
        let expected = [0.3, 0.6, 0.9];
        for (a, b) in out.data().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn contrast_fixes_constant_image() {
        let img = Image::filled(4, 4, [0.5; 3]);
        let out = apply_manipulation(&img, ManipulationKind::Contrast, 0.5).unwrap();
        for v in out.data() {
            assert!((v - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn saturation_fixes_gray_pixels() {
        let img = Image::from_fn(3, 3, |r, c| [(r + c) as f64 / 4.0; 3]);
        let out = apply_manipulation(&img, ManipulationKind::Saturation, 0.8).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sharpness_fixes_constant_image() {
        let img = Image::filled(5, 5, [0.3, 0.6, 0.9]);
        let out = apply_manipulation(&img, ManipulationKind::Sharpness, 0.5).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn hue_half_turn_maps_red_to_cyan() {
        let img = Image::new(1, 1, vec![1.0, 0.0, 0.0]).unwrap();
        let out = apply_manipulation(&img, ManipulationKind::Hue, 0.5).unwrap();
        let expected = [0.0, 1.0, 1.0];
        for (a, b) in out.data().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hue_rotation_is_periodic() {
        for seed in 0..5 {
            let img = random_image(seed, 6, 6);
            for p in [0.08, 0.3, -0.45, 1.25] {
                let there = apply_manipulation(&img, ManipulationKind::Hue, p).unwrap();
                let back = apply_manipulation(&there, ManipulationKind::Hue, -p).unwrap();
                for (a, b) in back.data().iter().zip(img.data()) {
                    assert!((a - b).abs() <= 1e-5);
                }
            }
        }
    }

    #[test]
    fn outputs_stay_in_range() {
        let img = random_image(9, 8, 8);
        for kind in ManipulationKind::ALL {
            for p in [-1.0, -0.5, 0.5, 1.0, 3.0] {
                let out = apply_manipulation(&img, kind, p).unwrap();
                assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
            }
        }
    }

    #[test]
    fn non_finite_intensity_rejected() {
        let img = random_image(1, 2, 2);
        assert!(apply_manipulation(&img, ManipulationKind::Hue, f64::NAN).is_err());
        assert!(apply_manipulation(&img, ManipulationKind::Contrast, f64::INFINITY).is_err());
    }

    #[test]
    fn names_round_trip() {
        for kind in ManipulationKind::ALL {
            assert_eq!(kind.name().parse::<ManipulationKind>().unwrap(), kind);
            assert_eq!(ManipulationKind::from_index(kind.index()), Some(kind));
        }
        assert!("blur".parse::<ManipulationKind>().is_err());
    }
}
