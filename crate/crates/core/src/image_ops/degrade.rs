//! Single-parameter image degradation models. Each result is clipped to
//! `[0, 1]` once, after the full degradation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::convolve::{convolve_raw, horizontal_blur_for_length};
use super::image::clip_in_place;
use super::noise::{poisson, CounterRng};
use super::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegradationKind {
    Gaussian,
    MotionBlur,
    Poisson,
    SaltPepper,
    Speckle,
}

impl DegradationKind {
    pub const ALL: [DegradationKind; 5] = [
        DegradationKind::Gaussian,
        DegradationKind::MotionBlur,
        DegradationKind::Poisson,
        DegradationKind::SaltPepper,
        DegradationKind::Speckle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DegradationKind::Gaussian => "gaussian",
            DegradationKind::MotionBlur => "motion_blur",
            DegradationKind::Poisson => "poisson",
            DegradationKind::SaltPepper => "salt_pepper",
            DegradationKind::Speckle => "speckle",
        }
    }
}

impl fmt::Display for DegradationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DegradationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::invalid(format!(
                "unknown degradation '{s}', expected one of gaussian, motion_blur, poisson, salt_pepper, speckle"
            ))
        })
    }
}

/// A degradation with its single intensity `q`:
/// standard deviation for gaussian and speckle, line length for motion blur,
/// scale for poisson, and per-extreme flip probability for salt-and-pepper.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradationSpec {
    pub kind: DegradationKind,
    pub q: f64,
    #[serde(default)]
    pub seed: u64,
}

impl DegradationSpec {
    pub fn new(kind: DegradationKind, q: f64, seed: u64) -> Result<Self> {
        let spec = Self { kind, q, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q;
        if !q.is_finite() || q < 0.0 {
            return Err(Error::invalid(format!("{} intensity {q} must be finite and nonnegative", self.kind)));
        }
        match self.kind {
            // q = 0 is the noise-free limit for the additive and impulse models
            DegradationKind::Gaussian | DegradationKind::Speckle => Ok(()),
            DegradationKind::SaltPepper if q > 0.5 => Err(Error::invalid(format!(
                "salt_pepper probability {q} exceeds 0.5"
            ))),
            DegradationKind::SaltPepper => Ok(()),
            DegradationKind::Poisson if q == 0.0 => Err(Error::invalid("poisson scale must be positive")),
            DegradationKind::Poisson => Ok(()),
            DegradationKind::MotionBlur => horizontal_blur_for_length(q).map(|_| ()),
        }
    }
}

/// Degrades `image` as if it were image 0 of a dataset.
pub fn degrade(image: &Image, spec: &DegradationSpec) -> Result<Image> {
    degrade_indexed(image, spec, 0)
}

/// Degrades one image of a dataset; `image_index` keys the random stream so
/// every image gets independent noise under a single spec seed.
pub fn degrade_indexed(image: &Image, spec: &DegradationSpec, image_index: u64) -> Result<Image> {
    spec.validate()?;
    image.validate()?;
    let rng = CounterRng::new(spec.seed, image_index);
    let src = image.data();
    let q = spec.q;
    let mut out: Vec<f64> = match spec.kind {
        DegradationKind::Gaussian | DegradationKind::Speckle | DegradationKind::SaltPepper if q == 0.0 => {
            return Ok(image.clone());
        }
        DegradationKind::Gaussian => src
            .iter()
            .enumerate()
            .map(|(i, x)| x + q * rng.normal(i as u64, 0))
            .collect(),
        DegradationKind::Speckle => src
            .iter()
            .enumerate()
            .map(|(i, x)| x + x * q * rng.normal(i as u64, 0))
            .collect(),
        DegradationKind::Poisson => src
            .iter()
            .enumerate()
            .map(|(i, x)| poisson(q * x, &rng, i as u64) / q)
            .collect(),
        DegradationKind::SaltPepper => src
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let u = rng.uniform(i as u64, 0);
                if u < q {
                    1.0
                } else if u < 2.0 * q {
                    0.0
                } else {
                    x
                }
            })
            .collect(),
        DegradationKind::MotionBlur => convolve_raw(image, &horizontal_blur_for_length(q)?),
    };
    clip_in_place(&mut out);
    Ok(image.with_data(out))
}
