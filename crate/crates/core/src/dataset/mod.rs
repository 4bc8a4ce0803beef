//! Posed-image datasets and the augmentation/robustness protocols built on them.

mod dia;
mod loader;
mod protocols;
mod sia;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_ops::{Image, ManipulationKind};
pub use crate::render::CameraPose;

pub use dia::{sample_dia, sample_manipulation, DiaDraw};
pub use loader::{load_dataset, save_dataset, LoadOptions, SceneFrame, SceneManifest, DEFAULT_BOUNDS};
pub use protocols::{degrade_dataset, subsample, subsample_count};
pub use sia::{build_sia, materialize_sia, SiaEntry, SiaManifest, SIA_MANIFEST_FILE};

/// The manipulation that produced a record's image.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Augmentation {
    pub kind: ManipulationKind,
    pub p: f64,
}

impl Augmentation {
    pub const IDENTITY: Augmentation = Augmentation {
        kind: ManipulationKind::Identity,
        p: 0.0,
    };
}

impl Default for Augmentation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosedImage {
    /// File stem used when the record is written out, e.g. `r_0`.
    pub name: String,
    pub image: Image,
    pub pose: CameraPose,
    pub augmentation: Augmentation,
    /// Where the image was read from, when it came from disk.
    pub source: Option<PathBuf>,
}

/// A list of posed images sharing one resolution, with near/far bounds for
/// the rays cast through them.
#[derive(Clone, Debug, PartialEq)]
pub struct PosedDataset {
    records: Vec<PosedImage>,
    bounds: (f64, f64),
}

impl PosedDataset {
    pub fn new(records: Vec<PosedImage>, bounds: (f64, f64)) -> Result<Self> {
        if let Some(first) = records.first() {
            for r in &records {
                if !r.image.same_dims(&first.image) {
                    return Err(Error::invalid(format!(
                        "record '{}' is {}x{}, expected {}x{}",
                        r.name,
                        r.image.height(),
                        r.image.width(),
                        first.image.height(),
                        first.image.width()
                    )));
                }
                r.pose.validate()?;
            }
        }
        if !(bounds.0 >= 0.0 && bounds.0 < bounds.1 && bounds.1.is_finite()) {
            return Err(Error::invalid(format!("invalid ray bounds {bounds:?}")));
        }
        Ok(Self { records, bounds })
    }

    pub fn records(&self) -> &[PosedImage] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    /// `(height, width)` shared by all images, or `None` when empty.
    pub fn dims(&self) -> Option<(usize, usize)> {
        self.records.first().map(|r| (r.image.height(), r.image.width()))
    }

    pub fn manifest(&self) -> impl Iterator<Item = Augmentation> + '_ {
        self.records.iter().map(|r| r.augmentation)
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.records.is_empty() {
            Err(Error::EmptyDataset)
        } else {
            Ok(())
        }
    }

    pub(crate) fn with_records(&self, records: Vec<PosedImage>) -> Self {
        Self {
            records,
            bounds: self.bounds,
        }
    }
}

/// Fixed SIA intensities and DIA widths per manipulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityConfig {
    pub sia_intensities: BTreeMap<ManipulationKind, f64>,
    pub dia_widths: BTreeMap<ManipulationKind, f64>,
}

impl Default for IntensityConfig {
    fn default() -> Self {
        let sia: BTreeMap<_, _> = [
            (ManipulationKind::Identity, 0.0),
            (ManipulationKind::Contrast, 0.5),
            (ManipulationKind::Hue, 0.08),
            (ManipulationKind::Saturation, 0.5),
            (ManipulationKind::Sharpness, 0.5),
            (ManipulationKind::Brightness, 0.2),
        ]
        .into_iter()
        .collect();
        let dia = sia.iter().map(|(k, p)| (*k, 2.0 * p)).collect();
        Self {
            sia_intensities: sia,
            dia_widths: dia,
        }
    }
}

impl IntensityConfig {
    /// Every intensity set to `p` and every width to `w` (identity stays 0).
    pub fn uniform(p: f64, w: f64) -> Self {
        let pick = |v: f64| {
            ManipulationKind::ALL
                .into_iter()
                .map(|k| (k, if k == ManipulationKind::Identity { 0.0 } else { v }))
                .collect()
        };
        Self {
            sia_intensities: pick(p),
            dia_widths: pick(w),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for kind in ManipulationKind::NON_IDENTITY {
            let p = self.sia_intensity(kind)?;
            if !p.is_finite() {
                return Err(Error::invalid(format!("SIA intensity for {kind} is not finite")));
            }
            let w = self.dia_width(kind)?;
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::invalid(format!("DIA width for {kind} must be nonnegative")));
            }
        }
        for (name, map) in [("SIA intensity", &self.sia_intensities), ("DIA width", &self.dia_widths)] {
            if let Some(v) = map.get(&ManipulationKind::Identity) {
                if *v != 0.0 {
                    return Err(Error::invalid(format!("{name} for identity must be 0, got {v}")));
                }
            }
        }
        Ok(())
    }

    pub fn sia_intensity(&self, kind: ManipulationKind) -> Result<f64> {
        if kind == ManipulationKind::Identity {
            return Ok(0.0);
        }
        self.sia_intensities
            .get(&kind)
            .copied()
            .ok_or_else(|| Error::invalid(format!("no SIA intensity configured for {kind}")))
    }

    pub fn dia_width(&self, kind: ManipulationKind) -> Result<f64> {
        if kind == ManipulationKind::Identity {
            return Ok(0.0);
        }
        self.dia_widths
            .get(&kind)
            .copied()
            .ok_or_else(|| Error::invalid(format!("no DIA width configured for {kind}")))
    }
}
