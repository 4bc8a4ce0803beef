//! Static augmentation: one fixed-intensity replica of the dataset per
//! manipulation, plus the untouched identity replica.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_ops::{apply_manipulation, ManipulationKind};

use super::loader::{save_dataset, write_json};
use super::{Augmentation, IntensityConfig, PosedDataset, PosedImage};

pub const SIA_MANIFEST_FILE: &str = "sia_manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiaEntry {
    pub source: String,
    pub manipulation: ManipulationKind,
    pub intensity: f64,
}

/// Replica image path (relative to the output directory) to its provenance.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SiaManifest {
    pub replicas: BTreeMap<String, SiaEntry>,
}

impl SiaManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }

    /// Replica count per manipulation.
    pub fn counts(&self) -> BTreeMap<ManipulationKind, usize> {
        let mut out = BTreeMap::new();
        for e in self.replicas.values() {
            *out.entry(e.manipulation).or_insert(0) += 1;
        }
        out
    }
}

/// Builds D' in memory: for each manipulation (identity first), a copy of
/// every record manipulated at its fixed intensity. Records are named
/// `<kind>/<name>`; poses are copied unchanged.
pub fn build_sia(dataset: &PosedDataset, cfg: &IntensityConfig) -> Result<PosedDataset> {
    dataset.require_nonempty()?;
    cfg.validate()?;
    let mut records = Vec::with_capacity(ManipulationKind::COUNT * dataset.len());
    for kind in ManipulationKind::ALL {
        let p = cfg.sia_intensity(kind)?;
        let replica = dataset
            .records()
            .par_iter()
            .map(|r| -> Result<PosedImage> {
                Ok(PosedImage {
                    name: format!("{}/{}", kind.name(), r.name),
                    image: apply_manipulation(&r.image, kind, p)?,
                    pose: r.pose,
                    augmentation: Augmentation { kind, p },
                    source: r.source.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        records.extend(replica);
    }
    Ok(dataset.with_records(records))
}

/// Builds D' and writes it to `out`: `<kind>/<name>.png` per replica, a
/// `transforms.json` tagging each frame, and the SIA manifest.
pub fn materialize_sia(
    dataset: &PosedDataset,
    cfg: &IntensityConfig,
    out: &Path,
) -> Result<(PosedDataset, SiaManifest)> {
    let sia = build_sia(dataset, cfg)?;
    save_dataset(&sia, out)?;
    let per_source = dataset.len();
    let mut manifest = SiaManifest::default();
    for (i, r) in sia.records().iter().enumerate() {
        let original = &dataset.records()[i % per_source];
        let source = match &original.source {
            Some(p) => p.display().to_string(),
            None => original.name.clone(),
        };
        manifest.replicas.insert(
            format!("./{}.png", r.name),
            SiaEntry {
                source,
                manipulation: r.augmentation.kind,
                intensity: r.augmentation.p,
            },
        );
    }
    manifest.save(&out.join(SIA_MANIFEST_FILE))?;
    Ok((sia, manifest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{load_dataset, CameraPose, LoadOptions};
    use crate::image_ops::Image;
    use crate::io::load_png;

    fn fixture(n: usize) -> PosedDataset {
        let records = (0..n)
            .map(|i| PosedImage {
                name: format!("r_{i}"),
                image: Image::from_fn(5, 7, |r, c| {
                    [(r * 7 + c) as f64 / 40.0, (i as f64 + 1.0) / (n as f64 + 1.0), ((r + c) % 3) as f64 / 2.0]
                }),
                pose: CameraPose::identity(0.9),
                augmentation: Augmentation::IDENTITY,
                source: None,
            })
            .collect();
        PosedDataset::new(records, (1.0, 3.0)).unwrap()
    }

    #[test]
    fn six_replicas_per_record() {
        for n in [1, 4] {
            let ds = fixture(n);
            let sia = build_sia(&ds, &IntensityConfig::default()).unwrap();
            assert_eq!(sia.len(), 6 * n);
            for kind in ManipulationKind::ALL {
                assert_eq!(sia.manifest().filter(|a| a.kind == kind).count(), n);
            }
            for (i, r) in sia.records().iter().enumerate() {
                assert_eq!(r.pose, ds.records()[i % n].pose);
            }
        }
    }

    #[test]
    fn identity_replica_is_the_input() {
        let ds = fixture(1);
        let sia = build_sia(&ds, &IntensityConfig::default()).unwrap();
        assert_eq!(sia.records()[0].augmentation, Augmentation::IDENTITY);
        assert_eq!(sia.records()[0].image, ds.records()[0].image);
    }

    #[test]
    fn replicas_reproduce_from_manifest() {
        let ds = fixture(3);
        let cfg = IntensityConfig::default();
        let sia = build_sia(&ds, &cfg).unwrap();
        for (i, r) in sia.records().iter().enumerate() {
            let again = apply_manipulation(&ds.records()[i % 3].image, r.augmentation.kind, r.augmentation.p).unwrap();
            assert_eq!(again, r.image);
            assert_eq!(r.augmentation.p, cfg.sia_intensity(r.augmentation.kind).unwrap());
        }
        assert_eq!(build_sia(&ds, &cfg).unwrap(), sia);
    }

    #[test]
    fn empty_dataset_rejected() {
        let ds = PosedDataset::new(Vec::new(), (1.0, 2.0)).unwrap();
        assert!(matches!(build_sia(&ds, &IntensityConfig::default()), Err(Error::EmptyDataset)));
    }

    #[test]
    fn materialized_layout_round_trips() {
        let out = tempfile::tempdir().unwrap();
        let ds = fixture(2);
        let (_, manifest) = materialize_sia(&ds, &IntensityConfig::default(), out.path()).unwrap();
        assert_eq!(manifest.len(), 12);
        assert!(manifest.counts().values().all(|&c| c == 2));
        let back = SiaManifest::load(&out.path().join(SIA_MANIFEST_FILE)).unwrap();
        assert_eq!(back, manifest);
        let text = std::fs::read_to_string(out.path().join(SIA_MANIFEST_FILE)).unwrap();
        let reparsed: SiaManifest = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string_pretty(&reparsed).unwrap() + "\n", text);

        let loaded = load_dataset(out.path(), &LoadOptions::default()).unwrap();
        assert_eq!(loaded.len(), 12);
        for r in loaded.records() {
            let entry = &manifest.replicas[&format!("./{}.png", r.name)];
            assert_eq!(entry.manipulation, r.augmentation.kind);
            assert_eq!(entry.intensity, r.augmentation.p);
        }
        assert!(out.path().join("hue/r_1.png").is_file());
        let img = load_png(&out.path().join("identity/r_0.png"), [1.0; 3]).unwrap();
        assert_eq!(img, crate::io::quantize(&ds.records()[0].image));
    }
}
