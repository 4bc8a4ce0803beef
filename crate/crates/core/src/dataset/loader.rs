//! Blender-style scene layout: a `transforms.json` listing `camera_angle_x`
//! and per-frame `{file_path, transform_matrix}` next to the images.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_ops::ManipulationKind;
use crate::io::{load_png, save_png};

use super::{Augmentation, CameraPose, PosedDataset, PosedImage};

/// Ray bounds used when a manifest does not specify `near`/`far`.
pub const DEFAULT_BOUNDS: (f64, f64) = (2.0, 6.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneFrame {
    pub file_path: String,
    /// Camera-to-world, row-major.
    pub transform_matrix: [[f64; 4]; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manipulation: Option<ManipulationKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneManifest {
    pub camera_angle_x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub far: Option<f64>,
    pub frames: Vec<SceneFrame>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadOptions {
    /// Color that transparent pixels are composited onto.
    pub background: [f64; 3],
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { background: [1.0; 3] }
    }
}

fn manifest_path(path: &Path) -> Result<PathBuf> {
    if path.is_file() {
        return Ok(path.to_path_buf());
    }
    if !path.exists() {
        return Err(Error::load(path, "no such file or directory"));
    }
    for name in ["transforms.json", "transforms_train.json"] {
        let candidate = path.join(name);
        if candidate.is_file() {
            return Ok(candidate);
        }
    }
    Err(Error::load(path, "directory has no transforms.json"))
}

fn resolve_image(base: &Path, file_path: &str) -> PathBuf {
    let p = base.join(file_path);
    if p.extension().is_none() && !p.exists() {
        p.with_extension("png")
    } else {
        p
    }
}

/// Frame name: its file path relative to the manifest directory, without
/// extension or leading `./`.
fn frame_name(file_path: &str) -> String {
    let trimmed = file_path.trim_start_matches("./");
    let p = Path::new(trimmed);
    match p.extension() {
        Some(_) => p.with_extension("").to_string_lossy().into_owned(),
        None => trimmed.to_string(),
    }
}

/// Loads a scene from a `transforms.json` file or a directory holding one.
pub fn load_dataset(path: &Path, options: &LoadOptions) -> Result<PosedDataset> {
    let manifest_file = manifest_path(path)?;
    let text = std::fs::read_to_string(&manifest_file).map_err(|e| Error::io(&manifest_file, e))?;
    let manifest: SceneManifest = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: manifest_file.clone(),
        source,
    })?;
    if manifest.frames.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let base = manifest_file.parent().unwrap_or(Path::new("."));
    let records = manifest
        .frames
        .par_iter()
        .map(|frame| -> Result<PosedImage> {
            let image_path = resolve_image(base, &frame.file_path);
            let pose = CameraPose::new(frame.transform_matrix, manifest.camera_angle_x)
                .map_err(|e| Error::load(&manifest_file, format!("frame '{}': {e}", frame.file_path)))?;
            let image = load_png(&image_path, options.background)?;
            let augmentation = match (frame.manipulation, frame.intensity) {
                (None, None) => Augmentation::IDENTITY,
                (kind, p) => Augmentation {
                    kind: kind.unwrap_or(ManipulationKind::Identity),
                    p: p.unwrap_or(0.0),
                },
            };
            Ok(PosedImage {
                name: frame_name(&frame.file_path),
                image,
                pose,
                augmentation,
                source: Some(image_path),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bounds = (
        manifest.near.unwrap_or(DEFAULT_BOUNDS.0),
        manifest.far.unwrap_or(DEFAULT_BOUNDS.1),
    );
    PosedDataset::new(records, bounds).map_err(|e| Error::load(&manifest_file, e.to_string()))
}

/// Writes every record as `<dir>/<name>.png` plus `<dir>/transforms.json`.
/// Augmentation tags are written per frame when not identity.
pub fn save_dataset(dataset: &PosedDataset, dir: &Path) -> Result<SceneManifest> {
    dataset.require_nonempty()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let fov_x = dataset.records()[0].pose.fov_x;
    if dataset.records().iter().any(|r| r.pose.fov_x != fov_x) {
        return Err(Error::invalid("scene manifest supports a single camera_angle_x"));
    }
    dataset
        .records()
        .par_iter()
        .map(|r| save_png(&dir.join(format!("{}.png", r.name)), &r.image))
        .collect::<Result<Vec<_>>>()?;
    let frames = dataset
        .records()
        .iter()
        .map(|r| {
            let tagged = r.augmentation != Augmentation::IDENTITY;
            SceneFrame {
                file_path: format!("./{}.png", r.name),
                transform_matrix: r.pose.transform,
                manipulation: tagged.then_some(r.augmentation.kind),
                intensity: tagged.then_some(r.augmentation.p),
            }
        })
        .collect();
    let manifest = SceneManifest {
        camera_angle_x: fov_x,
        near: Some(dataset.bounds().0),
        far: Some(dataset.bounds().1),
        frames,
    };
    write_json(&dir.join("transforms.json"), &manifest)?;
    Ok(manifest)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
