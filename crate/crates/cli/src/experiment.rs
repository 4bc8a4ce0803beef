//! Experiment files: one TOML document that drives a whole run.
//!
//! Resolution order, lowest to highest: built-in defaults, the named preset
//! (if any) for the `[train]` table, the config file, command-line flags.
//! Tables merge key by key, so a file may set a single nested value such as
//! `train.quadrature.samples_per_ray`.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use nrm_aug::dataset::IntensityConfig;
use nrm_aug::image_ops::DegradationSpec;
use nrm_aug::train::{TrainConfig, TrainMode};

pub const SPEC_FILE: &str = "spec.toml";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scene: Option<PathBuf>,
    pub val_scene: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub mode: TrainMode,
    pub preset: Option<String>,
    pub intensities: IntensityConfig,
    pub degradation: Option<DegradationSpec>,
    pub subsample_percent: Option<u32>,
    pub train: TrainConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            scene: None,
            val_scene: None,
            out: None,
            seed: 0,
            mode: TrainMode::Baseline,
            preset: None,
            intensities: IntensityConfig::default(),
            degradation: None,
            subsample_percent: None,
            train: TrainConfig::desk(),
        }
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Default)]
pub struct Overrides {
    pub scene: Option<PathBuf>,
    pub val_scene: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mode: Option<TrainMode>,
    pub preset: Option<String>,
    pub iterations: Option<usize>,
    pub batch_rays: Option<usize>,
    pub samples_per_ray: Option<usize>,
    pub degradation: Option<DegradationSpec>,
    pub subsample_percent: Option<u32>,
}

impl ExperimentSpec {
    pub fn load(config: Option<&Path>, flags: Overrides) -> Result<Self> {
        let file: toml::Table = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))?
            }
            None => toml::Table::new(),
        };
        let preset = flags
            .preset
            .clone()
            .or_else(|| file.get("preset").and_then(|v| v.as_str()).map(str::to_string));
        let mut base = ExperimentSpec::default();
        if let Some(name) = &preset {
            base.train = TrainConfig::preset(name).map_err(|e| usage(e.to_string()))?;
        }
        let mut table = toml::Table::try_from(&base).context("serializing defaults")?;
        merge(&mut table, file);
        let mut spec: ExperimentSpec = table
            .try_into()
            .map_err(|e: toml::de::Error| usage(format!("invalid experiment spec: {e}")))?;
        spec.preset = preset;
        spec.apply(flags);
        spec.resolve();
        Ok(spec)
    }

    fn apply(&mut self, f: Overrides) {
        if f.scene.is_some() {
            self.scene = f.scene;
        }
        if f.val_scene.is_some() {
            self.val_scene = f.val_scene;
        }
        if f.out.is_some() {
            self.out = f.out;
        }
        if let Some(s) = f.seed {
            self.seed = s;
        }
        if let Some(m) = f.mode {
            self.mode = m;
        }
        if let Some(n) = f.iterations {
            self.train.iterations = n;
        }
        if let Some(n) = f.batch_rays {
            self.train.batch_rays = n;
        }
        if let Some(n) = f.samples_per_ray {
            self.train.quadrature.samples_per_ray = n;
        }
        if f.degradation.is_some() {
            self.degradation = f.degradation;
        }
        if f.subsample_percent.is_some() {
            self.subsample_percent = f.subsample_percent;
        }
    }

    /// Copies the top-level mode, seed and intensities into the train config.
    fn resolve(&mut self) {
        self.train.mode = self.mode;
        self.train.seed = self.seed;
        self.train.intensities = self.intensities.clone();
        self.train.field.mode = self.mode.embedding_mode();
    }

    pub fn scene(&self) -> Result<&Path> {
        self.scene
            .as_deref()
            .ok_or_else(|| usage("no scene given (pass it as an argument or set `scene` in the config)"))
    }

    pub fn out(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| usage("no output directory given (use --out or set `out` in the config)"))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing experiment spec")
    }

    /// Writes the resolved spec into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(SPEC_FILE);
        std::fs::write(&path, self.to_toml()?).with_context(|| format!("writing {}", path.display()))
    }
}

/// An error caused by how the tool was invoked.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}
