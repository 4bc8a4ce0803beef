use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::IntensityConfig;
use crate::error::{Error, Result};
use crate::field::{EmbeddingMode, FieldConfig};
use crate::image_ops::ManipulationKind;
use crate::render::QuadratureConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    Baseline,
    #[serde(alias = "SIA")]
    Sia,
    #[serde(alias = "DIA")]
    Dia,
}

impl TrainMode {
    pub fn name(self) -> &'static str {
        match self {
            TrainMode::Baseline => "baseline",
            TrainMode::Sia => "sia",
            TrainMode::Dia => "dia",
        }
    }

    /// Appearance-vector layout the color network needs for this mode.
    pub fn embedding_mode(self) -> EmbeddingMode {
        match self {
            TrainMode::Dia => EmbeddingMode::Dia,
            _ => EmbeddingMode::Sia,
        }
    }
}

impl std::fmt::Display for TrainMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(TrainMode::Baseline),
            "sia" => Ok(TrainMode::Sia),
            "dia" => Ok(TrainMode::Dia),
            _ => Err(Error::invalid(format!("unknown training mode '{s}' (expected baseline, sia or dia)"))),
        }
    }
}

/// Everything a training run depends on. Field names double as config-file keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub iterations: usize,
    pub batch_rays: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub quadrature: QuadratureConfig,
    pub intensities: IntensityConfig,
    pub field: FieldConfig,
    /// Iterations between log lines; the last iteration is always logged.
    pub log_interval: usize,
    /// Iterations between validation renders; 0 validates only at the end.
    pub val_interval: usize,
    /// Iterations between checkpoints; 0 disables them.
    pub checkpoint_interval: usize,
    /// Replicas the SIA sampler draws from.
    pub sia_kinds: Vec<ManipulationKind>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl TrainConfig {
    /// Small run for 64x64 scenes on a single CPU.
    pub fn desk() -> Self {
        Self {
            mode: TrainMode::Baseline,
            iterations: 2000,
            batch_rays: 256,
            learning_rate: 5e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            quadrature: QuadratureConfig {
                samples_per_ray: 20,
                stratified: true,
                background: [1.0; 3],
            },
            intensities: IntensityConfig::default(),
            field: FieldConfig {
                pe_levels_position: 6,
                pe_levels_direction: 2,
                mlp1_widths: vec![32, 32],
                latent_dim: 16,
                mlp2_widths: vec![64],
                embed_dim: 8,
                mode: EmbeddingMode::Sia,
            },
            log_interval: 100,
            val_interval: 500,
            checkpoint_interval: 0,
            sia_kinds: ManipulationKind::ALL.to_vec(),
        }
    }

    /// Full-scale NeRF-style schedule.
    pub fn nerf() -> Self {
        Self {
            iterations: 200_000,
            learning_rate: 5e-4,
            quadrature: QuadratureConfig {
                samples_per_ray: 128,
                ..QuadratureConfig::default()
            },
            field: FieldConfig {
                pe_levels_position: 10,
                pe_levels_direction: 4,
                mlp1_widths: vec![256; 8],
                latent_dim: 256,
                mlp2_widths: vec![128],
                embed_dim: 8,
                mode: EmbeddingMode::Sia,
            },
            log_interval: 1000,
            val_interval: 10_000,
            checkpoint_interval: 10_000,
            ..Self::desk()
        }
    }

    /// Instant-NGP-style schedule (learning rate and length only).
    pub fn ngp() -> Self {
        Self {
            iterations: 20_000,
            learning_rate: 1e-2,
            ..Self::nerf()
        }
    }

    /// NeuS-style schedule (learning rate and length only).
    pub fn neus() -> Self {
        Self {
            iterations: 50_000,
            learning_rate: 1e-2,
            ..Self::nerf()
        }
    }

    pub fn presets() -> BTreeMap<&'static str, TrainConfig> {
        [
            ("desk", Self::desk()),
            ("nerf", Self::nerf()),
            ("ngp", Self::ngp()),
            ("neus", Self::neus()),
        ]
        .into_iter()
        .collect()
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::presets()
            .remove(name)
            .ok_or_else(|| Error::invalid(format!("unknown preset '{name}' (expected desk, nerf, ngp or neus)")))
    }

    /// Sets the training mode and the matching embedding layout.
    pub fn with_mode(mut self, mode: TrainMode) -> Self {
        self.mode = mode;
        self.field.mode = mode.embedding_mode();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.batch_rays == 0 {
            return Err(Error::invalid("iterations and batch_rays must be positive"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!("learning_rate {} must be positive", self.learning_rate)));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::invalid("Adam betas must lie in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid("Adam epsilon must be positive"));
        }
        if self.log_interval == 0 {
            return Err(Error::invalid("log_interval must be positive"));
        }
        if self.mode == TrainMode::Sia && self.sia_kinds.is_empty() {
            return Err(Error::invalid("sia_kinds must name at least one replica"));
        }
        if self.field.mode != self.mode.embedding_mode() {
            return Err(Error::invalid(format!(
                "mode {} needs field.mode = {:?}",
                self.mode,
                self.mode.embedding_mode()
            )));
        }
        self.quadrature.validate()?;
        self.intensities.validate()?;
        self.field.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for (name, cfg) in TrainConfig::presets() {
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            cfg.clone().with_mode(TrainMode::Dia).validate().unwrap();
        }
        assert_eq!(TrainConfig::preset("nerf").unwrap().learning_rate, 5e-4);
        assert_eq!(TrainConfig::preset("ngp").unwrap().learning_rate, 1e-2);
        assert_eq!(TrainConfig::preset("ngp").unwrap().iterations, 20_000);
        assert!(TrainConfig::preset("nope").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = TrainConfig::desk();
        c.iterations = 0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::desk();
        c.learning_rate = -1.0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::desk();
        c.mode = TrainMode::Dia;
        assert!(c.validate().is_err());
    }

    #[test]
    fn modes_parse() {
        assert_eq!("SIA".parse::<TrainMode>().unwrap(), TrainMode::Sia);
        assert_eq!("baseline".parse::<TrainMode>().unwrap(), TrainMode::Baseline);
        assert!("x".parse::<TrainMode>().is_err());
        let c: TrainConfig = serde_json::from_str(r#"{"mode": "DIA", "iterations": 5}"#).unwrap();
        assert_eq!(c.mode, TrainMode::Dia);
        assert_eq!(c.batch_rays, TrainConfig::desk().batch_rays);
        assert!(serde_json::from_str::<TrainConfig>(r#"{"iters": 5}"#).is_err());
    }
}
