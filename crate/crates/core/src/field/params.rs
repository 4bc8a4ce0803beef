use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image_ops::ManipulationKind;

use super::encoding::encoded_len;

/// How the appearance vector is formed from the embedding table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingMode {
    /// The table row alone; the intensity is implied by the manipulation.
    #[serde(alias = "SIA")]
    Sia,
    /// The table row with the raw intensity appended.
    #[serde(alias = "DIA")]
    Dia,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldConfig {
    pub pe_levels_position: usize,
    pub pe_levels_direction: usize,
    /// Hidden layer widths of the density network.
    pub mlp1_widths: Vec<usize>,
    pub latent_dim: usize,
    /// Hidden layer widths of the color network.
    pub mlp2_widths: Vec<usize>,
    pub embed_dim: usize,
    pub mode: EmbeddingMode,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            pe_levels_position: 6,
            pe_levels_direction: 4,
            mlp1_widths: vec![64, 64, 64],
            latent_dim: 64,
            mlp2_widths: vec![64, 64],
            embed_dim: 8,
            mode: EmbeddingMode::Sia,
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mlp1_widths.iter().chain(&self.mlp2_widths).any(|w| *w == 0) {
            return Err(Error::invalid("hidden layer widths must be positive"));
        }
        if self.pe_levels_position > 30 || self.pe_levels_direction > 30 {
            return Err(Error::invalid("positional encoding levels above 30 overflow the frequency range"));
        }
        Ok(())
    }

    pub fn position_input_dim(&self) -> usize {
        encoded_len(3, self.pe_levels_position)
    }

    pub fn direction_input_dim(&self) -> usize {
        encoded_len(3, self.pe_levels_direction)
    }

    /// Length of the appearance vector: `d` for SIA, `d + 1` for DIA.
    pub fn appearance_dim(&self) -> usize {
        match self.mode {
            EmbeddingMode::Sia => self.embed_dim,
            EmbeddingMode::Dia => self.embed_dim + 1,
        }
    }

    pub fn color_input_dim(&self) -> usize {
        self.direction_input_dim() + self.latent_dim + self.appearance_dim()
    }

    pub fn param_count(&self) -> usize {
        ParamLayout::new(self).total
    }
}

/// Offsets of one dense layer inside the flat vector. Weights are row-major
/// `[outputs][inputs]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DenseSpan {
    pub weight: usize,
    pub bias: usize,
    pub inputs: usize,
    pub outputs: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

/// Named partition of the flat parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamLayout {
    pub mlp1: Vec<DenseSpan>,
    pub mlp2: Vec<DenseSpan>,
    pub embedding: usize,
    pub embed_dim: usize,
    pub total: usize,
}

impl ParamLayout {
    pub fn new(config: &FieldConfig) -> Self {
        let mut offset = 0;
        let mut dense = |dims: Vec<usize>| -> Vec<DenseSpan> {
            dims.windows(2)
                .map(|pair| {
                    let (inputs, outputs) = (pair[0], pair[1]);
                    let weight = offset;
                    let bias = weight + inputs * outputs;
                    offset = bias + outputs;
                    DenseSpan {
                        weight,
                        bias,
                        inputs,
                        outputs,
                    }
                })
                .collect()
        };
        let mut dims1 = vec![config.position_input_dim()];
        dims1.extend(&config.mlp1_widths);
        dims1.push(1 + config.latent_dim);
        let mlp1 = dense(dims1);
        let mut dims2 = vec![config.color_input_dim()];
        dims2.extend(&config.mlp2_widths);
        dims2.push(3);
        let mlp2 = dense(dims2);
        let embedding = offset;
        let total = embedding + ManipulationKind::COUNT * config.embed_dim;
        Self {
            mlp1,
            mlp2,
            embedding,
            embed_dim: config.embed_dim,
            total,
        }
    }

    /// Every named span in offset order: `mlp1.w0`, `mlp1.b0`, ..., `mlp2.*`, `embedding`.
    pub fn spans(&self) -> Vec<Span> {
        let mut spans = Vec::new();
        for (net, layers) in [("mlp1", &self.mlp1), ("mlp2", &self.mlp2)] {
            for (i, l) in layers.iter().enumerate() {
                spans.push(Span {
                    name: format!("{net}.w{i}"),
                    offset: l.weight,
                    len: l.inputs * l.outputs,
                });
                spans.push(Span {
                    name: format!("{net}.b{i}"),
                    offset: l.bias,
                    len: l.outputs,
                });
            }
        }
        spans.push(Span {
            name: "embedding".into(),
            offset: self.embedding,
            len: ManipulationKind::COUNT * self.embed_dim,
        });
        spans
    }

    pub fn span(&self, name: &str) -> Option<Span> {
        self.spans().into_iter().find(|s| s.name == name)
    }

    pub fn embedding_row(&self, kind: ManipulationKind) -> std::ops::Range<usize> {
        let start = self.embedding + kind.index() * self.embed_dim;
        start..start + self.embed_dim
    }
}

/// All learnable state of a field: network weights and the appearance
/// embedding table, in one flat vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldParams {
    config: FieldConfig,
    layout: ParamLayout,
    flat: Vec<f64>,
}

impl FieldParams {
    pub fn from_flat(config: FieldConfig, flat: Vec<f64>) -> Result<Self> {
        config.validate()?;
        let layout = ParamLayout::new(&config);
        if flat.len() != layout.total {
            return Err(Error::invalid(format!(
                "parameter vector has {} entries, layout needs {}",
                flat.len(),
                layout.total
            )));
        }
        Ok(Self {
            config,
            layout,
            flat,
        })
    }

    pub fn zeros(config: FieldConfig) -> Result<Self> {
        let n = ParamLayout::new(&config).total;
        Self::from_flat(config, vec![0.0; n])
    }

    pub fn config(&self) -> &FieldConfig {
        &self.config
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn flat(&self) -> &[f64] {
        &self.flat
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.flat
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn span(&self, name: &str) -> Result<&[f64]> {
        let s = self
            .layout
            .span(name)
            .ok_or_else(|| Error::invalid(format!("no parameter span named '{name}'")))?;
        Ok(&self.flat[s.offset..s.offset + s.len])
    }

    pub fn set_span(&mut self, name: &str, values: &[f64]) -> Result<()> {
        let s = self
            .layout
            .span(name)
            .ok_or_else(|| Error::invalid(format!("no parameter span named '{name}'")))?;
        if values.len() != s.len {
            return Err(Error::invalid(format!(
                "span '{name}' has {} entries, got {}",
                s.len,
                values.len()
            )));
        }
        self.flat[s.offset..s.offset + s.len].copy_from_slice(values);
        Ok(())
    }

    pub fn embedding_row(&self, kind: ManipulationKind) -> &[f64] {
        &self.flat[self.layout.embedding_row(kind)]
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let record = Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            config: self.config.clone(),
            flat: self.flat.clone(),
        };
        let text = serde_json::to_string(&record).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let record: Checkpoint = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if record.format != CHECKPOINT_FORMAT {
            return Err(Error::load(path, format!("unsupported checkpoint format '{}'", record.format)));
        }
        Self::from_flat(record.config, record.flat)
    }
}

const CHECKPOINT_FORMAT: &str = "nrm-aug-field-v1";

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    config: FieldConfig,
    flat: Vec<f64>,
}

/// Seeded initialization: uniform weights scaled by fan-in (He bound for
/// layers that feed a ReLU, `1/sqrt(fan_in)` for output layers), zero
/// biases, and embedding rows drawn from `N(0, 0.01^2)`.
pub fn init_params(config: &FieldConfig, seed: u64) -> Result<FieldParams> {
    let mut params = FieldParams::zeros(config.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = params.layout.clone();
    for layers in [&layout.mlp1, &layout.mlp2] {
        for (i, l) in layers.iter().enumerate() {
            let fan_in = l.inputs.max(1) as f64;
            let bound = if i + 1 < layers.len() {
                (6.0 / fan_in).sqrt()
            } else {
                (1.0 / fan_in).sqrt()
            };
            for w in &mut params.flat[l.weight..l.weight + l.inputs * l.outputs] {
                *w = rng.random_range(-bound..bound);
            }
        }
    }
    let normal = Normal::new(0.0, 0.01).expect("valid normal");
    let rows = layout.embedding..layout.total;
    for e in &mut params.flat[rows] {
        *e = normal.sample(&mut rng);
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FieldConfig {
        FieldConfig {
            pe_levels_position: 2,
            pe_levels_direction: 1,
            mlp1_widths: vec![8, 8],
            latent_dim: 4,
            mlp2_widths: vec![6],
            embed_dim: 3,
            mode: EmbeddingMode::Sia,
        }
    }

    #[test]
    fn spans_are_disjoint_and_cover() {
        for mode in [EmbeddingMode::Sia, EmbeddingMode::Dia] {
            let cfg = FieldConfig { mode, ..small() };
            let layout = ParamLayout::new(&cfg);
            let mut next = 0;
            for s in layout.spans() {
                assert_eq!(s.offset, next, "{}", s.name);
                next += s.len;
            }
            assert_eq!(next, layout.total);
            assert_eq!(layout.spans().iter().map(|s| s.len).sum::<usize>(), cfg.param_count());
        }
    }

    #[test]
    fn embedding_table_has_six_rows() {
        let cfg = small();
        let layout = ParamLayout::new(&cfg);
        assert_eq!(layout.span("embedding").unwrap().len, 6 * cfg.embed_dim);
    }

    #[test]
    fn dia_adds_one_color_input() {
        let sia = small();
        let dia = FieldConfig {
            mode: EmbeddingMode::Dia,
            ..small()
        };
        assert_eq!(dia.color_input_dim(), sia.color_input_dim() + 1);
        let first = ParamLayout::new(&dia).mlp2[0];
        assert_eq!(first.inputs, dia.color_input_dim());
        // one extra weight per first-layer unit
        assert_eq!(dia.param_count(), sia.param_count() + 6);
    }

    #[test]
    fn default_architecture() {
        let cfg = FieldConfig::default();
        assert_eq!(cfg.position_input_dim(), 39);
        assert_eq!(cfg.direction_input_dim(), 27);
        assert_eq!(cfg.color_input_dim(), 27 + 64 + 8);
    }

    #[test]
    fn init_is_deterministic() {
        let a = init_params(&small(), 7).unwrap();
        let b = init_params(&small(), 7).unwrap();
        let c = init_params(&small(), 8).unwrap();
        assert_eq!(a.flat(), b.flat());
        assert_ne!(a.flat(), c.flat());
        for l in a.layout().mlp1.iter().chain(&a.layout().mlp2) {
            assert!(a.flat()[l.bias..l.bias + l.outputs].iter().all(|b| *b == 0.0));
        }
    }

    #[test]
    fn embedding_init_scale() {
        let cfg = FieldConfig {
            embed_dim: 2000,
            ..small()
        };
        let p = init_params(&cfg, 1).unwrap();
        let emb = p.span("embedding").unwrap();
        let n = emb.len() as f64;
        let mean = emb.iter().sum::<f64>() / n;
        let std = (emb.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 0.001);
        assert!((std - 0.01).abs() < 0.0005);
    }

    #[test]
    fn span_read_write_round_trip() {
        let mut p = init_params(&small(), 3).unwrap();
        let before = p.flat().to_vec();
        for s in p.layout().spans() {
            let values = p.span(&s.name).unwrap().to_vec();
            p.set_span(&s.name, &values).unwrap();
        }
        assert_eq!(p.flat(), &before[..]);
        assert!(p.set_span("mlp1.w0", &[0.0]).is_err());
        assert!(p.span("nope").is_err());
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt.json");
        let p = init_params(&small(), 5).unwrap();
        p.save(&path).unwrap();
        let q = FieldParams::load(&path).unwrap();
        assert_eq!(p.config(), q.config());
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(p.flat()), bits(q.flat()));
    }

    #[test]
    fn wrong_length_rejected() {
        assert!(FieldParams::from_flat(small(), vec![0.0; 3]).is_err());
    }
}
