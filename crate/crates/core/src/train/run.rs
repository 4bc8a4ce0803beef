use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::PosedDataset;
use crate::error::{Error, Result};
use crate::eval::psnr;
use crate::field::{init_params, FieldParams};
use crate::image_ops::noise::CounterRng;
use crate::image_ops::ManipulationKind;
use crate::render::{render_image, QuadratureConfig};

use super::grad::{batch_loss_and_grad, Offsets};
use super::{adam_step, AdamState, BatchSampler, TrainConfig};

/// Keeps jitter draws independent of the pixel stream for the same seed.
const JITTER_KEY: u64 = 0x6a09_e667_f3bc_c908;

/// One line of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub iteration: usize,
    /// Mean batch loss since the previous line.
    pub loss: f64,
    pub val_psnr: Option<f64>,
    pub wall_ms: u64,
}

impl LogEntry {
    /// Equality ignoring wall-clock time.
    pub fn same_values(&self, other: &LogEntry) -> bool {
        self.iteration == other.iteration
            && self.loss.to_bits() == other.loss.to_bits()
            && self.val_psnr.map(f64::to_bits) == other.val_psnr.map(f64::to_bits)
    }
}

pub enum TrainEvent<'a> {
    Log(&'a LogEntry),
    Checkpoint { iteration: usize, params: &'a FieldParams },
}

pub struct TrainOutput {
    pub params: FieldParams,
    pub log: Vec<LogEntry>,
}

/// Renders each view at the identity query with midpoint samples and
/// returns its PSNR against the stored image.
pub fn view_psnrs(params: &FieldParams, views: &PosedDataset, quad: &QuadratureConfig) -> Result<Vec<f64>> {
    let quad = QuadratureConfig {
        stratified: false,
        ..quad.clone()
    };
    views
        .records()
        .iter()
        .map(|r| {
            let img = render_image(
                params,
                &r.pose,
                ManipulationKind::Identity,
                0.0,
                &quad,
                r.image.width(),
                r.image.height(),
                views.bounds(),
            )?;
            psnr(&img, &r.image)
        })
        .collect()
}

pub fn mean_psnr(params: &FieldParams, views: &PosedDataset, quad: &QuadratureConfig) -> Result<f64> {
    views.require_nonempty()?;
    let v = view_psnrs(params, views, quad)?;
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

pub fn train(train_set: &PosedDataset, val_set: Option<&PosedDataset>, cfg: &TrainConfig) -> Result<TrainOutput> {
    train_with(train_set, val_set, cfg, None, |_| Ok(()))
}

/// Full training loop. `init` overrides the seeded initialization; the
/// observer sees every log line and checkpoint as it happens.
pub fn train_with<F>(
    train_set: &PosedDataset,
    val_set: Option<&PosedDataset>,
    cfg: &TrainConfig,
    init: Option<FieldParams>,
    mut observer: F,
) -> Result<TrainOutput>
where
    F: FnMut(TrainEvent<'_>) -> Result<()>,
{
    cfg.validate()?;
    train_set.require_nonempty()?;
    let mut params = match init {
        Some(p) if p.config() != &cfg.field => {
            return Err(Error::invalid("initial parameters do not match the configured field"));
        }
        Some(p) => p,
        None => init_params(&cfg.field, cfg.seed)?,
    };
    let mut sampler = BatchSampler::new(train_set, cfg)?;
    let mut adam = AdamState::new(params.len());
    let start = Instant::now();
    let mut log = Vec::new();
    let (mut acc, mut count) = (0.0, 0usize);
    for it in 1..=cfg.iterations {
        let batch = sampler.next_batch(cfg.batch_rays)?;
        let offsets = if cfg.quadrature.stratified {
            Offsets::Jittered(CounterRng::new(cfg.seed ^ JITTER_KEY, it as u64))
        } else {
            Offsets::Midpoint
        };
        let (loss, grad) = batch_loss_and_grad(&params, &batch, &cfg.quadrature, offsets)
            .map_err(|e| match e {
                Error::Numeric(m) => Error::Numeric(format!("iteration {it}: {m}")),
                other => other,
            })?;
        adam_step(params.flat_mut(), &mut adam, &grad, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon)?;
        if params.flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("iteration {it}: parameters became non-finite")));
        }
        acc += loss;
        count += 1;

        let last = it == cfg.iterations;
        let validate = val_set.is_some() && (last || (cfg.val_interval > 0 && it % cfg.val_interval == 0));
        if last || validate || it % cfg.log_interval == 0 {
            let val_psnr = match val_set {
                Some(v) if validate => Some(mean_psnr(&params, v, &cfg.quadrature)?),
                _ => None,
            };
            let entry = LogEntry {
                iteration: it,
                loss: acc / count as f64,
                val_psnr,
                wall_ms: start.elapsed().as_millis() as u64,
            };
            observer(TrainEvent::Log(&entry))?;
            log.push(entry);
            acc = 0.0;
            count = 0;
        }
        if cfg.checkpoint_interval > 0 && (it % cfg.checkpoint_interval == 0 || last) {
            observer(TrainEvent::Checkpoint {
                iteration: it,
                params: &params,
            })?;
        }
    }
    Ok(TrainOutput { params, log })
}
