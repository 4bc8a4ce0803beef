use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{build_sia, sample_manipulation, Augmentation, IntensityConfig, PosedDataset, PosedImage};
use crate::error::{Error, Result};
use crate::image_ops::{apply_manipulation, Image};
use crate::render::Ray;

use super::{TrainConfig, TrainMode, TrainRay};

/// Draws training rays uniformly over all `(image, pixel)` pairs of the pool
/// the mode trains on: the dataset itself (baseline, DIA) or its static
/// replicas (SIA).
pub struct BatchSampler {
    mode: TrainMode,
    pool: Vec<PosedImage>,
    bounds: (f64, f64),
    height: usize,
    width: usize,
    intensities: IntensityConfig,
    pixel_rng: ChaCha8Rng,
    dia_rng: ChaCha8Rng,
}

impl BatchSampler {
    pub fn new(dataset: &PosedDataset, cfg: &TrainConfig) -> Result<Self> {
        let (height, width) = dataset.dims().ok_or(Error::EmptyDataset)?;
        let pool = match cfg.mode {
            TrainMode::Baseline | TrainMode::Dia => dataset.records().to_vec(),
            TrainMode::Sia => build_sia(dataset, &cfg.intensities)?
                .records()
                .iter()
                .filter(|r| cfg.sia_kinds.contains(&r.augmentation.kind))
                .cloned()
                .collect(),
        };
        if pool.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut dia_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        dia_rng.set_stream(1);
        Ok(Self {
            mode: cfg.mode,
            pool,
            bounds: dataset.bounds(),
            height,
            width,
            intensities: cfg.intensities.clone(),
            pixel_rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            dia_rng,
        })
    }

    /// Number of images rays are drawn from.
    pub fn pool_len(&self) -> usize {
        self.pool.len()
    }

    pub fn pool(&self) -> &[PosedImage] {
        &self.pool
    }

    pub fn next_batch(&mut self, batch_rays: usize) -> Result<Vec<TrainRay>> {
        let per_image = self.height * self.width;
        let total = self.pool.len() * per_image;
        let picks: Vec<(usize, usize)> = (0..batch_rays)
            .map(|_| {
                let u = self.pixel_rng.random_range(0..total);
                (u / per_image, u % per_image)
            })
            .collect();

        // one (kind, p) draw per distinct image, in index order
        let mut dynamic: BTreeMap<usize, (Augmentation, Image)> = BTreeMap::new();
        if self.mode == TrainMode::Dia {
            for &(img, _) in &picks {
                dynamic.entry(img).or_insert_with(|| (Augmentation::IDENTITY, Image::filled(0, 0, [0.0; 3])));
            }
            for (&img, slot) in dynamic.iter_mut() {
                let (kind, p) = sample_manipulation(&self.intensities, &mut self.dia_rng)?;
                *slot = (Augmentation { kind, p }, apply_manipulation(&self.pool[img].image, kind, p)?);
            }
        }

        picks
            .into_iter()
            .map(|(img, pix)| {
                let rec = &self.pool[img];
                let (row, col) = (pix / self.width, pix % self.width);
                let (aug, target) = match self.mode {
                    TrainMode::Baseline => (Augmentation::IDENTITY, rec.image.pixel(row, col)),
                    TrainMode::Sia => (rec.augmentation, rec.image.pixel(row, col)),
                    TrainMode::Dia => {
                        let (aug, image) = &dynamic[&img];
                        (*aug, image.pixel(row, col))
                    }
                };
                let dir = rec.pose.pixel_direction(self.width, self.height, row, col);
                Ok(TrainRay {
                    ray: Ray::new(rec.pose.origin(), dir, self.bounds.0, self.bounds.1)?,
                    target,
                    kind: aug.kind,
                    p: aug.p,
                })
            })
            .collect()
    }
}
