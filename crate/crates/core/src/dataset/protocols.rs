//! Robustness protocols: reduced-size and degraded training sets.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image_ops::{degrade_indexed, DegradationSpec};

use super::{PosedDataset, PosedImage};

/// Records kept at `percent` of `n`: round half up, at least one.
pub fn subsample_count(n: usize, percent: u32) -> Result<usize> {
    if percent == 0 || percent > 100 {
        return Err(Error::invalid(format!("subsample percent {percent} must lie in 1..=100")));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(((percent as usize * n + 50) / 100).max(1))
}

/// Uniform subset without replacement, kept in original order.
pub fn subsample(dataset: &PosedDataset, percent: u32, seed: u64) -> Result<PosedDataset> {
    let k = subsample_count(dataset.len(), percent)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, dataset.len(), k).into_vec();
    picked.sort_unstable();
    let records = picked.into_iter().map(|i| dataset.records()[i].clone()).collect();
    Ok(dataset.with_records(records))
}

/// Degrades every image with a per-image noise stream; poses and order kept.
pub fn degrade_dataset(dataset: &PosedDataset, spec: &DegradationSpec) -> Result<PosedDataset> {
    spec.validate()?;
    let records = dataset
        .records()
        .par_iter()
        .enumerate()
        .map(|(i, r)| -> Result<PosedImage> {
            Ok(PosedImage {
                image: degrade_indexed(&r.image, spec, i as u64)?,
                ..r.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(dataset.with_records(records))
}
