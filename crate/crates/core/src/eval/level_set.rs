use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Evaluator, FieldParams};
use crate::math::Vec3;

use super::PointCloud;

/// Anything with a scalar density over space.
pub trait DensityField: Sync {
    fn density(&self, x: Vec3, scratch: &mut Vec<f64>) -> f64;
}

impl DensityField for Evaluator<'_> {
    fn density(&self, x: Vec3, scratch: &mut Vec<f64>) -> f64 {
        scratch.resize(self.trace_len(), 0.0);
        Evaluator::density(self, x, scratch)
    }
}

/// Axis-aligned box `[min, max]` sampled by the extraction grid.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridBounds {
    pub min: Vec3,
    pub max: Vec3,
}

impl GridBounds {
    pub fn cube(half: f64) -> Self {
        Self {
            min: [-half; 3],
            max: [half; 3],
        }
    }

    fn validate(&self) -> Result<()> {
        for k in 0..3 {
            if !(self.min[k].is_finite() && self.max[k].is_finite() && self.min[k] < self.max[k]) {
                return Err(Error::invalid(format!("degenerate grid bounds {:?}..{:?}", self.min, self.max)));
            }
        }
        Ok(())
    }
}

/// Centers of all grid cells whose density lies on the other side of
/// `threshold` from at least one axis neighbor, in z-y-x scan order. An empty
/// cloud means no surface was found.
pub fn extract_level_set_with<F: DensityField>(field: &F, threshold: f64, resolution: usize, bounds: GridBounds) -> Result<PointCloud> {
    if resolution < 8 {
        return Err(Error::invalid(format!("grid resolution {resolution} must be at least 8")));
    }
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::invalid(format!("density threshold {threshold} must be positive")));
    }
    bounds.validate()?;
    let r = resolution;
    let step: Vec3 = std::array::from_fn(|k| (bounds.max[k] - bounds.min[k]) / r as f64);
    let center = |i: usize, j: usize, k: usize| -> Vec3 {
        [
            bounds.min[0] + (k as f64 + 0.5) * step[0],
            bounds.min[1] + (j as f64 + 0.5) * step[1],
            bounds.min[2] + (i as f64 + 0.5) * step[2],
        ]
    };
    // inside[z][y][x]
    let inside: Vec<bool> = (0..r)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut scratch = Vec::new();
            let mut slab = Vec::with_capacity(r * r);
            for j in 0..r {
                for k in 0..r {
                    slab.push(field.density(center(i, j, k), &mut scratch) >= threshold);
                }
            }
            slab
        })
        .collect();
    let at = |i: usize, j: usize, k: usize| inside[(i * r + j) * r + k];
    let mut points = Vec::new();
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let v = at(i, j, k);
                let crosses = (i > 0 && at(i - 1, j, k) != v)
                    || (i + 1 < r && at(i + 1, j, k) != v)
                    || (j > 0 && at(i, j - 1, k) != v)
                    || (j + 1 < r && at(i, j + 1, k) != v)
                    || (k > 0 && at(i, j, k - 1) != v)
                    || (k + 1 < r && at(i, j, k + 1) != v);
                if crosses {
                    points.push(center(i, j, k));
                }
            }
        }
    }
    Ok(PointCloud::new(points))
}

pub fn extract_level_set(params: &FieldParams, threshold: f64, resolution: usize, bounds: GridBounds) -> Result<PointCloud> {
    extract_level_set_with(&Evaluator::new(params), threshold, resolution, bounds)
}
