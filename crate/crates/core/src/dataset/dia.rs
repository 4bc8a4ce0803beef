//! Dynamic augmentation: a manipulation and an intensity drawn on the fly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::image_ops::{apply_manipulation, Image, ManipulationKind};

use super::{IntensityConfig, PosedDataset};

/// One dynamic draw: which record, the manipulated image, and its conditioning.
#[derive(Clone, Debug, PartialEq)]
pub struct DiaDraw {
    pub index: usize,
    pub image: Image,
    pub kind: ManipulationKind,
    pub p: f64,
}

/// Draws a non-identity manipulation uniformly and `p ~ U[-w/2, w/2]` for its width.
pub fn sample_manipulation<R: Rng + ?Sized>(cfg: &IntensityConfig, rng: &mut R) -> Result<(ManipulationKind, f64)> {
    let kind = ManipulationKind::NON_IDENTITY[rng.random_range(0..ManipulationKind::NON_IDENTITY.len())];
    let w = cfg.dia_width(kind)?;
    if !(w.is_finite() && w >= 0.0) {
        return Err(Error::invalid(format!("DIA width for {kind} must be nonnegative")));
    }
    let u: f64 = rng.random();
    Ok((kind, (u - 0.5) * w))
}

/// Picks a record uniformly, then applies a freshly sampled manipulation to it.
pub fn sample_dia<R: Rng + ?Sized>(dataset: &PosedDataset, cfg: &IntensityConfig, rng: &mut R) -> Result<DiaDraw> {
    dataset.require_nonempty()?;
    let index = rng.random_range(0..dataset.len());
    let (kind, p) = sample_manipulation(cfg, rng)?;
    let image = apply_manipulation(&dataset.records()[index].image, kind, p)?;
    Ok(DiaDraw { index, image, kind, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Augmentation, CameraPose, PosedImage};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fixture() -> PosedDataset {
        let rec = |i: usize| PosedImage {
            name: format!("r_{i}"),
            image: Image::from_fn(3, 3, |r, c| [0.1 * r as f64, 0.2 + 0.1 * c as f64, 0.3 * i as f64]),
            pose: CameraPose::identity(1.0),
            augmentation: Augmentation::IDENTITY,
            source: None,
        };
        PosedDataset::new(vec![rec(0), rec(1), rec(2)], (1.0, 2.0)).unwrap()
    }

    #[test]
    fn kinds_are_uniform_over_non_identity() {
        let cfg = IntensityConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let mut counts = [0usize; ManipulationKind::COUNT];
        for _ in 0..n {
            counts[sample_manipulation(&cfg, &mut rng).unwrap().0.index()] += 1;
        }
        assert_eq!(counts[ManipulationKind::Identity.index()], 0);
        for kind in ManipulationKind::NON_IDENTITY {
            let f = counts[kind.index()] as f64 / n as f64;
            assert!((f - 0.2).abs() <= 0.01, "{kind}: {f}");
        }
    }

    #[test]
    fn intensities_fill_the_centered_interval() {
        let cfg = IntensityConfig::uniform(0.3, 0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut sum = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for _ in 0..n {
            let (_, p) = sample_manipulation(&cfg, &mut rng).unwrap();
            assert!((-0.3..=0.3).contains(&p));
            sum += p;
            lo = lo.min(p);
            hi = hi.max(p);
        }
        assert!((sum / n as f64).abs() <= 0.01);
        assert!(lo < -0.29 && hi > 0.29);
    }

    #[test]
    fn zero_widths_return_source_images() {
        let ds = fixture();
        let cfg = IntensityConfig::uniform(0.0, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let draw = sample_dia(&ds, &cfg, &mut rng).unwrap();
            assert_eq!(draw.p, 0.0);
            assert_ne!(draw.kind, ManipulationKind::Identity);
            assert_eq!(draw.image, ds.records()[draw.index].image);
        }
    }

    #[test]
    fn draws_match_direct_manipulation() {
        let ds = fixture();
        let cfg = IntensityConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let d = sample_dia(&ds, &cfg, &mut rng).unwrap();
            let w = cfg.dia_width(d.kind).unwrap();
            assert!(d.p.abs() <= w / 2.0);
            assert_eq!(d.image, apply_manipulation(&ds.records()[d.index].image, d.kind, d.p).unwrap());
        }
    }
}
