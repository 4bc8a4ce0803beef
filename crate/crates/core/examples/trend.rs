//! Trains baseline and SIA fields on the procedural scene and prints test PSNR.
//!
//! `cargo run --release -p nrm-aug --example trend -- [iterations] [batch] [samples] [seeds] [clean|sp|both] [learning rate]`

use nrm_aug::dataset::degrade_dataset;
use nrm_aug::image_ops::{DegradationKind, DegradationSpec};
use nrm_aug::synthetic::SyntheticScene;
use nrm_aug::train::{mean_psnr, train, TrainConfig, TrainMode};

fn main() -> nrm_aug::Result<()> {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    let which = raw.get(4).cloned().unwrap_or_else(|| "both".into());
    let lr: Option<f64> = raw.get(5).map(|a| a.parse().expect("numeric learning rate"));
    let args: Vec<usize> = raw.iter().take(4).map(|a| a.parse().expect("numeric argument")).collect();
    let iterations = args.first().copied().unwrap_or(2000);
    let batch = args.get(1).copied().unwrap_or(256);
    let samples = args.get(2).copied().unwrap_or(20);
    let seeds = args.get(3).copied().unwrap_or(1) as u64;
    let scene = SyntheticScene::default();
    let (train_set, test_set) = scene.generate()?;
    let noisy = degrade_dataset(&train_set, &DegradationSpec::new(DegradationKind::SaltPepper, 0.05, 0)?)?;
    for (label, data) in [("clean", &train_set), ("s&p", &noisy)] {
        if (which == "clean" && label != "clean") || (which == "sp" && label == "clean") {
            continue;
        }
        for mode in [TrainMode::Baseline, TrainMode::Sia] {
            for seed in 0..seeds {
                let mut cfg = TrainConfig::desk().with_mode(mode);
                cfg.iterations = iterations;
                cfg.batch_rays = batch;
                cfg.quadrature.samples_per_ray = samples;
                cfg.seed = seed;
                cfg.val_interval = 0;
                if let Some(lr) = lr {
                    cfg.learning_rate = lr;
                }
                let t = std::time::Instant::now();
                let out = train(data, None, &cfg)?;
                let p = mean_psnr(&out.params, &test_set, &cfg.quadrature)?;
                let last = out.log.last().map(|e| e.loss).unwrap_or(f64::NAN);
                println!("{label:5} {mode:8} seed {seed}: test psnr {p:.2} dB, final loss {last:.4}, {:.1}s", t.elapsed().as_secs_f64());
            }
        }
    }
    Ok(())
}
