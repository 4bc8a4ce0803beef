use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use nrm_aug::dataset::{degrade_dataset, load_dataset, materialize_sia, save_dataset, subsample, LoadOptions, PosedDataset};
use nrm_aug::eval::{chamfer_sum, compare_directories, extract_level_set, GridBounds, MetricRecord, PointCloud};
use nrm_aug::field::FieldParams;
use nrm_aug::image_ops::{DegradationSpec, ManipulationKind};
use nrm_aug::io::save_png;
use nrm_aug::render::{render_image, QuadratureConfig};
use nrm_aug::synthetic::SyntheticScene;
use nrm_aug::train::{train_with, TrainEvent};

use crate::experiment::{usage, ExperimentSpec};

fn load(path: &Path) -> Result<PosedDataset> {
    load_dataset(path, &LoadOptions::default()).with_context(|| format!("loading scene {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn augment(spec: &ExperimentSpec) -> Result<()> {
    let out = spec.out()?;
    let scene = load(spec.scene()?)?;
    let (_, manifest) = materialize_sia(&scene, &spec.intensities, out)?;
    spec.write_to(out)?;
    for (kind, count) in manifest.counts() {
        println!("{kind:<11} {count}");
    }
    println!("total       {} replicas of {} images -> {}", manifest.len(), scene.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct DegradationManifest<'a> {
    spec: &'a DegradationSpec,
    images: Vec<&'a str>,
}

pub fn degrade(spec: &ExperimentSpec) -> Result<()> {
    let deg = spec
        .degradation
        .ok_or_else(|| usage("no degradation given (use --noise/--q or a [degradation] table)"))?;
    let out = spec.out()?;
    let scene = load(spec.scene()?)?;
    let degraded = degrade_dataset(&scene, &deg)?;
    save_dataset(&degraded, out)?;
    write_json(
        &out.join("degradation.json"),
        &DegradationManifest {
            spec: &deg,
            images: degraded.records().iter().map(|r| r.name.as_str()).collect(),
        },
    )?;
    spec.write_to(out)?;
    println!("{} images degraded with {} q={} seed={} -> {}", degraded.len(), deg.kind, deg.q, deg.seed, out.display());
    Ok(())
}

#[derive(Serialize)]
struct SubsampleManifest<'a> {
    percent: u32,
    seed: u64,
    source_count: usize,
    images: Vec<&'a str>,
}

pub fn subsample_cmd(spec: &ExperimentSpec) -> Result<()> {
    let percent = spec
        .subsample_percent
        .ok_or_else(|| usage("no percentage given (use --percent or set subsample_percent)"))?;
    let out = spec.out()?;
    let scene = load(spec.scene()?)?;
    let subset = subsample(&scene, percent, spec.seed)?;
    save_dataset(&subset, out)?;
    write_json(
        &out.join("subsample.json"),
        &SubsampleManifest {
            percent,
            seed: spec.seed,
            source_count: scene.len(),
            images: subset.records().iter().map(|r| r.name.as_str()).collect(),
        },
    )?;
    spec.write_to(out)?;
    println!("kept {} of {} images -> {}", subset.len(), scene.len(), out.display());
    Ok(())
}

pub const LOG_FILE: &str = "log.jsonl";
pub const FINAL_CHECKPOINT: &str = "checkpoint.json";

pub fn train(spec: &ExperimentSpec) -> Result<()> {
    spec.train.validate().map_err(|e| usage(e.to_string()))?;
    let out = spec.out()?;
    let mut scene = load(spec.scene()?)?;
    if let Some(pct) = spec.subsample_percent {
        scene = subsample(&scene, pct, spec.seed)?;
    }
    if let Some(deg) = &spec.degradation {
        scene = degrade_dataset(&scene, deg)?;
    }
    let val = spec.val_scene.as_deref().map(load).transpose()?;
    spec.write_to(out)?;
    let log_path = out.join(LOG_FILE);
    let mut log_file = File::create(&log_path).with_context(|| format!("creating {}", log_path.display()))?;
    let ckpt_dir = out.join("checkpoints");
    let result = train_with(&scene, val.as_ref(), &spec.train, None, |event| {
        match event {
            TrainEvent::Log(entry) => {
                let line = serde_json::to_string(entry).expect("log entries serialize");
                writeln!(log_file, "{line}").map_err(|e| nrm_aug::Error::Io {
                    path: log_path.clone(),
                    source: e,
                })?;
                let val = entry.val_psnr.map(|v| format!("  val {v:.2} dB")).unwrap_or_default();
                println!("iter {:>6}  loss {:.5}{val}", entry.iteration, entry.loss);
            }
            TrainEvent::Checkpoint { iteration, params } => {
                std::fs::create_dir_all(&ckpt_dir).map_err(|e| nrm_aug::Error::Io {
                    path: ckpt_dir.clone(),
                    source: e,
                })?;
                params.save(&ckpt_dir.join(format!("iter_{iteration:07}.json")))?;
            }
        }
        Ok(())
    })?;
    result.params.save(&out.join(FINAL_CHECKPOINT))?;
    println!("trained {} iterations ({}) -> {}", spec.train.iterations, spec.mode, out.display());
    Ok(())
}

pub struct RenderArgs {
    pub checkpoint: PathBuf,
    pub manipulation: ManipulationKind,
    pub intensity: f64,
    pub samples: usize,
}

pub fn render(spec: &ExperimentSpec, args: &RenderArgs) -> Result<()> {
    let params = FieldParams::load(&args.checkpoint).with_context(|| format!("loading checkpoint {}", args.checkpoint.display()))?;
    let out = spec.out()?;
    let scene = load(spec.scene()?)?;
    let quad = QuadratureConfig {
        samples_per_ray: args.samples,
        stratified: false,
        background: spec.train.quadrature.background,
    };
    let (h, w) = scene.dims().expect("loaded scenes are nonempty");
    for r in scene.records() {
        let img = render_image(&params, &r.pose, args.manipulation, args.intensity, &quad, w, h, scene.bounds())?;
        save_png(&out.join(format!("{}.png", r.name)), &img)?;
    }
    spec.write_to(out)?;
    println!(
        "rendered {} views at ({}, {}) -> {}",
        scene.len(),
        args.manipulation,
        args.intensity,
        out.display()
    );
    Ok(())
}

pub enum EvalTarget {
    Images { rendered: PathBuf, reference: PathBuf },
    Clouds { a: PathBuf, b: PathBuf },
}

pub fn eval(spec: &ExperimentSpec, target: &EvalTarget) -> Result<()> {
    let records = match target {
        EvalTarget::Images { rendered, reference } => {
            let summary = compare_directories(rendered, reference)?;
            if let Some(out) = &spec.out {
                std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
                write_json(&out.join("metrics.json"), &summary)?;
            }
            summary.records(rendered, reference)
        }
        EvalTarget::Clouds { a, b } => {
            let pa = PointCloud::load_xyz(a)?;
            let pb = PointCloud::load_xyz(b)?;
            if pa.is_empty() || pb.is_empty() {
                return Err(nrm_aug::Error::InvalidArgument("Chamfer distance needs two nonempty point clouds".into()).into());
            }
            vec![MetricRecord {
                metric: "chamfer_sum".into(),
                value: chamfer_sum(&pa, &pb)?,
                inputs: vec![a.display().to_string(), b.display().to_string()],
            }]
        }
    };
    let mut lines = String::new();
    for r in &records {
        lines.push_str(&serde_json::to_string(r)?);
        lines.push('\n');
    }
    print!("{lines}");
    if let Some(out) = &spec.out {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        std::fs::write(out.join("metrics.jsonl"), &lines).context("writing metrics.jsonl")?;
        spec.write_to(out)?;
    }
    Ok(())
}

pub struct ExtractArgs {
    pub checkpoint: PathBuf,
    pub threshold: f64,
    pub resolution: usize,
    pub half_extent: f64,
    pub precision: usize,
}

pub fn extract(spec: &ExperimentSpec, args: &ExtractArgs) -> Result<()> {
    let out = spec.out()?;
    let params = FieldParams::load(&args.checkpoint).with_context(|| format!("loading checkpoint {}", args.checkpoint.display()))?;
    let cloud = extract_level_set(&params, args.threshold, args.resolution, GridBounds::cube(args.half_extent))?;
    cloud.save_xyz(&out.join("points.xyz"), args.precision)?;
    spec.write_to(out)?;
    if cloud.is_empty() {
        println!("no surface found at density {}", args.threshold);
    } else {
        println!("{} surface points -> {}", cloud.len(), out.join("points.xyz").display());
    }
    Ok(())
}

pub fn synth(spec: &ExperimentSpec, scene: &SyntheticScene) -> Result<()> {
    let out = spec.out()?;
    let (train, test) = scene.write(out)?;
    write_json(&out.join("scene.json"), scene)?;
    spec.write_to(out)?;
    println!(
        "{} train and {} test views at {}x{} -> {}",
        train.len(),
        test.len(),
        scene.size,
        scene.size,
        out.display()
    );
    Ok(())
}
