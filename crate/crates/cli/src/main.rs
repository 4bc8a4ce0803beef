mod commands;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nrm_aug::image_ops::{DegradationKind, DegradationSpec, ManipulationKind};
use nrm_aug::synthetic::SyntheticScene;
use nrm_aug::train::TrainMode;

use commands::{EvalTarget, ExtractArgs, RenderArgs};
use experiment::{ExperimentSpec, Overrides, UsageError};

/// Color-augmented radiance field experiments.
///
/// Settings resolve from built-in defaults, then a named preset, then the
/// --config file, then flags. Exit codes: 0 success, 2 usage, 3 data error,
/// 4 numeric failure.
#[derive(Parser)]
#[command(name = "nrm-aug", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment spec (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize the static augmented dataset with its manifest.
    Augment {
        scene: Option<PathBuf>,
    },
    /// Write a degraded copy of a scene.
    Degrade {
        scene: Option<PathBuf>,
        #[arg(long, value_parser = parse_degradation)]
        noise: Option<DegradationKind>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Write a random subset of a scene.
    Subsample {
        scene: Option<PathBuf>,
        #[arg(long)]
        percent: Option<u32>,
    },
    /// Train a field.
    Train {
        scene: Option<PathBuf>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<TrainMode>,
        /// Views scored with validation PSNR during training.
        #[arg(long)]
        val: Option<PathBuf>,
        /// Base training configuration: desk, nerf, ngp or neus.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        batch_rays: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        /// Degrade training views before training.
        #[arg(long, value_parser = parse_degradation)]
        noise: Option<DegradationKind>,
        #[arg(long, requires = "noise")]
        q: Option<f64>,
        #[arg(long)]
        percent: Option<u32>,
    },
    /// Render every camera of a scene from a checkpoint.
    Render {
        scene: Option<PathBuf>,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_parser = parse_manipulation, default_value = "identity")]
        manipulation: ManipulationKind,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        intensity: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Score rendered images against references, or two point clouds.
    Eval {
        #[arg(long, requires = "reference", conflicts_with = "clouds")]
        rendered: Option<PathBuf>,
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Two XYZ files compared with the summed Chamfer distance.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        clouds: Option<Vec<PathBuf>>,
    },
    /// Extract density level-set points from a checkpoint.
    Extract {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        threshold: f64,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        /// Half side of the sampled cube centered at the origin.
        #[arg(long, default_value_t = 1.0)]
        extent: f64,
        #[arg(long, default_value_t = 3)]
        precision: usize,
    },
    /// Generate the procedural ball-on-plane scene.
    Synth {
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 20)]
        train_views: usize,
        #[arg(long, default_value_t = 5)]
        test_views: usize,
    },
}

fn parse_degradation(s: &str) -> Result<DegradationKind, String> {
    s.parse().map_err(|e: nrm_aug::Error| e.to_string())
}

fn parse_manipulation(s: &str) -> Result<ManipulationKind, String> {
    s.parse().map_err(|e: nrm_aug::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<TrainMode, String> {
    s.parse().map_err(|e: nrm_aug::Error| e.to_string())
}

fn degradation(noise: Option<DegradationKind>, q: Option<f64>, seed: Option<u64>) -> anyhow::Result<Option<DegradationSpec>> {
    match (noise, q) {
        (None, None) => Ok(None),
        (Some(kind), Some(q)) => Ok(Some(
            DegradationSpec::new(kind, q, seed.unwrap_or(0)).map_err(|e| experiment::usage(e.to_string()))?,
        )),
        _ => Err(experiment::usage("--noise and --q must be given together")),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let Common { config, out, seed } = cli.common;
    let mut flags = Overrides {
        out,
        seed,
        ..Default::default()
    };
    match cli.command {
        Command::Augment { scene } => {
            flags.scene = scene;
            commands::augment(&ExperimentSpec::load(config.as_deref(), flags)?)
        }
        Command::Degrade { scene, noise, q } => {
            flags.scene = scene;
            flags.degradation = degradation(noise, q, seed)?;
            commands::degrade(&ExperimentSpec::load(config.as_deref(), flags)?)
        }
        Command::Subsample { scene, percent } => {
            flags.scene = scene;
            flags.subsample_percent = percent;
            commands::subsample_cmd(&ExperimentSpec::load(config.as_deref(), flags)?)
        }
        Command::Train {
            scene,
            mode,
            val,
            preset,
            iterations,
            batch_rays,
            samples,
            noise,
            q,
            percent,
        } => {
            flags.scene = scene;
            flags.mode = mode;
            flags.val_scene = val;
            flags.preset = preset;
            flags.iterations = iterations;
            flags.batch_rays = batch_rays;
            flags.samples_per_ray = samples;
            flags.degradation = degradation(noise, q, seed)?;
            flags.subsample_percent = percent;
            commands::train(&ExperimentSpec::load(config.as_deref(), flags)?)
        }
        Command::Render {
            scene,
            checkpoint,
            manipulation,
            intensity,
            samples,
        } => {
            flags.scene = scene;
            let args = RenderArgs {
                checkpoint,
                manipulation,
                intensity,
                samples,
            };
            commands::render(&ExperimentSpec::load(config.as_deref(), flags)?, &args)
        }
        Command::Eval {
            rendered,
            reference,
            clouds,
        } => {
            let target = match (rendered, reference, clouds) {
                (Some(rendered), Some(reference), None) => EvalTarget::Images { rendered, reference },
                (None, None, Some(c)) => EvalTarget::Clouds {
                    a: c[0].clone(),
                    b: c[1].clone(),
                },
                _ => return Err(experiment::usage("eval needs --rendered and --reference, or --clouds A B")),
            };
            commands::eval(&ExperimentSpec::load(config.as_deref(), flags)?, &target)
        }
        Command::Extract {
            checkpoint,
            threshold,
            resolution,
            extent,
            precision,
        } => {
            let args = ExtractArgs {
                checkpoint,
                threshold,
                resolution,
                half_extent: extent,
                precision,
            };
            commands::extract(&ExperimentSpec::load(config.as_deref(), flags)?, &args)
        }
        Command::Synth {
            size,
            train_views,
            test_views,
        } => {
            let scene = SyntheticScene {
                size,
                train_views,
                test_views,
                ..SyntheticScene::default()
            };
            commands::synth(&ExperimentSpec::load(config.as_deref(), flags)?, &scene)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<nrm_aug::Error>() {
            return match e {
                nrm_aug::Error::InvalidArgument(_) => 2,
                nrm_aug::Error::Numeric(_) => 4,
                _ => 3,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
