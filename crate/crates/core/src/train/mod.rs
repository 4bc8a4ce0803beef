//! Losses, gradients, the optimizer and the training loop.

mod adam;
mod config;
mod grad;
mod run;
mod sampler;

pub use adam::{adam_step, AdamState};
pub use config::{TrainConfig, TrainMode};
pub use grad::{loss_and_grad, TrainRay};
pub use run::{mean_psnr, train, train_with, view_psnrs, LogEntry, TrainEvent, TrainOutput};
pub use sampler::BatchSampler;
