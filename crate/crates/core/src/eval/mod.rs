//! Image and geometry metrics.

mod chamfer;
mod image_metrics;
mod level_set;
mod report;

pub use chamfer::{chamfer_sum, directed_mean_distance, KdTree, PointCloud};
pub use image_metrics::{mse, psnr, ssim, SSIM_SIGMA, SSIM_WINDOW};
pub use level_set::{extract_level_set, extract_level_set_with, DensityField, GridBounds};
pub use report::{compare_directories, ImageScore, MetricRecord, MetricSummary};
