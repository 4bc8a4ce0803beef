//! Pure image-space functions: color manipulations, degradations, and the
//! kernels they share.

mod color;
mod convolve;
mod degrade;
mod image;
mod manipulate;
pub(crate) mod noise;

pub use color::{grayscale, hsv_to_rgb, luma, rgb_to_hsv, LUMA_WEIGHTS};
pub use convolve::{box_kernel, convolve2d, horizontal_blur_for_length, motion_blur_kernel, Kernel};
pub use degrade::{degrade, degrade_indexed, DegradationKind, DegradationSpec};
pub use image::Image;
pub use manipulate::{apply_manipulation, ManipulationKind};
pub use noise::POISSON_INVERSION_LIMIT;
