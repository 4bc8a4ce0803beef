//! Radiance fields trained on color-augmented posed-image datasets.
//!
//! The crate covers the whole pipeline at desk scale: color manipulations and
//! degradation models ([`image_ops`]), static and dynamic augmented datasets
//! ([`dataset`]), a two-MLP density/color field with a per-manipulation
//! appearance embedding ([`field`]), volumetric rendering ([`render`]),
//! hand-written reverse-mode gradients with Adam ([`train`]), and image and
//! geometry metrics ([`eval`]).

pub mod dataset;
pub mod error;
pub mod eval;
pub mod field;
pub mod image_ops;
pub mod io;
pub mod math;
pub mod render;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};
