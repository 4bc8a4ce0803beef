//! Alpha-compositing discretization of the volume rendering integral.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Evaluator, FieldParams, RayContext};
use crate::image_ops::{Image, ManipulationKind};
use crate::math::Vec3;

use super::camera::{CameraPose, Ray};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub samples_per_ray: usize,
    /// Jitter sample positions within their bins. Only training honors this;
    /// evaluation renders always use bin midpoints.
    pub stratified: bool,
    pub background: [f64; 3],
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            samples_per_ray: 64,
            stratified: true,
            background: [1.0; 3],
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_ray < 2 {
            return Err(Error::invalid(format!(
                "samples_per_ray = {} must be at least 2",
                self.samples_per_ray
            )));
        }
        if self.background.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::invalid("background color must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn bin_width(&self, ray: &Ray) -> f64 {
        (ray.t_far - ray.t_near) / self.samples_per_ray as f64
    }

    /// Sample depth for bin `i` at fractional `offset` within the bin.
    pub fn sample_t(&self, ray: &Ray, i: usize, offset: f64) -> f64 {
        ray.t_near + (i as f64 + offset) * self.bin_width(ray)
    }
}

/// Anything that yields density and color along rays.
pub trait RadianceField: Sync {
    type RayState;

    fn begin_ray(&self, direction: Vec3, kind: ManipulationKind, p: f64) -> Result<Self::RayState>;

    /// `(sigma, color)` at `x`; `scratch` is per-thread workspace.
    fn sample(&self, state: &Self::RayState, x: Vec3, scratch: &mut Vec<f64>) -> (f64, [f64; 3]);
}

impl RadianceField for Evaluator<'_> {
    type RayState = RayContext;

    fn begin_ray(&self, direction: Vec3, kind: ManipulationKind, p: f64) -> Result<RayContext> {
        self.ray_context(direction, kind, p)
    }

    fn sample(&self, state: &RayContext, x: Vec3, scratch: &mut Vec<f64>) -> (f64, [f64; 3]) {
        scratch.resize(self.trace_len(), 0.0);
        self.forward(state, x, scratch)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub t: f64,
    pub sigma: f64,
    pub alpha: f64,
    /// Transmittance reaching this sample, before its own absorption.
    pub transmittance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayRender {
    pub color: [f64; 3],
    pub opacity: f64,
    /// `T_0 = 1, T_1, ..., T_S`; the last entry is the residual transmittance.
    pub transmittance: Vec<f64>,
    pub samples: Vec<SampleRecord>,
}

impl RayRender {
    /// Writes one JSON object per sample.
    pub fn write_debug_dump(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        for s in &self.samples {
            serde_json::to_writer(&mut out, s).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
            out.push(b'\n');
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(&out).map_err(|e| Error::io(path, e))
    }
}

/// Composites `sigmas`/`colors` with constant bin width `delta`. Returns the
/// color and the transmittance profile (length `S + 1`).
pub(crate) fn composite(sigmas: &[f64], colors: &[[f64; 3]], delta: f64, background: [f64; 3]) -> ([f64; 3], Vec<f64>) {
    let mut trans = Vec::with_capacity(sigmas.len() + 1);
    let mut t = 1.0;
    let mut color = [0.0; 3];
    trans.push(t);
    for (sigma, c) in sigmas.iter().zip(colors) {
        let alpha = -(-sigma * delta).exp_m1();
        let w = t * alpha;
        for k in 0..3 {
            color[k] += w * c[k];
        }
        t *= 1.0 - alpha;
        trans.push(t);
    }
    for k in 0..3 {
        color[k] += t * background[k];
    }
    (color, trans)
}

/// Gradients of the composited color w.r.t. each sample's density and color,
/// contracted with the upstream `d_color`.
///
/// With `tau_i = sigma_i * delta` and `w_i = T_i - T_{i+1}`:
/// `dC/dc_i = w_i` and
/// `dC/dtau_i = T_{i+1} c_i - sum_{k>i} w_k c_k - T_S * background`.
pub(crate) fn composite_backward(
    colors: &[[f64; 3]],
    trans: &[f64],
    delta: f64,
    background: [f64; 3],
    d_color: [f64; 3],
    d_sigmas: &mut [f64],
    d_colors: &mut [[f64; 3]],
) {
    let s = colors.len();
    let t_final = trans[s];
    let mut suffix = [
        t_final * background[0],
        t_final * background[1],
        t_final * background[2],
    ];
    for i in (0..s).rev() {
        let w = trans[i] - trans[i + 1];
        let c = colors[i];
        let mut d_tau = 0.0;
        for k in 0..3 {
            d_tau += d_color[k] * (trans[i + 1] * c[k] - suffix[k]);
            d_colors[i][k] = w * d_color[k];
            suffix[k] += w * c[k];
        }
        d_sigmas[i] = d_tau * delta;
    }
}

/// Renders one ray at bin midpoints.
pub fn render_ray_with<F: RadianceField>(
    field: &F,
    ray: &Ray,
    kind: ManipulationKind,
    p: f64,
    quad: &QuadratureConfig,
) -> Result<RayRender> {
    quad.validate()?;
    let state = field.begin_ray(ray.direction, kind, p)?;
    let mut scratch = Vec::new();
    Ok(march(field, &state, ray, quad, &mut scratch))
}

fn march<F: RadianceField>(field: &F, state: &F::RayState, ray: &Ray, quad: &QuadratureConfig, scratch: &mut Vec<f64>) -> RayRender {
    let n = quad.samples_per_ray;
    let delta = quad.bin_width(ray);
    let mut sigmas = Vec::with_capacity(n);
    let mut colors = Vec::with_capacity(n);
    let mut ts = Vec::with_capacity(n);
    for i in 0..n {
        let t = quad.sample_t(ray, i, 0.5);
        let (sigma, color) = field.sample(state, ray.at(t), scratch);
        ts.push(t);
        sigmas.push(sigma);
        colors.push(color);
    }
    let (color, trans) = composite(&sigmas, &colors, delta, quad.background);
    let samples = (0..n)
        .map(|i| SampleRecord {
            t: ts[i],
            sigma: sigmas[i],
            alpha: -(-sigmas[i] * delta).exp_m1(),
            transmittance: trans[i],
        })
        .collect();
    RayRender {
        color,
        opacity: 1.0 - trans[n],
        transmittance: trans,
        samples,
    }
}

pub fn render_ray(params: &FieldParams, ray: &Ray, kind: ManipulationKind, p: f64, quad: &QuadratureConfig) -> Result<RayRender> {
    render_ray_with(&Evaluator::new(params), ray, kind, p, quad)
}

/// Renders every pixel of a `width x height` view; rows are processed in
/// parallel and the result does not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn render_image_with<F: RadianceField>(
    field: &F,
    pose: &CameraPose,
    kind: ManipulationKind,
    p: f64,
    quad: &QuadratureConfig,
    width: usize,
    height: usize,
    bounds: (f64, f64),
) -> Result<Image> {
    quad.validate()?;
    pose.validate()?;
    let origin = pose.origin();
    let rows: Vec<Vec<f64>> = (0..height)
        .into_par_iter()
        .map(|row| -> Result<Vec<f64>> {
            let mut scratch = Vec::new();
            let mut out = Vec::with_capacity(width * 3);
            for col in 0..width {
                let ray = Ray::new(origin, pose.pixel_direction(width, height, row, col), bounds.0, bounds.1)?;
                let state = field.begin_ray(ray.direction, kind, p)?;
                out.extend(march(field, &state, &ray, quad, &mut scratch).color);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Image::from_unclipped(height, width, rows.concat())
}

#[allow(clippy::too_many_arguments)]
pub fn render_image(
    params: &FieldParams,
    pose: &CameraPose,
    kind: ManipulationKind,
    p: f64,
    quad: &QuadratureConfig,
    width: usize,
    height: usize,
    bounds: (f64, f64),
) -> Result<Image> {
    render_image_with(&Evaluator::new(params), pose, kind, p, quad, width, height, bounds)
}
