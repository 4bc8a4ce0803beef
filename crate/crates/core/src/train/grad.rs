//! Reverse-mode gradient of the photometric loss, one ray at a time:
//! field forward per sample, alpha compositing, then the composite and field
//! backward passes. Rays are processed in fixed-size chunks whose partial
//! gradients are summed in chunk order, so the result does not depend on
//! thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Evaluator, FieldParams, Scratch};
use crate::image_ops::noise::CounterRng;
use crate::image_ops::ManipulationKind;
use crate::render::{composite, composite_backward, QuadratureConfig, Ray};

/// Rays per parallel work unit.
const CHUNK: usize = 32;

/// One supervised ray with its appearance conditioning.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainRay {
    pub ray: Ray,
    pub target: [f64; 3],
    pub kind: ManipulationKind,
    pub p: f64,
}

/// Source of per-sample bin offsets in `[0, 1)`.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Offsets {
    Midpoint,
    Jittered(CounterRng),
}

impl Offsets {
    #[inline]
    fn get(&self, ray: usize, sample: usize) -> f64 {
        match self {
            Offsets::Midpoint => 0.5,
            Offsets::Jittered(rng) => rng.uniform(ray as u64, sample as u64),
        }
    }
}

struct Workspace {
    traces: Vec<f64>,
    sigmas: Vec<f64>,
    colors: Vec<[f64; 3]>,
    d_sigmas: Vec<f64>,
    d_colors: Vec<[f64; 3]>,
    ctx_grad: Vec<f64>,
    scratch: Scratch,
}

/// Mean over rays of the summed squared channel error between the rendered
/// and target colors, and its exact gradient w.r.t. every parameter.
/// Samples sit at bin midpoints.
pub fn loss_and_grad(params: &FieldParams, batch: &[TrainRay], quad: &QuadratureConfig) -> Result<(f64, Vec<f64>)> {
    batch_loss_and_grad(params, batch, quad, Offsets::Midpoint)
}

pub(crate) fn batch_loss_and_grad(
    params: &FieldParams,
    batch: &[TrainRay],
    quad: &QuadratureConfig,
    offsets: Offsets,
) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::invalid("loss needs a nonempty ray batch"));
    }
    quad.validate()?;
    for r in batch {
        if r.target.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::invalid(format!("target color {:?} outside [0, 1]", r.target)));
        }
    }
    let eval = Evaluator::new(params);
    let n_params = params.len();
    let scale = 1.0 / batch.len() as f64;
    let partials = batch
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(chunk, rays)| -> Result<(f64, Vec<f64>)> {
            let s = quad.samples_per_ray;
            let mut ws = Workspace {
                traces: vec![0.0; s * eval.trace_len()],
                sigmas: vec![0.0; s],
                colors: vec![[0.0; 3]; s],
                d_sigmas: vec![0.0; s],
                d_colors: vec![[0.0; 3]; s],
                ctx_grad: vec![0.0; eval.context_grad_len()],
                scratch: Scratch::default(),
            };
            let mut grad = vec![0.0; n_params];
            let mut loss = 0.0;
            for (j, r) in rays.iter().enumerate() {
                let index = chunk * CHUNK + j;
                loss += ray_loss_and_grad(&eval, r, quad, offsets, index, scale, &mut ws, &mut grad)?;
            }
            Ok((loss, grad))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut loss = 0.0;
    let mut grad = vec![0.0; n_params];
    for (l, g) in partials {
        loss += l;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    let loss = loss * scale;
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric(format!("non-finite loss or gradient (loss = {loss})")));
    }
    Ok((loss, grad))
}

#[allow(clippy::too_many_arguments)]
fn ray_loss_and_grad(
    eval: &Evaluator<'_>,
    r: &TrainRay,
    quad: &QuadratureConfig,
    offsets: Offsets,
    index: usize,
    scale: f64,
    ws: &mut Workspace,
    grad: &mut [f64],
) -> Result<f64> {
    let ctx = eval.ray_context(r.ray.direction, r.kind, r.p)?;
    let s = quad.samples_per_ray;
    let tl = eval.trace_len();
    let delta = quad.bin_width(&r.ray);
    for i in 0..s {
        let t = quad.sample_t(&r.ray, i, offsets.get(index, i));
        let trace = &mut ws.traces[i * tl..(i + 1) * tl];
        let (sigma, color) = eval.forward(&ctx, r.ray.at(t), trace);
        ws.sigmas[i] = sigma;
        ws.colors[i] = color;
    }
    let (color, trans) = composite(&ws.sigmas, &ws.colors, delta, quad.background);
    let mut loss = 0.0;
    let mut d_color = [0.0; 3];
    for k in 0..3 {
        let e = color[k] - r.target[k];
        loss += e * e;
        d_color[k] = 2.0 * e * scale;
    }
    composite_backward(&ws.colors, &trans, delta, quad.background, d_color, &mut ws.d_sigmas, &mut ws.d_colors);
    ws.ctx_grad.fill(0.0);
    for i in 0..s {
        let trace = &ws.traces[i * tl..(i + 1) * tl];
        eval.backward(trace, ws.d_sigmas[i], ws.d_colors[i], grad, &mut ws.ctx_grad, &mut ws.scratch);
    }
    eval.finish_ray(&ctx, &ws.ctx_grad, grad);
    Ok(loss)
}
