//! Forward and reverse passes of the field.
//!
//! Density and latent come from MLP1 on the encoded position. Color comes
//! from MLP2 on `[encoded direction, latent, appearance]`. The direction and
//! appearance parts of MLP2's first layer are constant along a ray, so they
//! are folded into a per-ray [`RayContext`] and their gradients are reduced
//! once per ray.

use crate::error::{Error, Result};
use crate::image_ops::ManipulationKind;
use crate::math::{sigmoid, softplus, Vec3};

use super::encoding::{encode_into, encode_slice};
use super::params::{DenseSpan, EmbeddingMode, FieldParams};

#[derive(Clone, Debug, PartialEq)]
pub struct FieldOutput {
    pub sigma: f64,
    pub color: [f64; 3],
    pub z: Vec<f64>,
}

/// Appearance vector for `(kind, p)`: the table row, with `p` appended in DIA mode.
pub fn embedding_lookup(params: &FieldParams, kind: ManipulationKind, p: f64, mode: EmbeddingMode) -> Vec<f64> {
    let mut out = params.embedding_row(kind).to_vec();
    if mode == EmbeddingMode::Dia {
        out.push(p);
    }
    out
}

/// Evaluates density, color and latent at one point.
pub fn eval_field(params: &FieldParams, x: Vec3, d: Vec3, kind: ManipulationKind, p: f64) -> Result<FieldOutput> {
    let eval = Evaluator::new(params);
    let ctx = eval.ray_context(d, kind, p)?;
    let mut trace = vec![0.0; eval.trace_len()];
    let (sigma, color) = eval.forward(&ctx, x, &mut trace);
    Ok(FieldOutput {
        sigma,
        color,
        z: eval.latent(&trace).to_vec(),
    })
}

pub fn check_unit_direction(d: Vec3) -> Result<()> {
    let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if !((n - 1.0).abs() <= 1e-6) {
        return Err(Error::invalid(format!("direction {d:?} has norm {n}, expected 1")));
    }
    Ok(())
}

/// Per-ray constants for MLP2's first layer.
#[derive(Clone, Debug)]
pub struct RayContext {
    kind: ManipulationKind,
    enc_dir: Vec<f64>,
    appearance: Vec<f64>,
    /// `b0 + W0[:, dir] enc_dir + W0[:, app] appearance`
    base: Vec<f64>,
}

/// Borrowed view of a parameter vector with precomputed activation offsets.
pub struct Evaluator<'a> {
    flat: &'a [f64],
    mlp1: &'a [DenseSpan],
    mlp2: &'a [DenseSpan],
    embed_rows: usize,
    embed_dim: usize,
    levels_pos: usize,
    levels_dir: usize,
    mode: EmbeddingMode,
    dir_dim: usize,
    latent_dim: usize,
    /// Start of each activation slot in a sample trace:
    /// `[enc_x, mlp1 hidden.., mlp1 out, mlp2 hidden.., mlp2 out]`.
    slots: Vec<usize>,
    trace_len: usize,
    max_width: usize,
}

impl<'a> Evaluator<'a> {
    pub fn new(params: &'a FieldParams) -> Self {
        let cfg = params.config();
        let layout = params.layout();
        let mut slots = vec![0];
        let mut end = cfg.position_input_dim();
        for l in layout.mlp1.iter().chain(&layout.mlp2) {
            slots.push(end);
            end += l.outputs;
        }
        let max_width = layout
            .mlp1
            .iter()
            .chain(&layout.mlp2)
            .flat_map(|l| [l.inputs, l.outputs])
            .max()
            .unwrap_or(0);
        Self {
            flat: params.flat(),
            mlp1: &layout.mlp1,
            mlp2: &layout.mlp2,
            embed_rows: layout.embedding,
            embed_dim: layout.embed_dim,
            levels_pos: cfg.pe_levels_position,
            levels_dir: cfg.pe_levels_direction,
            mode: cfg.mode,
            dir_dim: cfg.direction_input_dim(),
            latent_dim: cfg.latent_dim,
            slots,
            trace_len: end,
            max_width,
        }
    }

    /// Number of values one sample's trace occupies.
    pub fn trace_len(&self) -> usize {
        self.trace_len
    }

    pub fn param_count(&self) -> usize {
        self.flat.len()
    }

    fn mlp1_out_slot(&self) -> usize {
        self.slots[self.mlp1.len()]
    }

    pub(crate) fn latent<'t>(&self, trace: &'t [f64]) -> &'t [f64] {
        let start = self.mlp1_out_slot() + 1;
        &trace[start..start + self.latent_dim]
    }

    pub fn ray_context(&self, d: Vec3, kind: ManipulationKind, p: f64) -> Result<RayContext> {
        check_unit_direction(d)?;
        if !p.is_finite() {
            return Err(Error::invalid(format!("intensity {p} is not finite")));
        }
        let mut enc_dir = Vec::with_capacity(self.dir_dim);
        encode_into(&d, self.levels_dir, &mut enc_dir);
        let row = self.embed_rows + kind.index() * self.embed_dim;
        let mut appearance = self.flat[row..row + self.embed_dim].to_vec();
        if self.mode == EmbeddingMode::Dia {
            appearance.push(p);
        }
        let first = self.mlp2[0];
        let app_col = self.dir_dim + self.latent_dim;
        let base = (0..first.outputs)
            .map(|o| {
                let w = &self.flat[first.weight + o * first.inputs..first.weight + (o + 1) * first.inputs];
                self.flat[first.bias + o] + dot(&w[..self.dir_dim], &enc_dir) + dot(&w[app_col..], &appearance)
            })
            .collect();
        Ok(RayContext {
            kind,
            enc_dir,
            appearance,
            base,
        })
    }

    /// Density only; `scratch` must hold `trace_len` values.
    pub fn density(&self, x: Vec3, scratch: &mut [f64]) -> f64 {
        self.forward_mlp1(x, scratch);
        softplus(scratch[self.mlp1_out_slot()])
    }

    fn forward_mlp1(&self, x: Vec3, trace: &mut [f64]) {
        encode_slice(&x, self.levels_pos, trace);
        let last = self.mlp1.len() - 1;
        for (l, layer) in self.mlp1.iter().enumerate() {
            let (head, tail) = trace.split_at_mut(self.slots[l + 1]);
            let input = &head[self.slots[l]..self.slots[l] + layer.inputs];
            dense_forward(self.flat, layer, input, &mut tail[..layer.outputs], l < last);
        }
    }

    /// Fills `trace` and returns `(sigma, color)`.
    pub fn forward(&self, ctx: &RayContext, x: Vec3, trace: &mut [f64]) -> (f64, [f64; 3]) {
        self.forward_mlp1(x, trace);
        let out1 = self.mlp1_out_slot();
        let sigma = softplus(trace[out1]);
        let n1 = self.mlp1.len();
        let last = self.mlp2.len() - 1;
        // first color layer: per-ray base plus the latent columns
        {
            let first = self.mlp2[0];
            let (head, tail) = trace.split_at_mut(self.slots[n1 + 1]);
            let z = &head[out1 + 1..out1 + 1 + self.latent_dim];
            for o in 0..first.outputs {
                let w0 = first.weight + o * first.inputs + self.dir_dim;
                let mut v = ctx.base[o] + dot(&self.flat[w0..w0 + self.latent_dim], z);
                if last > 0 && v < 0.0 {
                    v = 0.0;
                }
                tail[o] = v;
            }
        }
        for (l, layer) in self.mlp2.iter().enumerate().skip(1) {
            let (head, tail) = trace.split_at_mut(self.slots[n1 + l + 1]);
            let input = &head[self.slots[n1 + l]..self.slots[n1 + l] + layer.inputs];
            dense_forward(self.flat, layer, input, &mut tail[..layer.outputs], l < last);
        }
        let out2 = self.slots[n1 + self.mlp2.len()];
        let color = [sigmoid(trace[out2]), sigmoid(trace[out2 + 1]), sigmoid(trace[out2 + 2])];
        (sigma, color)
    }

    /// Length of the per-ray accumulator used by [`Self::backward`].
    pub fn context_grad_len(&self) -> usize {
        self.mlp2[0].outputs
    }

    /// Accumulates parameter gradients for one sample given upstream
    /// derivatives of the loss w.r.t. its density and color. Gradients of
    /// ray-constant first-layer inputs are summed into `ctx_grad` and must be
    /// flushed with [`Self::finish_ray`].
    pub fn backward(
        &self,
        trace: &[f64],
        d_sigma: f64,
        d_color: [f64; 3],
        grad: &mut [f64],
        ctx_grad: &mut [f64],
        scratch: &mut Scratch,
    ) {
        let n1 = self.mlp1.len();
        let n2 = self.mlp2.len();
        let Scratch { upper, lower } = scratch;
        upper.resize(self.max_width, 0.0);
        lower.resize(self.max_width, 0.0);

        let out2 = self.slots[n1 + n2];
        for c in 0..3 {
            let s = sigmoid(trace[out2 + c]);
            upper[c] = d_color[c] * s * (1.0 - s);
        }
        for l in (1..n2).rev() {
            let layer = self.mlp2[l];
            let input = &trace[self.slots[n1 + l]..self.slots[n1 + l] + layer.inputs];
            dense_backward(self.flat, &layer, input, &upper[..layer.outputs], grad, &mut lower[..layer.inputs], true);
            std::mem::swap(upper, lower);
        }
        // first color layer: latent columns here, constant columns deferred
        let first = self.mlp2[0];
        let out1 = self.mlp1_out_slot();
        let z = &trace[out1 + 1..out1 + 1 + self.latent_dim];
        lower[..self.latent_dim + 1].fill(0.0);
        for o in 0..first.outputs {
            let d = upper[o];
            if d == 0.0 {
                continue;
            }
            ctx_grad[o] += d;
            let w0 = first.weight + o * first.inputs + self.dir_dim;
            for k in 0..self.latent_dim {
                grad[w0 + k] += d * z[k];
                lower[1 + k] += d * self.flat[w0 + k];
            }
        }
        let s = sigmoid(trace[out1]);
        lower[0] = d_sigma * s;
        std::mem::swap(upper, lower);
        for l in (0..n1).rev() {
            let layer = self.mlp1[l];
            let input = &trace[self.slots[l]..self.slots[l] + layer.inputs];
            // the encoded position has no upstream parameters
            let propagate = l > 0;
            dense_backward(self.flat, &layer, input, &upper[..layer.outputs], grad, &mut lower[..layer.inputs], propagate);
            if propagate {
                std::mem::swap(upper, lower);
            }
        }
    }

    /// Flushes the per-ray first-layer accumulator into `grad`: bias,
    /// direction columns, appearance columns and the embedding row.
    pub fn finish_ray(&self, ctx: &RayContext, ctx_grad: &[f64], grad: &mut [f64]) {
        let first = self.mlp2[0];
        let app_col = self.dir_dim + self.latent_dim;
        let row = self.embed_rows + ctx.kind.index() * self.embed_dim;
        for (o, &d) in ctx_grad.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            grad[first.bias + o] += d;
            let w = first.weight + o * first.inputs;
            for (k, e) in ctx.enc_dir.iter().enumerate() {
                grad[w + k] += d * e;
            }
            for (k, a) in ctx.appearance.iter().enumerate() {
                grad[w + app_col + k] += d * a;
            }
            for k in 0..self.embed_dim {
                grad[row + k] += d * self.flat[w + app_col + k];
            }
        }
    }
}

/// Reusable delta buffers for [`Evaluator::backward`].
#[derive(Default, Clone, Debug)]
pub struct Scratch {
    upper: Vec<f64>,
    lower: Vec<f64>,
}

/// Four independent partial sums so the loop pipelines and vectorizes.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn dense_forward(flat: &[f64], layer: &DenseSpan, input: &[f64], out: &mut [f64], relu: bool) {
    for (o, slot) in out.iter_mut().enumerate() {
        let w = &flat[layer.weight + o * layer.inputs..layer.weight + (o + 1) * layer.inputs];
        let v = flat[layer.bias + o] + dot(w, input);
        *slot = if relu && v < 0.0 { 0.0 } else { v };
    }
}

/// Accumulates `dW += d (x) input`, `db += d`; when `propagate`, writes
/// `W^T d` masked by the ReLU that produced `input`.
#[inline]
fn dense_backward(
    flat: &[f64],
    layer: &DenseSpan,
    input: &[f64],
    d: &[f64],
    grad: &mut [f64],
    d_input: &mut [f64],
    propagate: bool,
) {
    if propagate {
        d_input.fill(0.0);
    }
    for (o, &g) in d.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        grad[layer.bias + o] += g;
        let start = layer.weight + o * layer.inputs;
        let gw = &mut grad[start..start + layer.inputs];
        for (gw, x) in gw.iter_mut().zip(input) {
            *gw += g * x;
        }
        if propagate {
            let w = &flat[start..start + layer.inputs];
            for (di, w) in d_input.iter_mut().zip(w) {
                *di += g * w;
            }
        }
    }
    if propagate {
        for (di, x) in d_input.iter_mut().zip(input) {
            if *x <= 0.0 {
                *di = 0.0;
            }
        }
    }
}
