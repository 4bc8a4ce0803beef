use std::f64::consts::PI;

/// Length of `positional_encode` output for a `dim`-vector at `levels` frequencies.
pub const fn encoded_len(dim: usize, levels: usize) -> usize {
    dim * (2 * levels + 1)
}

/// `[v, sin(2^0 pi v), cos(2^0 pi v), ..., sin(2^(L-1) pi v), cos(2^(L-1) pi v)]`,
/// where each sin/cos block covers every component of `v`. Values agree
/// with direct evaluation to within a few ulps per level.
pub fn positional_encode(v: &[f64], levels: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(encoded_len(v.len(), levels));
    encode_into(v, levels, &mut out);
    out
}

/// Writes the encoding of `v` into the first `encoded_len` slots of `out`.
/// Higher levels come from the double-angle identities, so only the first
/// level calls `sin`/`cos`.
pub(crate) fn encode_slice(v: &[f64], levels: usize, out: &mut [f64]) {
    let n = v.len();
    out[..n].copy_from_slice(v);
    if levels == 0 {
        return;
    }
    for (i, x) in v.iter().enumerate() {
        out[n + i] = (PI * x).sin();
        out[2 * n + i] = (PI * x).cos();
    }
    for l in 1..levels {
        let prev = n * (1 + 2 * (l - 1));
        let base = n * (1 + 2 * l);
        for i in 0..n {
            let (s, c) = (out[prev + i], out[prev + n + i]);
            out[base + i] = 2.0 * s * c;
            out[base + n + i] = (c - s) * (c + s);
        }
    }
}

pub(crate) fn encode_into(v: &[f64], levels: usize, out: &mut Vec<f64>) {
    out.clear();
    out.resize(encoded_len(v.len(), levels), 0.0);
    encode_slice(v, levels, out);
}
