use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Moment estimates of the Adam optimizer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            t: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(
    params: &mut [f64],
    state: &mut AdamState,
    grad: &[f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    if params.len() != grad.len() || state.m.len() != grad.len() || state.v.len() != grad.len() {
        return Err(Error::invalid(format!(
            "Adam shapes disagree: params {}, grad {}, m {}, v {}",
            params.len(),
            grad.len(),
            state.m.len(),
            state.v.len()
        )));
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - beta1.powi(t);
    let c2 = 1.0 - beta2.powi(t);
    for i in 0..params.len() {
        let g = grad[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![0.5, -1.0];
        let mut s = AdamState::new(2);
        adam_step(&mut p, &mut s, &[0.0, 0.0], 0.1, 0.9, 0.999, 1e-8).unwrap();
        assert_eq!(p, vec![0.5, -1.0]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_hand_computed() {
        // m = 0.1, v = 0.001; corrected both to 1 -> step lr / (1 + eps)
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        adam_step(&mut p, &mut s, &[1.0], 0.1, 0.9, 0.999, 1e-8).unwrap();
        assert!((p[0] + 0.1 / (1.0 + 1e-8)).abs() < 1e-12);
        assert!((p[0] + 0.1).abs() < 1e-8);
    }

    #[test]
    fn second_step_hand_computed() {
        let mut p = vec![0.0];
        let mut s = AdamState::new(1);
        adam_step(&mut p, &mut s, &[1.0], 0.1, 0.9, 0.999, 1e-8).unwrap();
        adam_step(&mut p, &mut s, &[-2.0], 0.1, 0.9, 0.999, 1e-8).unwrap();
        let m: f64 = 0.9 * 0.1 + 0.1 * -2.0;
        let v: f64 = 0.999 * 0.001 + 0.001 * 4.0;
        let step = 0.1 * (m / (1.0 - 0.81)) / ((v / (1.0 - 0.999f64 * 0.999)).sqrt() + 1e-8);
        assert!((p[0] - (-0.1 / (1.0 + 1e-8) - step)).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_shape_checked() {
        let g = [0.3, -0.2, 0.7];
        let run = || {
            let mut p = vec![1.0, 2.0, 3.0];
            let mut s = AdamState::new(3);
            adam_step(&mut p, &mut s, &g, 0.01, 0.9, 0.999, 1e-8).unwrap();
            (p, s)
        };
        assert_eq!(run(), run());
        let mut p = vec![0.0; 2];
        assert!(adam_step(&mut p, &mut AdamState::new(2), &g, 0.1, 0.9, 0.999, 1e-8).is_err());
    }
}
