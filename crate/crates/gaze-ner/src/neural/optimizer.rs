//! Plain SGD with global-norm gradient clipping, one sentence per update.

use super::tensor::{Gradients, ParamId, ParamSet};
use super::NeuralError;

/// Zeroes the buffers of frozen parameters so they neither move nor count
/// toward the clipping norm.
pub fn apply_freeze(grads: &mut Gradients, frozen: &[ParamId]) {
    for &id in frozen {
        grads.get_mut(id).fill(0.0);
    }
}

/// Scales the whole gradient to `clip` when its global norm exceeds it, then
/// applies `theta -= lr * g`. Non-finite gradients are fatal (divergence).
pub fn sgd_step(
    params: &mut ParamSet,
    grads: &Gradients,
    learning_rate: f64,
    clip: f64,
) -> Result<(), NeuralError> {
    let norm = grads.global_norm();
    if !norm.is_finite() {
        return Err(NeuralError::NonFiniteGradient);
    }
    let scale = if norm > clip { clip / norm } else { 1.0 };
    let step = learning_rate * scale;
    for id in params.ids().collect::<Vec<_>>() {
        let buf = grads.get(id);
        for (theta, g) in params.get_mut(id).data.iter_mut().zip(buf) {
            *theta -= step * g;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::tensor::Tensor;

    #[test]
    fn clip_scales_gradient() {
        let mut params = ParamSet::new();
        let a = params.register("a", Tensor::vector(vec![0.0, 0.0]));
        let mut grads = Gradients::zeros_like(&params);
        grads.get_mut(a)[0] = 6.0;
        grads.get_mut(a)[1] = 8.0; // norm 10
        sgd_step(&mut params, &grads, 1.0, 5.0).unwrap();
        // scaled by 0.5: effective gradient (3, 4)
        assert_eq!(params.get(a).data, vec![-3.0, -4.0]);
    }

    #[test]
    fn zero_learning_rate_is_identity() {
        let mut params = ParamSet::new();
        let a = params.register("a", Tensor::vector(vec![1.5]));
        let mut grads = Gradients::zeros_like(&params);
        grads.get_mut(a)[0] = 100.0;
        sgd_step(&mut params, &grads, 0.0, f64::INFINITY).unwrap();
        assert_eq!(params.get(a).data, vec![1.5]);
    }

    #[test]
    fn scalar_update() {
        let mut params = ParamSet::new();
        let a = params.register("a", Tensor::vector(vec![1.0]));
        let mut grads = Gradients::zeros_like(&params);
        grads.get_mut(a)[0] = 2.0;
        sgd_step(&mut params, &grads, 0.1, f64::INFINITY).unwrap();
        assert!((params.get(a).data[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_is_fatal() {
        let mut params = ParamSet::new();
        let a = params.register("a", Tensor::vector(vec![1.0]));
        let mut grads = Gradients::zeros_like(&params);
        grads.get_mut(a)[0] = f64::NAN;
        assert!(matches!(
            sgd_step(&mut params, &grads, 0.1, 5.0),
            Err(NeuralError::NonFiniteGradient)
        ));
    }

    #[test]
    fn frozen_params_do_not_move() {
        let mut params = ParamSet::new();
        let a = params.register("a", Tensor::vector(vec![1.0]));
        let b = params.register("b", Tensor::vector(vec![1.0]));
        let mut grads = Gradients::zeros_like(&params);
        grads.get_mut(a)[0] = 1.0;
        grads.get_mut(b)[0] = 1.0;
        apply_freeze(&mut grads, &[a]);
        sgd_step(&mut params, &grads, 0.5, f64::INFINITY).unwrap();
        assert_eq!(params.get(a).data, vec![1.0]);
        assert_eq!(params.get(b).data, vec![0.5]);
    }
}
