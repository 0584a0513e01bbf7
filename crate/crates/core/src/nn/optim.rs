use crate::Real;

use super::{Mlp, NnError};

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub step: u64,
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    pub m: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Real> AdamState<T> {
    pub fn new(num_params: usize, lr: T) -> Self {
        Self {
            step: 0,
            lr,
            beta1: T::lit(0.9),
            beta2: T::lit(0.999),
            eps: T::lit(1e-8),
            m: vec![T::zero(); num_params],
            v: vec![T::zero(); num_params],
        }
    }
}

pub fn adam_step<T: Real>(params: &mut [T], grads: &[T], adam: &mut AdamState<T>) -> Result<(), NnError> {
    if params.len() != grads.len() || params.len() != adam.m.len() {
        return Err(NnError::Shape(format!(
            "{} params, {} grads, {} moment slots",
            params.len(),
            grads.len(),
            adam.m.len()
        )));
    }
    adam.step += 1;
    let t = adam.step as i32;
    let one = T::one();
    let c1 = one - adam.beta1.powi(t);
    let c2 = one - adam.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        adam.m[i] = adam.beta1 * adam.m[i] + (one - adam.beta1) * g;
        adam.v[i] = adam.beta2 * adam.v[i] + (one - adam.beta2) * g * g;
        let m_hat = adam.m[i] / c1;
        let v_hat = adam.v[i] / c2;
        params[i] -= adam.lr * m_hat / (v_hat.sqrt() + adam.eps);
    }
    Ok(())
}

/// `target ← polyak·target + (1 − polyak)·online`.
pub fn polyak_update<T: Real>(target: &mut Mlp<T>, online: &Mlp<T>, polyak: T) -> Result<(), NnError> {
    if target.spec() != online.spec() {
        return Err(NnError::Shape("target and online networks differ in shape".into()));
    }
    let keep = polyak;
    let take = T::one() - polyak;
    for (t, &o) in target.params_mut().iter_mut().zip(online.params()) {
        *t = keep * *t + take * o;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, MlpSpec};

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![1.0, -2.0];
        let mut adam = AdamState::new(2, 1e-3);
        adam_step(&mut p, &[0.0, 0.0], &mut adam).unwrap();
        assert_eq!(p, vec![1.0, -2.0]);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m̂ = g, v̂ = g², so the step is lr·g/(|g| + eps).
        let mut p = vec![0.0f64];
        let mut adam = AdamState::new(1, 0.01);
        adam_step(&mut p, &[3.0], &mut adam).unwrap();
        let expected = -0.01 * 3.0 / (3.0 + 1e-8);
        assert!((p[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn two_steps_match_hand_accumulators() {
        let mut p = vec![0.0f64];
        let mut adam = AdamState::<f64>::new(1, 0.1);
        adam_step(&mut p, &[2.0], &mut adam).unwrap();
        adam_step(&mut p, &[2.0], &mut adam).unwrap();
        // m1 = 0.2, m2 = 0.9·0.2 + 0.1·2 = 0.38; v1 = 0.004, v2 = 0.999·0.004 + 0.001·4 = 0.007996
        assert!((adam.m[0] - 0.38).abs() < 1e-15);
        assert!((adam.v[0] - 0.007996).abs() < 1e-15);
        let step2 = 0.1 * (0.38 / (1.0 - 0.81)) / ((0.007996f64 / (1.0 - 0.999f64.powi(2))).sqrt() + 1e-8);
        let step1 = 0.1 * 2.0 / (2.0 + 1e-8);
        assert!((p[0] + step1 + step2).abs() < 1e-14);
    }

    fn scalar_net(w: f64) -> Mlp<f64> {
        let spec = MlpSpec {
            input_width: 1,
            hidden: vec![1],
            output_width: 1,
            hidden_activation: Activation::Relu,
            output_activation: Activation::Identity,
        };
        Mlp::from_params(spec, vec![w; 4]).unwrap()
    }

    #[test]
    fn polyak_cases() {
        let mut t = scalar_net(2.0);
        polyak_update(&mut t, &scalar_net(4.0), 0.5).unwrap();
        assert_eq!(t.params(), &[3.0; 4]);
        polyak_update(&mut t, &scalar_net(4.0), 0.0).unwrap();
        assert_eq!(t.params(), &[4.0; 4]);
        polyak_update(&mut t, &scalar_net(4.0), 0.995).unwrap();
        assert_eq!(t.params(), &[4.0; 4]);
    }
}
