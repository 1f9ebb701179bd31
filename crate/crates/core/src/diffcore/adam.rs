use serde::{Deserialize, Serialize};

use super::{DiffError, ParamSet, Scalar, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.98,
            eps: 1e-9,
        }
    }
}

/// Adam with bias-corrected moments:
/// `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub config: AdamConfig,
    step: u64,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig, params: &ParamSet<T>) -> Self {
        let zeros = || -> Vec<Tensor<T>> { params.iter().map(|(_, _, t)| Tensor::zeros(t.rows(), t.cols())).collect() };
        Adam {
            config,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, params: &mut ParamSet<T>, grads: &[Tensor<T>]) -> Result<(), DiffError> {
        if grads.len() != self.m.len() || params.len() != self.m.len() {
            return Err(DiffError::ShapeMismatch {
                op: "adam",
                left: (self.m.len(), 1),
                right: (grads.len(), 1),
            });
        }
        for ((p, _, t), g) in params.iter().zip(grads) {
            if t.shape() != g.shape() || self.m[p.0].shape() != g.shape() {
                return Err(DiffError::ShapeMismatch {
                    op: "adam",
                    left: t.shape(),
                    right: g.shape(),
                });
            }
        }
        self.step += 1;
        let c = &self.config;
        let (b1, b2) = (T::of(c.beta1), T::of(c.beta2));
        let (one_b1, one_b2) = (T::of(1.0 - c.beta1), T::of(1.0 - c.beta2));
        let corr1 = T::of(1.0 - c.beta1.powf(self.step as f64));
        let corr2 = T::of(1.0 - c.beta2.powf(self.step as f64));
        let (lr, eps) = (T::of(c.lr), T::of(c.eps));
        for ((p, m), (v, g)) in params.tensors_mut().zip(&mut self.m).zip(self.v.iter_mut().zip(grads)) {
            for (((pi, mi), vi), &gi) in p
                .data_mut()
                .iter_mut()
                .zip(m.data_mut())
                .zip(v.data_mut())
                .zip(g.data())
            {
                *mi = b1 * *mi + one_b1 * gi;
                *vi = b2 * *vi + one_b2 * gi * gi;
                let m_hat = *mi / corr1;
                let v_hat = *vi / corr2;
                *pi = *pi - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ParamSet<f64> {
        let mut p = ParamSet::new();
        p.add("a", Tensor::new(1, 3, vec![0.5, -1.0, 2.0]).unwrap()).unwrap();
        p.add("b", Tensor::new(2, 1, vec![3.0, 0.0]).unwrap()).unwrap();
        p
    }

    #[test]
    fn zero_gradients_leave_parameters() {
        let mut p = params();
        let before = p.clone();
        let mut adam = Adam::new(AdamConfig::default(), &p);
        let zeros = vec![Tensor::zeros(1, 3), Tensor::zeros(2, 1)];
        for _ in 0..5 {
            adam.step(&mut p, &zeros).unwrap();
        }
        assert_eq!(p, before);
    }

    #[test]
    fn first_step_is_lr_times_sign() {
        let mut p = params();
        let before = p.clone();
        let cfg = AdamConfig {
            lr: 1e-3,
            ..AdamConfig::default()
        };
        let mut adam = Adam::new(cfg, &p);
        let grads = vec![
            Tensor::new(1, 3, vec![0.2, -7.0, 1e-3]).unwrap(),
            Tensor::new(2, 1, vec![-0.5, 4.0]).unwrap(),
        ];
        adam.step(&mut p, &grads).unwrap();
        for ((id, _, t), g) in p.iter().zip(&grads) {
            for ((&after, &b), &gi) in t.data().iter().zip(before.get(id).data()).zip(g.data()) {
                let expect = -1e-3 * gi.signum();
                assert!(((after - b) - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn runs_are_deterministic() {
        let run = || {
            let mut p = params();
            let mut adam = Adam::new(AdamConfig::default(), &p);
            for k in 0..10 {
                let g = vec![
                    Tensor::from_fn(1, 3, |_, c| ((k * 3 + c) as f64).sin()),
                    Tensor::from_fn(2, 1, |r, _| ((k + r) as f64).cos()),
                ];
                adam.step(&mut p, &g).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mismatched_gradients_are_rejected() {
        let mut p = params();
        let mut adam = Adam::new(AdamConfig::default(), &p);
        assert!(adam.step(&mut p, &[Tensor::zeros(1, 3)]).is_err());
        assert!(adam.step(&mut p, &[Tensor::zeros(1, 3), Tensor::zeros(1, 2)]).is_err());
        assert_eq!(adam.steps_taken(), 0);
    }
}
