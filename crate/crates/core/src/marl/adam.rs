//! Bias-corrected Adam over a flat parameter view.

use super::policy::PolicyParams;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl OptimizerState {
    pub fn new(num_params: usize) -> Self {
        Self {
            first_moment: vec![0.0; num_params],
            second_moment: vec![0.0; num_params],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// Updates the moments with `grad` and returns the parameter delta.
    pub fn step(&mut self, grad: &[f64], lr: f64) -> Vec<f64> {
        assert_eq!(grad.len(), self.first_moment.len(), "gradient length must match optimizer state");
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step as i32);
        let c2 = 1.0 - self.beta2.powi(self.step as i32);
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        grad.iter()
            .zip(self.first_moment.iter_mut().zip(self.second_moment.iter_mut()))
            .map(|(g, (m, v))| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                -lr * (*m / c1) / ((*v / c2).sqrt() + eps)
            })
            .collect()
    }

    /// Applies one update to `params` in place.
    pub fn apply(&mut self, params: &mut PolicyParams, grads: &PolicyParams, lr: f64) {
        let grad = grads.to_flat();
        let delta = self.step(&grad, lr);
        let mut offset = 0;
        for t in params.tensors_mut() {
            for (p, d) in t.iter_mut().zip(&delta[offset..]) {
                *p += d;
            }
            offset += t.len();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let mut s = OptimizerState::new(2);
        let d = s.step(&[3.0, -0.002], 4e-4);
        assert!((d[0] + 4e-4).abs() < 1e-10);
        assert!((d[1] - 4e-4).abs() < 1e-8);
    }

    #[test]
    fn zero_gradient_is_no_op() {
        let mut s = OptimizerState::new(3);
        assert!(s.step(&[0.0; 3], 1e-3).iter().all(|d| *d == 0.0));
    }

    #[test]
    fn scalar_trace_matches_reference() {
        // scalar Adam written out with explicit powers
        let mut s = OptimizerState::new(1);
        let (mut m, mut v, mut x, mut x_ref) = (0.0f64, 0.0f64, 0.5f64, 0.5f64);
        for t in 1..=100 {
            let g = 2.0 * x - 0.3 * (t as f64).sin();
            x += s.step(&[g], 0.01)[0];
            let g_ref = 2.0 * x_ref - 0.3 * (t as f64).sin();
            m = 0.9 * m + 0.1 * g_ref;
            v = 0.999 * v + 0.001 * g_ref * g_ref;
            let m_hat = m / (1.0 - 0.9f64.powf(t as f64));
            let v_hat = v / (1.0 - 0.999f64.powf(t as f64));
            x_ref -= 0.01 * m_hat / (v_hat.sqrt() + 1e-8);
            assert!((x - x_ref).abs() < 1e-10);
        }
    }
}
