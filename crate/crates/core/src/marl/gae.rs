//! Generalized advantage estimation over one agent's rollout segment.

/// Advantages and returns for a segment of `T` steps.
///
/// `dones[t]` marks that the episode ended after step `t`; `bootstrap` is
/// the value of the observation following the last step.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(values.len() == n && dones.len() == n, "GAE inputs must be aligned");
    let mut advantages = vec![0.0; n];
    let mut running = 0.0;
    for t in (0..n).rev() {
        let next_value = if t + 1 < n { values[t + 1] } else { bootstrap };
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        running = delta + gamma * lambda * live * running;
        advantages[t] = running;
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    (advantages, returns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zeros_give_zero_advantages() {
        let (a, r) = compute_gae(&[0.0; 6], &[0.0; 6], &[false; 6], 0.0, 0.997, 0.95);
        assert!(a.iter().chain(&r).all(|v| *v == 0.0));
    }

    #[test]
    fn single_step_is_td_residual() {
        let (a, r) = compute_gae(&[1.5], &[0.4], &[false], 2.0, 0.997, 0.95);
        assert!((a[0] - (1.5 + 0.997 * 2.0 - 0.4)).abs() < 1e-15);
        assert!((r[0] - (1.5 + 0.997 * 2.0)).abs() < 1e-15);
        let (a, _) = compute_gae(&[1.5], &[0.4], &[true], 2.0, 0.997, 0.95);
        assert!((a[0] - 1.1).abs() < 1e-15);
    }

    #[test]
    fn lambda_one_no_dones_is_discounted_return_minus_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let r: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..20).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (a, _) = compute_gae(&r, &v, &[false; 20], 0.3, 0.9, 1.0);
        for t in 0..20 {
            let mut g = 0.9f64.powi((20 - t) as i32) * 0.3;
            for k in t..20 {
                g += 0.9f64.powi((k - t) as i32) * r[k];
            }
            assert!((a[t] - (g - v[t])).abs() < 1e-12);
        }
    }
}
