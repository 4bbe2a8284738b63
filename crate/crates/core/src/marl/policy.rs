//! Shared actor-critic parameters and the diagonal Gaussian policy.

use std::f64::consts::{E, PI};

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use super::nn::Mlp;

pub const ACTION_DIM: usize = 4;
pub const ACTOR_HIDDEN: [usize; 3] = [64, 64, 64];
pub const CRITIC_HIDDEN: [usize; 3] = [128, 128, 128];

const HIDDEN_GAIN: f64 = std::f64::consts::SQRT_2;
const MEAN_HEAD_GAIN: f64 = 0.01;
const VALUE_HEAD_GAIN: f64 = 1.0;

/// One actor, one critic and a state-independent log standard deviation,
/// shared by every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    pub actor: Mlp,
    pub log_std: Array1<f64>,
    pub critic: Mlp,
}

impl PolicyParams {
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, rng: &mut R) -> Self {
        Self::with_widths(obs_dim, &ACTOR_HIDDEN, &CRITIC_HIDDEN, rng)
    }

    /// Same construction with other hidden widths (small nets for checks).
    pub fn with_widths<R: Rng + ?Sized>(obs_dim: usize, actor: &[usize], critic: &[usize], rng: &mut R) -> Self {
        Self {
            actor: Mlp::new(obs_dim, actor, ACTION_DIM, HIDDEN_GAIN, MEAN_HEAD_GAIN, rng),
            log_std: Array1::zeros(ACTION_DIM),
            critic: Mlp::new(obs_dim, critic, 1, HIDDEN_GAIN, VALUE_HEAD_GAIN, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            actor: self.actor.zeros_like(),
            log_std: Array1::zeros(self.log_std.len()),
            critic: self.critic.zeros_like(),
        }
    }

    pub fn obs_dim(&self) -> usize {
        self.actor.inputs()
    }

    pub fn num_params(&self) -> usize {
        self.actor.num_params() + self.log_std.len() + self.critic.num_params()
    }

    /// Actor tensors, log_std, critic tensors.
    pub fn tensors(&self) -> impl Iterator<Item = &[f64]> {
        self.actor
            .tensors()
            .chain(std::iter::once(self.log_std.as_slice().expect("standard layout")))
            .chain(self.critic.tensors())
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut [f64]> {
        self.actor
            .tensors_mut()
            .chain(std::iter::once(self.log_std.as_slice_mut().expect("standard layout")))
            .chain(self.critic.tensors_mut())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().flatten().copied().collect()
    }

    pub fn with_flat(&self, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), self.num_params(), "flat parameter length");
        let mut out = self.clone();
        let mut offset = 0;
        for t in out.tensors_mut() {
            t.copy_from_slice(&flat[offset..offset + t.len()]);
            offset += t.len();
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().flatten().all(|v| v.is_finite())
    }

    /// Action means, one row per observation row.
    pub fn actor_forward(&self, obs: ArrayView2<f64>) -> Array2<f64> {
        self.actor.forward(obs)
    }

    /// State values, one per observation row.
    pub fn critic_forward(&self, obs: ArrayView2<f64>) -> Array1<f64> {
        self.critic.forward(obs).column(0).to_owned()
    }

    pub fn std(&self) -> Array1<f64> {
        self.log_std.mapv(f64::exp)
    }
}

/// `Σ_j [-log σ_j - ½ log 2π - ½ ((a_j - μ_j) / σ_j)²]`.
pub fn log_prob(action: &[f64], mean: &[f64], log_std: &[f64]) -> f64 {
    action
        .iter()
        .zip(mean)
        .zip(log_std)
        .map(|((a, m), ls)| {
            let z = (a - m) / ls.exp();
            -ls - 0.5 * (2.0 * PI).ln() - 0.5 * z * z
        })
        .sum()
}

/// Differential entropy of the diagonal Gaussian.
pub fn entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 * (2.0 * PI * E).ln()).sum()
}

/// Draws `mean + σ ⊙ η`, or returns the mean when `deterministic`.
pub fn sample_and_logprob<R: Rng + ?Sized>(
    mean: &[f64],
    log_std: &[f64],
    deterministic: bool,
    rng: &mut R,
) -> (Vec<f64>, f64) {
    let action: Vec<f64> = if deterministic {
        mean.to_vec()
    } else {
        mean.iter()
            .zip(log_std)
            .map(|(m, ls)| m + ls.exp() * rng.sample::<f64, _>(StandardNormal))
            .collect()
    };
    let lp = log_prob(&action, mean, log_std);
    (action, lp)
}
