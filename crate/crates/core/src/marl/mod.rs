//! Independent PPO with one actor and one critic shared by every agent.
//!
//! Each agent acts on its own observation; all agents' transitions are
//! pooled into a single batch for the update.

pub mod adam;
pub mod checkpoint;
pub mod gae;
pub mod nn;
pub mod policy;
pub mod ppo;
pub mod rollout;
mod train;

pub use adam::OptimizerState;
pub use checkpoint::{
    load_checkpoint, load_checkpoint_for, save_checkpoint, Checkpoint, CheckpointError, CheckpointMeta,
};
pub use gae::compute_gae;
pub use nn::{orthogonal_init, Dense, Mlp};
pub use policy::{entropy, log_prob, sample_and_logprob, PolicyParams, ACTION_DIM, ACTOR_HIDDEN, CRITIC_HIDDEN};
pub use ppo::{clip_grad_norm, ppo_loss, ppo_loss_and_grad, ppo_update, FlatBatch, LossCoefficients, LossStats};
pub use rollout::{collect_rollout, RolloutBatch, RolloutStats, VecEnv};
pub use train::{initial_params, train, CurveRow, TrainOutcome, CURVE_FILE, FINAL_CHECKPOINT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::EnvError;

#[derive(Debug, Error)]
pub enum MarlError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("environment {env} failed at rollout step {step}: {source}")]
    EnvFault {
        env: usize,
        step: usize,
        #[source]
        source: EnvError,
    },
    #[error("training fault: {0}")]
    TrainingFault(String),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub clip_range: f64,
    pub entropy_coef: f64,
    pub value_coef: f64,
    pub max_grad_norm: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub num_minibatches: usize,
    pub epochs: usize,
    pub num_envs: usize,
    pub rollout_length: usize,
    /// Environment steps (not agent steps) to collect in total.
    pub total_steps: u64,
    pub seed: u64,
    pub normalize_advantages: bool,
    /// Starting value of every log standard deviation entry.
    pub init_log_std: f64,
    /// Starting bias of every action-mean output.
    pub init_action_bias: f64,
    /// Write a checkpoint every this many updates; 0 keeps only the final one.
    pub checkpoint_interval: usize,
    /// Rollout worker threads; 0 uses the global pool.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 4e-4,
            clip_range: 0.2,
            entropy_coef: 0.01,
            value_coef: 0.5,
            max_grad_norm: 0.5,
            gamma: 0.997,
            gae_lambda: 0.95,
            num_minibatches: 256,
            epochs: 8,
            num_envs: 256,
            rollout_length: 128,
            total_steps: 5_000_000,
            seed: 0,
            normalize_advantages: true,
            init_log_std: 0.0,
            init_action_bias: 0.0,
            checkpoint_interval: 10,
            workers: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, num_agents: usize) -> Result<(), String> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(format!("train.gamma must be in (0, 1), got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return Err(format!("train.gae_lambda must be in [0, 1], got {}", self.gae_lambda));
        }
        for (name, v) in [
            ("learning_rate", self.learning_rate),
            ("clip_range", self.clip_range),
            ("max_grad_norm", self.max_grad_norm),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("train.{name} must be > 0, got {v}"));
            }
        }
        for (name, v) in [
            ("value_coef", self.value_coef),
            ("entropy_coef", self.entropy_coef),
            ("init_log_std", self.init_log_std),
            ("init_action_bias", self.init_action_bias),
        ] {
            if !v.is_finite() {
                return Err(format!("train.{name} must be finite, got {v}"));
            }
        }
        if self.num_envs == 0 || self.rollout_length == 0 || self.epochs == 0 || self.total_steps == 0 {
            return Err("train.num_envs, rollout_length, epochs and total_steps must be >= 1".into());
        }
        let batch = self.num_envs * self.rollout_length * num_agents;
        if self.num_minibatches == 0 || batch % self.num_minibatches != 0 {
            return Err(format!(
                "train.num_minibatches ({}) must divide num_envs * rollout_length * agents ({batch})",
                self.num_minibatches
            ));
        }
        Ok(())
    }

    pub fn steps_per_update(&self) -> u64 {
        (self.num_envs * self.rollout_length) as u64
    }

    pub fn num_updates(&self) -> u64 {
        self.total_steps.div_ceil(self.steps_per_update()).max(1)
    }
}
