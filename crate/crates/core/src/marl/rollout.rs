//! Synchronous vectorized collection with a shared parameter snapshot.

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::gae::compute_gae;
use super::policy::{sample_and_logprob, PolicyParams, ACTION_DIM};
use super::ppo::FlatBatch;
use super::MarlError;
use crate::env::{DoneReason, EnvConfig, EnvError, PayloadEnv, StepResult};
use crate::sim::PhysicalParams;

const ACTION_STREAM: u64 = u64::MAX;

/// `N` environments, each on its own RNG stream of one seed, plus a
/// separate stream for action sampling. Results do not depend on how many
/// threads step the environments.
#[derive(Debug, Clone)]
pub struct VecEnv {
    pub envs: Vec<PayloadEnv>,
    /// Current observation per environment and agent.
    pub observations: Vec<Vec<Vec<f64>>>,
    episode_return: Vec<f64>,
    episode_length: Vec<u64>,
    action_rng: ChaCha8Rng,
}

impl VecEnv {
    pub fn new(config: &EnvConfig, params: &PhysicalParams, num_envs: usize, seed: u64) -> Self {
        let (envs, observations): (Vec<_>, Vec<_>) = (0..num_envs)
            .map(|e| PayloadEnv::new(config.clone(), params.clone(), seed, e as u64))
            .unzip();
        let mut action_rng = ChaCha8Rng::seed_from_u64(seed);
        action_rng.set_stream(ACTION_STREAM);
        Self {
            envs,
            observations,
            episode_return: vec![0.0; num_envs],
            episode_length: vec![0; num_envs],
            action_rng,
        }
    }

    pub fn num_envs(&self) -> usize {
        self.envs.len()
    }

    pub fn num_agents(&self) -> usize {
        self.envs.first().map(|e| e.config.num_agents).unwrap_or(0)
    }

    fn observation_matrix(&self, obs_dim: usize) -> Array2<f64> {
        let rows = self.num_envs() * self.num_agents();
        let flat: Vec<f64> = self.observations.iter().flatten().flatten().copied().collect();
        Array2::from_shape_vec((rows, obs_dim), flat).expect("observation width matches policy")
    }
}

/// Per-transition storage for one collection phase, indexed
/// `(step, env, agent)` in that nesting order.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutBatch {
    pub num_envs: usize,
    pub rollout_length: usize,
    pub num_agents: usize,
    pub observations: Array2<f64>,
    pub actions: Array2<f64>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    /// Shared team reward, indexed `(step, env)`.
    pub rewards: Vec<f64>,
    /// Episode ended after this step, indexed `(step, env)`.
    pub dones: Vec<bool>,
    /// Value of the final observation when an episode hit its time limit,
    /// zero otherwise; indexed like `values`.
    pub truncation_values: Vec<f64>,
    /// Value of the observation after the last step, indexed `(env, agent)`.
    pub bootstrap_values: Vec<f64>,
}

impl RolloutBatch {
    pub fn index(&self, step: usize, env: usize, agent: usize) -> usize {
        (step * self.num_envs + env) * self.num_agents + agent
    }

    /// GAE per `(env, agent)` stream, pooled into one training batch.
    /// Time-limit endings are bootstrapped through `truncation_values`.
    pub fn flatten(&self, gamma: f64, lambda: f64) -> FlatBatch {
        let (n, t_len, q) = (self.num_envs, self.rollout_length, self.num_agents);
        let total = n * t_len * q;
        let mut advantages = vec![0.0; total];
        let mut returns = vec![0.0; total];
        let mut r = vec![0.0; t_len];
        let mut v = vec![0.0; t_len];
        let mut d = vec![false; t_len];
        for e in 0..n {
            for a in 0..q {
                for t in 0..t_len {
                    let i = self.index(t, e, a);
                    r[t] = self.rewards[t * n + e] + gamma * self.truncation_values[i];
                    v[t] = self.values[i];
                    d[t] = self.dones[t * n + e];
                }
                let (adv, ret) = compute_gae(&r, &v, &d, self.bootstrap_values[e * q + a], gamma, lambda);
                for t in 0..t_len {
                    let i = self.index(t, e, a);
                    advantages[i] = adv[t];
                    returns[i] = ret[t];
                }
            }
        }
        FlatBatch {
            observations: self.observations.clone(),
            actions: self.actions.clone(),
            log_probs: self.log_probs.clone(),
            advantages,
            returns,
        }
    }
}

/// Episode bookkeeping from one collection phase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RolloutStats {
    pub episode_returns: Vec<f64>,
    pub episode_lengths: Vec<u64>,
    pub collisions: usize,
    pub out_of_bounds: usize,
    pub timeouts: usize,
    /// Mean of every reward sub-term over all transitions.
    pub breakdown_mean: [f64; 16],
}

struct Outcome {
    result: StepResult,
    /// Observations to act on next: the reset observations after an ending.
    next: Vec<Vec<f64>>,
}

fn step_one(env: &mut PayloadEnv, actions: &[[f64; 4]]) -> Result<Outcome, EnvError> {
    let result = env.step(actions)?;
    let next = if result.done { env.reset() } else { result.observations.clone() };
    Ok(Outcome { result, next })
}

/// Runs `rollout_length` steps in every environment with actions sampled
/// from `params`, resetting finished episodes in place.
pub fn collect_rollout(
    params: &PolicyParams,
    vec_env: &mut VecEnv,
    rollout_length: usize,
) -> Result<(RolloutBatch, RolloutStats), MarlError> {
    let n = vec_env.num_envs();
    let q = vec_env.num_agents();
    let d = params.obs_dim();
    let rows = n * q;
    let total = rows * rollout_length;
    let log_std = params.log_std.as_slice().expect("standard layout").to_vec();

    let mut observations = Array2::<f64>::zeros((total, d));
    let mut actions = Array2::<f64>::zeros((total, ACTION_DIM));
    let mut log_probs = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(total);
    let mut rewards = Vec::with_capacity(rollout_length * n);
    let mut dones = Vec::with_capacity(rollout_length * n);
    let mut truncation_values = vec![0.0; total];
    let mut stats = RolloutStats::default();

    for t in 0..rollout_length {
        let obs = vec_env.observation_matrix(d);
        let mean = params.actor_forward(obs.view());
        let value = params.critic_forward(obs.view());
        let base = t * rows;
        observations.slice_mut(ndarray::s![base..base + rows, ..]).assign(&obs);
        let mut joint: Vec<[f64; 4]> = Vec::with_capacity(rows);
        for r in 0..rows {
            let (a, lp) = sample_and_logprob(
                mean.row(r).as_slice().expect("standard layout"),
                &log_std,
                false,
                &mut vec_env.action_rng,
            );
            for j in 0..ACTION_DIM {
                actions[[base + r, j]] = a[j];
            }
            joint.push([a[0], a[1], a[2], a[3]]);
            log_probs.push(lp);
            values.push(value[r]);
        }

        let outcomes: Vec<Result<Outcome, EnvError>> = vec_env
            .envs
            .par_iter_mut()
            .zip(joint.par_chunks(q))
            .map(|(env, acts)| step_one(env, acts))
            .collect();

        let mut truncated: Vec<(usize, Vec<Vec<f64>>)> = Vec::new();
        for (e, outcome) in outcomes.into_iter().enumerate() {
            let outcome = outcome.map_err(|source| MarlError::EnvFault { env: e, step: t, source })?;
            let res = &outcome.result;
            rewards.push(res.reward);
            dones.push(res.done);
            for (s, v) in stats.breakdown_mean.iter_mut().zip(res.breakdown.values()) {
                *s += v;
            }
            vec_env.episode_return[e] += res.reward;
            vec_env.episode_length[e] += 1;
            if res.done {
                stats.episode_returns.push(vec_env.episode_return[e]);
                stats.episode_lengths.push(vec_env.episode_length[e]);
                vec_env.episode_return[e] = 0.0;
                vec_env.episode_length[e] = 0;
                match res.reason {
                    DoneReason::Collision => stats.collisions += 1,
                    DoneReason::OutOfBounds => stats.out_of_bounds += 1,
                    DoneReason::Timeout => {
                        stats.timeouts += 1;
                        truncated.push((e, outcome.result.observations));
                    }
                    DoneReason::None => {}
                }
            }
            vec_env.observations[e] = outcome.next;
        }
        if !truncated.is_empty() {
            let flat: Vec<f64> = truncated.iter().flat_map(|(_, o)| o.iter().flatten().copied()).collect();
            let tv = params.critic_forward(
                Array2::from_shape_vec((truncated.len() * q, d), flat)
                    .expect("observation width matches policy")
                    .view(),
            );
            for (k, (e, _)) in truncated.iter().enumerate() {
                for a in 0..q {
                    truncation_values[base + e * q + a] = tv[k * q + a];
                }
            }
        }
    }
    let steps = (rollout_length * n) as f64;
    stats.breakdown_mean.iter_mut().for_each(|s| *s /= steps);

    let bootstrap: Array1<f64> = params.critic_forward(vec_env.observation_matrix(d).view());
    Ok((
        RolloutBatch {
            num_envs: n,
            rollout_length,
            num_agents: q,
            observations,
            actions,
            log_probs,
            values,
            rewards,
            dones,
            truncation_values,
            bootstrap_values: bootstrap.to_vec(),
        },
        stats,
    ))
}
