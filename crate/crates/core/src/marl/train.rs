use std::fs::File;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::checkpoint::{save_checkpoint, Checkpoint, CheckpointMeta};
use super::ppo::ppo_update;
use super::rollout::{collect_rollout, VecEnv};
use super::{MarlError, OptimizerState, PolicyParams, TrainConfig};
use crate::env::{agent_obs_dim, EnvConfig};
use crate::reward::RewardBreakdown;
use crate::sim::PhysicalParams;

pub const CURVE_FILE: &str = "learning_curve.csv";
pub const FINAL_CHECKPOINT: &str = "policy_final.qcp";

const INIT_STREAM: u64 = u64::MAX - 1;
const SHUFFLE_STREAM: u64 = u64::MAX - 2;

/// One learning-curve row.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub update: u64,
    pub env_steps: u64,
    pub episodes: usize,
    /// Mean return of episodes that ended during this update; NaN if none.
    pub mean_return: f64,
    pub mean_length: f64,
    pub collisions: usize,
    pub out_of_bounds: usize,
    pub timeouts: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    pub grad_norm: f64,
    pub breakdown_mean: [f64; 16],
}

impl CurveRow {
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = [
            "update",
            "env_steps",
            "episodes",
            "mean_return",
            "mean_length",
            "collisions",
            "out_of_bounds",
            "timeouts",
            "policy_loss",
            "value_loss",
            "entropy",
            "approx_kl",
            "clip_fraction",
            "grad_norm",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        h.extend(RewardBreakdown::FIELD_NAMES.iter().map(|f| format!("r_{f}")));
        h
    }

    pub fn record(&self) -> Vec<String> {
        let mut r = vec![
            self.update.to_string(),
            self.env_steps.to_string(),
            self.episodes.to_string(),
            self.mean_return.to_string(),
            self.mean_length.to_string(),
            self.collisions.to_string(),
            self.out_of_bounds.to_string(),
            self.timeouts.to_string(),
            self.policy_loss.to_string(),
            self.value_loss.to_string(),
            self.entropy.to_string(),
            self.approx_kl.to_string(),
            self.clip_fraction.to_string(),
            self.grad_norm.to_string(),
        ];
        r.extend(self.breakdown_mean.iter().map(|v| v.to_string()));
        r
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: PolicyParams,
    pub optimizer: OptimizerState,
    pub curve: Vec<CurveRow>,
    pub checkpoints: Vec<PathBuf>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> MarlError {
    MarlError::Io(format!("{}: {e}", path.display()))
}

/// Starting parameters for a run: orthogonal init from the run seed, then the
/// configured log std and action-mean bias.
pub fn initial_params(config: &TrainConfig, num_agents: usize) -> PolicyParams {
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_rng.set_stream(INIT_STREAM);
    let mut params = PolicyParams::new(agent_obs_dim(num_agents), &mut init_rng);
    params.log_std.fill(config.init_log_std);
    if let Some(head) = params.actor.layers.last_mut() {
        head.bias.fill(config.init_action_bias);
    }
    params
}

/// Full training run. With `out_dir`, writes the learning curve and
/// checkpoints there. `on_update` sees every curve row as it is produced.
pub fn train(
    config: &TrainConfig,
    env_config: &EnvConfig,
    physics: &PhysicalParams,
    out_dir: Option<&Path>,
    mut on_update: impl FnMut(&CurveRow),
) -> Result<TrainOutcome, MarlError> {
    let q = env_config.num_agents;
    config.validate(q).map_err(MarlError::Usage)?;
    env_config.validate().map_err(MarlError::Usage)?;
    physics.validate().map_err(|e| MarlError::Usage(e.to_string()))?;

    let pool = if config.workers > 0 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.workers)
                .build()
                .map_err(|e| MarlError::Usage(format!("cannot build worker pool: {e}")))?,
        )
    } else {
        None
    };

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    shuffle_rng.set_stream(SHUFFLE_STREAM);
    let mut params = initial_params(config, q);
    let mut optimizer = OptimizerState::new(params.num_params());
    let mut vec_env = VecEnv::new(env_config, physics, config.num_envs, config.seed);

    let mut writer = match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir.join("checkpoints")).map_err(|e| io_err(dir, e))?;
            let path = dir.join(CURVE_FILE);
            let file = File::create(&path).map_err(|e| io_err(&path, e))?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record(CurveRow::header()).map_err(|e| io_err(&path, e))?;
            Some((w, path))
        }
        None => None,
    };

    let mut curve = Vec::new();
    let mut checkpoints = Vec::new();
    let updates = config.num_updates();
    let mut env_steps = 0u64;
    for update in 1..=updates {
        let collected = match &pool {
            Some(p) => p.install(|| collect_rollout(&params, &mut vec_env, config.rollout_length)),
            None => collect_rollout(&params, &mut vec_env, config.rollout_length),
        };
        let (batch, stats) = collected?;
        env_steps += config.steps_per_update();
        let flat = batch.flatten(config.gamma, config.gae_lambda);
        let upd = ppo_update(&mut params, &mut optimizer, &flat, config, &mut shuffle_rng)?;

        let episodes = stats.episode_returns.len();
        let mean = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
        let lengths: Vec<f64> = stats.episode_lengths.iter().map(|&l| l as f64).collect();
        let row = CurveRow {
            update,
            env_steps,
            episodes,
            mean_return: mean(&stats.episode_returns),
            mean_length: mean(&lengths),
            collisions: stats.collisions,
            out_of_bounds: stats.out_of_bounds,
            timeouts: stats.timeouts,
            policy_loss: upd.loss.policy,
            value_loss: upd.loss.value,
            entropy: upd.loss.entropy,
            approx_kl: upd.loss.approx_kl,
            clip_fraction: upd.loss.clip_fraction,
            grad_norm: upd.grad_norm,
            breakdown_mean: stats.breakdown_mean,
        };
        if let Some((w, path)) = writer.as_mut() {
            w.write_record(row.record()).map_err(|e| io_err(path, e))?;
            w.flush().map_err(|e| io_err(path, e))?;
        }
        on_update(&row);
        curve.push(row);

        if let Some(dir) = out_dir {
            let meta = CheckpointMeta {
                update,
                env_steps,
                seed: config.seed,
            };
            let periodic = config.checkpoint_interval > 0 && update % config.checkpoint_interval as u64 == 0;
            let last = update == updates;
            if periodic || last {
                let ckpt = Checkpoint {
                    params: params.clone(),
                    optimizer: Some(optimizer.clone()),
                    meta,
                };
                let path = if last {
                    dir.join(FINAL_CHECKPOINT)
                } else {
                    dir.join("checkpoints").join(format!("update_{update:05}.qcp"))
                };
                save_checkpoint(&path, &ckpt)?;
                checkpoints.push(path);
            }
        }
    }
    Ok(TrainOutcome {
        params,
        optimizer,
        curve,
        checkpoints,
    })
}
