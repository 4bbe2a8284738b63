//! Command-line entry points: `train`, `eval` and `rollout`.
//!
//! A run config is a TOML file with a required `[train]` table and optional
//! `[env]`, `[physics]` and `[eval]` tables; every table rejects unknown keys.
//!
//! ```toml
//! [train]
//! num_envs = 8
//! rollout_length = 32
//! total_steps = 100_000
//!
//! [env]
//! num_agents = 2
//!
//! [physics]
//! cable_length = 0.3
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::env::{agent_obs_dim, EnvConfig};
use crate::eval::{
    figure_eight_eval, generalization_sweep, recovery_rate, run_episode, write_recovery_csv, write_sweep_csv,
    write_tracking_csv, EpisodeRecord, EvalConfig, MeanPolicy, StartMode, SweepAxis, TargetSource,
};
use crate::marl::{
    load_checkpoint, load_checkpoint_for, save_checkpoint, train, Checkpoint, CheckpointError, CheckpointMeta,
    PolicyParams, TrainConfig, TrainOutcome, CURVE_FILE, FINAL_CHECKPOINT,
};
use crate::reward::RewardBreakdown;
use crate::sim::PhysicalParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub train: TrainConfig,
    #[serde(default)]
    pub env: EnvConfig,
    #[serde(default)]
    pub physics: PhysicalParams,
    #[serde(default)]
    pub eval: EvalConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {}", e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("config {}", path.display()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.env.validate().map_err(anyhow::Error::msg)?;
        self.train.validate(self.env.num_agents).map_err(anyhow::Error::msg)?;
        self.physics.validate()?;
        self.eval.validate().map_err(anyhow::Error::msg)?;
        Ok(())
    }
}

/// Written before any other output of a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: u64,
    /// Seconds since the Unix epoch.
    pub start_time: u64,
    pub config_path: Option<PathBuf>,
    pub config: RunConfig,
    pub checkpoint: Option<PathBuf>,
    pub artifacts: Vec<PathBuf>,
}

impl RunManifest {
    fn new(command: &str, seed: u64, config_path: Option<&Path>, config: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            start_time: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            config_path: config_path.map(Path::to_path_buf),
            config: config.clone(),
            checkpoint: None,
            artifacts: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))
    }
}

pub fn save_policy(params: &PolicyParams, path: &Path) -> Result<(), CheckpointError> {
    save_checkpoint(
        path,
        &Checkpoint {
            params: params.clone(),
            optimizer: None,
            meta: CheckpointMeta::default(),
        },
    )
}

pub fn load_policy(path: &Path) -> Result<PolicyParams, CheckpointError> {
    Ok(load_checkpoint(path)?.params)
}

fn config_or_default(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig {
            train: TrainConfig::default(),
            env: EnvConfig::default(),
            physics: PhysicalParams::default(),
            eval: EvalConfig::default(),
        }),
    }
}

/// Trains from `config_path` into `out_dir`: manifest, learning curve,
/// periodic checkpoints and the final policy.
pub fn cmd_train(config_path: &Path, out_dir: &Path, seed: Option<u64>, progress: bool) -> anyhow::Result<TrainOutcome> {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(s) = seed {
        cfg.train.seed = s;
    }
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut manifest = RunManifest::new("train", cfg.train.seed, Some(config_path), &cfg);
    manifest.artifacts = vec![
        PathBuf::from(CURVE_FILE),
        PathBuf::from("checkpoints"),
        PathBuf::from(FINAL_CHECKPOINT),
    ];
    manifest.write(&out_dir.join("manifest_train.json"))?;
    let outcome = train(&cfg.train, &cfg.env, &cfg.physics, Some(out_dir), |row| {
        if progress {
            eprintln!(
                "update {:5}  steps {:10}  episodes {:4}  return {:10.3}  value_loss {:.4}  entropy {:.3}",
                row.update, row.env_steps, row.episodes, row.mean_return, row.value_loss, row.entropy
            );
        }
    })?;
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Recover,
    Fig8,
    Sweep(SweepAxis),
}

impl Scenario {
    pub fn valid_names() -> Vec<String> {
        let mut v = vec!["recover".to_string(), "fig8".to_string()];
        v.extend(SweepAxis::ALL.iter().map(|a| format!("sweep:{}", a.name())));
        v
    }

    pub fn file_stem(&self) -> String {
        match self {
            Scenario::Recover => "recover".into(),
            Scenario::Fig8 => "fig8".into(),
            Scenario::Sweep(a) => format!("sweep_{}", a.name()),
        }
    }
}

impl FromStr for Scenario {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parsed = match s {
            "recover" => Some(Scenario::Recover),
            "fig8" => Some(Scenario::Fig8),
            _ => s.strip_prefix("sweep:").and_then(|a| a.parse().ok()).map(Scenario::Sweep),
        };
        parsed.ok_or_else(|| {
            anyhow::anyhow!("usage error: unknown scenario `{s}`; valid scenarios: {}", Scenario::valid_names().join(", "))
        })
    }
}

/// Evaluates a checkpoint and writes `<out_dir>/<scenario>.csv`; returns
/// that path.
pub fn cmd_eval(
    checkpoint: &Path,
    scenario: &str,
    n_trials: u64,
    out_dir: &Path,
    config_path: Option<&Path>,
    seed: u64,
    values: Option<&[f64]>,
) -> anyhow::Result<PathBuf> {
    let scenario: Scenario = scenario.parse()?;
    let cfg = config_or_default(config_path)?;
    let ckpt = load_checkpoint_for(checkpoint, agent_obs_dim(cfg.env.num_agents))?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let csv_name = format!("{}.csv", scenario.file_stem());
    let mut manifest = RunManifest::new("eval", seed, config_path, &cfg);
    manifest.checkpoint = Some(checkpoint.to_path_buf());
    manifest.artifacts = vec![PathBuf::from(&csv_name)];
    manifest.write(&out_dir.join(format!("manifest_eval_{}.json", scenario.file_stem())))?;

    let policy = MeanPolicy::new(ckpt.params);
    let out_path = out_dir.join(&csv_name);
    let file = BufWriter::new(File::create(&out_path).with_context(|| format!("creating {}", out_path.display()))?);
    match scenario {
        Scenario::Recover => {
            let report = recovery_rate(&policy, &cfg.env, &cfg.physics, n_trials, &cfg.eval, seed)?;
            write_recovery_csv(file, &report)?;
        }
        Scenario::Fig8 => {
            let mut p = policy;
            let (report, _) = figure_eight_eval(&mut p, &cfg.env, &cfg.physics, &cfg.eval, seed)?;
            write_tracking_csv(file, &report)?;
        }
        Scenario::Sweep(axis) => {
            let vals = values.map(<[f64]>::to_vec).unwrap_or_else(|| axis.default_values());
            let rows = generalization_sweep(&policy, &cfg.env, &cfg.physics, axis, &vals, n_trials, &cfg.eval, seed)?;
            write_sweep_csv(file, &rows)?;
        }
    }
    Ok(out_path)
}

/// Header of the trajectory CSV for a team of `q`.
pub fn trajectory_header(q: usize) -> Vec<String> {
    let mut h: Vec<String> = ["step", "time"].iter().map(|s| s.to_string()).collect();
    for c in ["x", "y", "z"] {
        h.push(format!("target_{c}"));
    }
    for c in ["x", "y", "z"] {
        h.push(format!("payload_p{c}"));
    }
    for c in ["x", "y", "z"] {
        h.push(format!("payload_v{c}"));
    }
    for i in 0..q {
        for c in ["px", "py", "pz", "qw", "qx", "qy", "qz", "vx", "vy", "vz", "wx", "wy", "wz"] {
            h.push(format!("quad{i}_{c}"));
        }
        for j in 0..4 {
            h.push(format!("quad{i}_cmd{j}"));
        }
        for j in 0..4 {
            h.push(format!("quad{i}_thrust{j}"));
        }
    }
    h.extend(RewardBreakdown::FIELD_NAMES.iter().map(|f| format!("r_{f}")));
    h
}

/// One row per step: SI units, quaternions scalar-first, thrusts in N.
pub fn write_trajectory_csv<W: std::io::Write>(out: W, rec: &EpisodeRecord) -> anyhow::Result<()> {
    let q = rec.states[0].num_quads();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(q))?;
    for k in 0..rec.steps() {
        let s = &rec.states[k + 1];
        let t = &rec.targets[k + 1];
        let mut row: Vec<f64> = vec![s.time];
        row.extend(t.iter());
        row.extend(s.payload.position.iter());
        row.extend(s.payload.velocity.iter());
        for i in 0..q {
            let quad = &s.quads[i];
            let qt = quad.attitude.quaternion();
            row.extend(quad.position.iter());
            row.extend([qt.w, qt.i, qt.j, qt.k]);
            row.extend(quad.linear_velocity.iter());
            row.extend(quad.body_rates.iter());
            row.extend(rec.commanded_thrust[k][i]);
            row.extend(rec.applied_thrust[k][i]);
        }
        row.extend(rec.breakdowns[k].values());
        let mut fields = vec![s.step_count.to_string()];
        fields.extend(row.iter().map(|v| v.to_string()));
        w.write_record(fields)?;
    }
    w.flush()?;
    Ok(())
}

/// Rolls out the checkpoint's mean policy for one episode (or `steps`) and
/// writes the trajectory CSV to `out_path`.
pub fn cmd_rollout(
    checkpoint: &Path,
    config_path: Option<&Path>,
    seed: u64,
    out_path: &Path,
    steps: Option<u64>,
) -> anyhow::Result<EpisodeRecord> {
    let cfg = config_or_default(config_path)?;
    let ckpt = load_checkpoint_for(checkpoint, agent_obs_dim(cfg.env.num_agents))?;
    if let Some(dir) = out_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut manifest = RunManifest::new("rollout", seed, config_path, &cfg);
    manifest.checkpoint = Some(checkpoint.to_path_buf());
    manifest.artifacts = vec![out_path.to_path_buf()];
    let mut manifest_path = out_path.as_os_str().to_owned();
    manifest_path.push(".manifest.json");
    manifest.write(Path::new(&manifest_path))?;

    let mut env = cfg.env.clone();
    if !cfg.eval.noisy_observations {
        env.observation_noise_std = 0.0;
    }
    let max_steps = steps.unwrap_or(env.episode_length);
    let mut policy = MeanPolicy::new(ckpt.params);
    let rec = run_episode(&mut policy, &env, &cfg.physics, seed, 0, StartMode::Sampled, TargetSource::Fixed, max_steps, None)?;
    let file = BufWriter::new(File::create(out_path).with_context(|| format!("creating {}", out_path.display()))?);
    write_trajectory_csv(file, &rec)?;
    Ok(rec)
}

#[derive(Debug, Parser)]
#[command(name = "quadcable", version, about = "Cable-suspended payload transport with shared-parameter PPO")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a shared policy.
    Train(TrainArgs),
    /// Evaluate a checkpoint: recover, fig8 or sweep:<axis>.
    Eval(EvalArgs),
    /// Export one deterministic trajectory as CSV.
    Rollout(RolloutArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `train.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated sweep values; defaults depend on the axis.
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trajectory CSV path.
    #[arg(long)]
    pub out: PathBuf,
    /// Step budget; defaults to the episode length.
    #[arg(long)]
    pub steps: Option<u64>,
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train(a) => {
            let outcome = cmd_train(&a.config, &a.out, a.seed, !a.quiet)?;
            if outcome.curve.is_empty() {
                bail!("training produced no updates");
            }
            println!("wrote {} checkpoints to {}", outcome.checkpoints.len(), a.out.display());
        }
        Command::Eval(a) => {
            let path = cmd_eval(
                &a.checkpoint,
                &a.scenario,
                a.trials,
                &a.out,
                a.config.as_deref(),
                a.seed,
                a.values.as_deref(),
            )?;
            println!("wrote {}", path.display());
        }
        Command::Rollout(a) => {
            let rec = cmd_rollout(&a.checkpoint, a.config.as_deref(), a.seed, &a.out, a.steps)?;
            println!("wrote {} steps to {} ({})", rec.steps(), a.out.display(), rec.reason.as_str());
        }
    }
    Ok(())
}
