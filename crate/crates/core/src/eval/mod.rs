//! Deterministic evaluation: single episodes, recovery rate, figure-eight
//! tracking and one-parameter generalization sweeps.
//!
//! Policies act with their mean action. Observation noise is off unless
//! [`EvalConfig::noisy_observations`] is set.

mod controller;
mod reference;

pub use controller::{Controller, MeanPolicy, TeleportOracle, ZeroThrust};
pub use reference::{figure_eight_target, figure_eight_velocity, ReferenceTrajectory};

use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{nominal_formation, DoneReason, EnvConfig, EnvError, PayloadEnv, StartKind};
use crate::reward::RewardBreakdown;
use crate::sim::{PhysicalParams, Vec3, WorldState};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("trial {trial}: {source}")]
    Env {
        trial: u64,
        #[source]
        source: EnvError,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Success rule and evaluation options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// m
    pub success_radius: f64,
    /// s the payload must stay inside the radius.
    pub hold_time: f64,
    /// s allowed for a recovery.
    pub timeout: f64,
    pub noisy_observations: bool,
    pub reference: ReferenceTrajectory,
    /// Figure-eight run length, s.
    pub reference_duration: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            success_radius: 0.1,
            hold_time: 1.0,
            timeout: 10.0,
            noisy_observations: false,
            reference: ReferenceTrajectory::default(),
            reference_duration: 12.0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("success_radius", self.success_radius),
            ("timeout", self.timeout),
            ("reference_duration", self.reference_duration),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("eval.{name} must be > 0, got {v}"));
            }
        }
        if !(self.hold_time >= 0.0) {
            return Err(format!("eval.hold_time must be >= 0, got {}", self.hold_time));
        }
        self.reference.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSource {
    Fixed,
    Reference(ReferenceTrajectory),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    /// Draw from the environment's reset distribution.
    Sampled,
    /// Level quads at rest above the payload at the target, motors spun up.
    Hover,
}

/// Stop once the payload has stayed within `radius` for `hold_steps`
/// consecutive steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessRule {
    pub radius: f64,
    pub hold_steps: u64,
}

/// Everything observed during one deterministic rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    /// Initial state followed by one snapshot per step.
    pub states: Vec<WorldState>,
    /// Target in force at each snapshot.
    pub targets: Vec<Vec3>,
    pub actions: Vec<Vec<[f64; 4]>>,
    pub commanded_thrust: Vec<Vec<[f64; 4]>>,
    pub applied_thrust: Vec<Vec<[f64; 4]>>,
    pub breakdowns: Vec<RewardBreakdown>,
    pub start: StartKind,
    pub reason: DoneReason,
    pub success: bool,
    /// Step at which the success rule was met.
    pub success_step: Option<u64>,
    /// Mean payload speed over the recorded steps, m/s.
    pub mean_payload_speed: f64,
}

impl EpisodeRecord {
    pub fn steps(&self) -> usize {
        self.actions.len()
    }
}

fn hover_start(env: &mut PayloadEnv) {
    let mut world = nominal_formation(&env.config, &env.params);
    let hover = env.params.hover_thrust_per_motor();
    for bank in world.motors.iter_mut() {
        bank.filtered_speed = std::array::from_fn(|j| hover.min(bank.thrust_cap[j]).sqrt());
    }
    env.state.world = world;
    env.state.start = StartKind::Nominal;
}

/// Runs one episode on RNG stream `stream` of `seed`.
///
/// Stops at termination, after `max_steps`, or when `success` is met.
#[allow(clippy::too_many_arguments)]
pub fn run_episode<C: Controller + ?Sized>(
    controller: &mut C,
    env_config: &EnvConfig,
    physics: &PhysicalParams,
    seed: u64,
    stream: u64,
    start: StartMode,
    target: TargetSource,
    max_steps: u64,
    success: Option<SuccessRule>,
) -> Result<EpisodeRecord, EvalError> {
    if let Some(d) = controller.obs_dim() {
        let expected = crate::env::agent_obs_dim(env_config.num_agents);
        if d != expected {
            return Err(EvalError::Usage(format!(
                "policy expects observations of width {d}, a team of {} produces {expected}",
                env_config.num_agents
            )));
        }
    }
    let (mut env, mut obs) = PayloadEnv::new(env_config.clone(), physics.clone(), seed, stream);
    let retarget = |env: &mut PayloadEnv| {
        if let TargetSource::Reference(r) = target {
            env.state.target = figure_eight_target(env.state.world.time, &r);
        }
    };
    if start == StartMode::Hover {
        hover_start(&mut env);
    }
    retarget(&mut env);
    if start == StartMode::Hover || matches!(target, TargetSource::Reference(_)) {
        obs = env.observe();
    }

    let mut rec = EpisodeRecord {
        states: vec![env.state.world.clone()],
        targets: vec![env.state.target],
        actions: Vec::new(),
        commanded_thrust: Vec::new(),
        applied_thrust: Vec::new(),
        breakdowns: Vec::new(),
        start: env.state.start,
        reason: DoneReason::None,
        success: false,
        success_step: None,
        mean_payload_speed: 0.0,
    };
    let mut inside = 0u64;
    let mut speed_sum = 0.0;
    for step in 1..=max_steps {
        controller.intervene(&mut env.state, &env.params);
        if controller.intervenes() {
            obs = env.observe();
        }
        let actions = controller.act(&obs);
        let res = env.step(&actions).map_err(|source| EvalError::Env { trial: stream, source })?;
        retarget(&mut env);
        obs = if matches!(target, TargetSource::Reference(_)) && !res.done {
            env.observe()
        } else {
            res.observations.clone()
        };
        speed_sum += res.world.payload.velocity.norm();
        rec.states.push(res.world.clone());
        rec.targets.push(env.state.target);
        rec.actions.push(actions);
        rec.commanded_thrust.push(res.commanded_thrust);
        rec.applied_thrust.push(res.applied_thrust);
        rec.breakdowns.push(res.breakdown);
        if let Some(rule) = success {
            if (env.state.target - res.world.payload.position).norm() <= rule.radius {
                inside += 1;
            } else {
                inside = 0;
            }
            if inside >= rule.hold_steps.max(1) && !res.done {
                rec.success = true;
                rec.success_step = Some(step);
                break;
            }
        }
        if res.done {
            rec.reason = res.reason;
            break;
        }
    }
    if rec.steps() > 0 {
        rec.mean_payload_speed = speed_sum / rec.steps() as f64;
    }
    Ok(rec)
}

/// Outcome of one recovery trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: u64,
    pub success: bool,
    /// s, when recovered.
    pub recovery_time: Option<f64>,
    pub mean_payload_speed: f64,
    pub reason: DoneReason,
    /// Payload distance to the target at the last recorded step, m.
    pub final_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub rate: f64,
    pub mean_speed: f64,
    pub trials: Vec<TrialResult>,
}

fn eval_env(env_config: &EnvConfig, eval: &EvalConfig) -> EnvConfig {
    let mut cfg = env_config.clone();
    if !eval.noisy_observations {
        cfg.observation_noise_std = 0.0;
    }
    cfg.target.randomization_enabled = false;
    cfg
}

/// Fraction of trials from the reset distribution in which the payload
/// reaches and holds the target region before the timeout. Trial `k` uses
/// stream `k` of `seed`; trials run in parallel and are reported in order.
pub fn recovery_rate<C: Controller + Clone + Send + Sync>(
    controller: &C,
    env_config: &EnvConfig,
    physics: &PhysicalParams,
    n_trials: u64,
    eval: &EvalConfig,
    seed: u64,
) -> Result<RecoveryReport, EvalError> {
    if n_trials == 0 {
        return Err(EvalError::Usage("n_trials must be >= 1".into()));
    }
    eval.validate().map_err(EvalError::Usage)?;
    let cfg = eval_env(env_config, eval);
    let dt = physics.dt;
    let rule = SuccessRule {
        radius: eval.success_radius,
        hold_steps: (eval.hold_time / dt).round() as u64,
    };
    let max_steps = ((eval.timeout / dt).round() as u64).min(cfg.episode_length);
    let trials: Vec<TrialResult> = (0..n_trials)
        .into_par_iter()
        .map(|k| {
            let mut c = controller.clone();
            let rec = run_episode(&mut c, &cfg, physics, seed, k, StartMode::Sampled, TargetSource::Fixed, max_steps, Some(rule))?;
            let last = rec.states.last().expect("initial state recorded");
            let target = rec.targets.last().expect("initial target recorded");
            Ok(TrialResult {
                trial: k,
                success: rec.success,
                recovery_time: rec.success_step.map(|s| s as f64 * dt),
                mean_payload_speed: rec.mean_payload_speed,
                reason: rec.reason,
                final_error: (target - last.payload.position).norm(),
            })
        })
        .collect::<Result<_, EvalError>>()?;
    let n = trials.len() as f64;
    Ok(RecoveryReport {
        rate: trials.iter().filter(|t| t.success).count() as f64 / n,
        mean_speed: trials.iter().map(|t| t.mean_payload_speed).sum::<f64>() / n,
        trials,
    })
}

/// Root-mean-square and maximum payload distance from the reference over
/// every recorded snapshot, m.
pub fn tracking_error(record: &EpisodeRecord, reference: &ReferenceTrajectory) -> (f64, f64) {
    let mut sq = 0.0;
    let mut max: f64 = 0.0;
    for s in &record.states {
        let e = (figure_eight_target(s.time, reference) - s.payload.position).norm();
        sq += e * e;
        max = max.max(e);
    }
    ((sq / record.states.len() as f64).sqrt(), max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingReport {
    pub rmse: f64,
    pub max_error: f64,
    pub duration: f64,
    pub steps: usize,
    pub reason: DoneReason,
}

/// Follows the figure-eight reference from a hover start.
pub fn figure_eight_eval<C: Controller + ?Sized>(
    controller: &mut C,
    env_config: &EnvConfig,
    physics: &PhysicalParams,
    eval: &EvalConfig,
    seed: u64,
) -> Result<(TrackingReport, EpisodeRecord), EvalError> {
    eval.validate().map_err(EvalError::Usage)?;
    let cfg = eval_env(env_config, eval);
    let steps = ((eval.reference_duration / physics.dt).round() as u64).min(cfg.episode_length);
    let rec = run_episode(
        controller,
        &cfg,
        physics,
        seed,
        0,
        StartMode::Hover,
        TargetSource::Reference(eval.reference),
        steps,
        None,
    )?;
    let (rmse, max_error) = tracking_error(&rec, &eval.reference);
    Ok((
        TrackingReport {
            rmse,
            max_error,
            duration: rec.steps() as f64 * physics.dt,
            steps: rec.steps(),
            reason: rec.reason,
        },
        rec,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    CableLength,
    PayloadMass,
    ObsNoise,
    Seed,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [SweepAxis::CableLength, SweepAxis::PayloadMass, SweepAxis::ObsNoise, SweepAxis::Seed];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::CableLength => "cable_length",
            SweepAxis::PayloadMass => "payload_mass",
            SweepAxis::ObsNoise => "obs_noise",
            SweepAxis::Seed => "seed",
        }
    }

    pub fn default_values(&self) -> Vec<f64> {
        match self {
            SweepAxis::CableLength => vec![0.2, 0.3, 0.4, 0.5],
            SweepAxis::PayloadMass => vec![0.005, 0.01, 0.015, 0.02],
            SweepAxis::ObsNoise => vec![0.0, 0.5, 1.0, 1.5, 2.0],
            SweepAxis::Seed => vec![0.0, 1.0, 2.0, 3.0, 4.0],
        }
    }
}

impl FromStr for SweepAxis {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SweepAxis::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            let names: Vec<&str> = SweepAxis::ALL.iter().map(|a| a.name()).collect();
            EvalError::Usage(format!("unknown sweep axis `{s}`; valid axes: {}", names.join(", ")))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub rate: f64,
    pub mean_speed: f64,
    pub n: u64,
}

/// One recovery-rate measurement per value, changing only `axis`.
#[allow(clippy::too_many_arguments)]
pub fn generalization_sweep<C: Controller + Clone + Send + Sync>(
    controller: &C,
    env_config: &EnvConfig,
    physics: &PhysicalParams,
    axis: SweepAxis,
    values: &[f64],
    n_trials: u64,
    eval: &EvalConfig,
    seed: u64,
) -> Result<Vec<SweepRow>, EvalError> {
    if values.is_empty() {
        return Err(EvalError::Usage("sweep needs at least one value".into()));
    }
    values
        .iter()
        .map(|&value| {
            let mut env = env_config.clone();
            let mut phys = physics.clone();
            let mut ev = eval.clone();
            let mut trial_seed = seed;
            match axis {
                SweepAxis::CableLength | SweepAxis::PayloadMass if !(value.is_finite() && value > 0.0) => {
                    return Err(EvalError::Usage(format!("{} must be > 0, got {value}", axis.name())));
                }
                SweepAxis::CableLength => phys.cable_length = value,
                SweepAxis::PayloadMass => phys.payload_mass = value,
                SweepAxis::ObsNoise => {
                    if !(value.is_finite() && value >= 0.0) {
                        return Err(EvalError::Usage(format!("obs_noise must be >= 0, got {value}")));
                    }
                    env.observation_noise_std = value;
                    ev.noisy_observations = true;
                }
                SweepAxis::Seed => {
                    if !(value >= 0.0 && value.fract() == 0.0) {
                        return Err(EvalError::Usage(format!("seed must be a non-negative integer, got {value}")));
                    }
                    trial_seed = value as u64;
                }
            }
            let report = recovery_rate(controller, &env, &phys, n_trials, &ev, trial_seed)?;
            Ok(SweepRow {
                axis,
                value,
                rate: report.rate,
                mean_speed: report.mean_speed,
                n: n_trials,
            })
        })
        .collect()
}

fn io(e: impl std::fmt::Display) -> EvalError {
    EvalError::Io(e.to_string())
}

/// Columns `axis,value,rate,mean_speed,n`; speed in m/s.
pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["axis", "value", "rate", "mean_speed", "n"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.axis.name().to_string(),
            r.value.to_string(),
            r.rate.to_string(),
            r.mean_speed.to_string(),
            r.n.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Columns `scope,index,success,recovery_time_s,mean_speed,final_error_m,terminal_reason`.
///
/// The first row has scope `summary`, `index` = trial count and `success` =
/// recovery rate. Then one `trial` row per trial with `success` 0 or 1 and an
/// empty recovery time when the trial failed.
pub fn write_recovery_csv<W: Write>(out: W, report: &RecoveryReport) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scope", "index", "success", "recovery_time_s", "mean_speed", "final_error_m", "terminal_reason"])
        .map_err(io)?;
    let mean_final = report.trials.iter().map(|t| t.final_error).sum::<f64>() / report.trials.len() as f64;
    w.write_record([
        "summary".to_string(),
        report.trials.len().to_string(),
        report.rate.to_string(),
        String::new(),
        report.mean_speed.to_string(),
        mean_final.to_string(),
        String::new(),
    ])
    .map_err(io)?;
    for t in &report.trials {
        w.write_record([
            "trial".to_string(),
            t.trial.to_string(),
            (t.success as u8).to_string(),
            t.recovery_time.map(|v| v.to_string()).unwrap_or_default(),
            t.mean_payload_speed.to_string(),
            t.final_error.to_string(),
            t.reason.as_str().to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Columns `rmse_m,max_error_m,duration_s,steps,terminal_reason`.
pub fn write_tracking_csv<W: Write>(out: W, report: &TrackingReport) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rmse_m", "max_error_m", "duration_s", "steps", "terminal_reason"]).map_err(io)?;
    w.write_record([
        report.rmse.to_string(),
        report.max_error.to_string(),
        report.duration.to_string(),
        report.steps.to_string(),
        report.reason.as_str().to_string(),
    ])
    .map_err(io)?;
    w.flush().map_err(io)
}
