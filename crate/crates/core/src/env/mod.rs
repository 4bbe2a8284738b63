//! Decentralized payload-transport environment built on [`crate::sim`].
//!
//! One call to [`env_step`] maps actions to thrust commands, runs the motor
//! lag, draws disturbances, advances the physics by one step, checks
//! termination, scores the transition and emits the next per-agent
//! observations.

mod config;
pub mod observation;
mod randomization;

pub use config::{Bounds, DisturbanceConfig, DrConfig, EnvConfig, InitConfig, NoiseScaling, TargetConfig};
pub use observation::{
    add_observation_noise, agent_obs_dim, agent_view, build_agent_observation, build_global_observation,
    global_obs_dim, noise_scale_vector,
};
pub use randomization::{
    apply_random_disturbances, apply_rpm_jump, nominal_formation, random_unit, sample_domain_randomization,
    sample_initial_state, sample_target_update, StartKind,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::reward::{reward_total, RewardBreakdown, RewardError, SafetyFlags};
use crate::sim::{check_collision, motor_lag_step, step_dynamics, PhysicalParams, SimError, Vec3, WorldState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Reward(#[from] RewardError),
    #[error("usage error: {0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DoneReason {
    None,
    Collision,
    OutOfBounds,
    Timeout,
}

impl DoneReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DoneReason::None => "none",
            DoneReason::Collision => "collision",
            DoneReason::OutOfBounds => "out_of_bounds",
            DoneReason::Timeout => "timeout",
        }
    }
}

/// Everything that evolves during an episode besides the RNG.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub world: WorldState,
    pub target: Vec3,
    pub prev_actions: Vec<[f64; 4]>,
    pub start: StartKind,
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observations: Vec<Vec<f64>>,
    pub reward: f64,
    pub breakdown: RewardBreakdown,
    pub done: bool,
    pub reason: DoneReason,
    pub commanded_thrust: Vec<[f64; 4]>,
    pub applied_thrust: Vec<[f64; 4]>,
    pub world: WorldState,
}

/// `f_cmd = (a + 1) / 2 · f_max`, after clipping `a` to `[-1, 1]`.
pub fn map_action(action: &[f64; 4], thrust_cap: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|j| 0.5 * (action[j].clamp(-1.0, 1.0) + 1.0) * thrust_cap[j])
}

/// Action whose mapped command equals `thrust` on every motor.
pub fn action_for_thrust(thrust: f64, thrust_cap: &[f64; 4]) -> [f64; 4] {
    std::array::from_fn(|j| (2.0 * thrust / thrust_cap[j] - 1.0).clamp(-1.0, 1.0))
}

pub fn out_of_bounds(world: &WorldState, config: &EnvConfig) -> bool {
    !config.bounds.contains(&world.payload.position)
        || world.quads.iter().any(|q| !config.bounds.contains(&q.position))
}

/// Collision beats out-of-bounds beats timeout.
pub fn check_termination(world: &WorldState, config: &EnvConfig, collided: bool) -> (bool, DoneReason) {
    if collided {
        (true, DoneReason::Collision)
    } else if out_of_bounds(world, config) {
        (true, DoneReason::OutOfBounds)
    } else if world.step_count >= config.episode_length {
        (true, DoneReason::Timeout)
    } else {
        (false, DoneReason::None)
    }
}

fn observe<R: Rng + ?Sized>(state: &EnvState, config: &EnvConfig, rng: &mut R) -> Vec<Vec<f64>> {
    let q = config.num_agents;
    let global = build_global_observation(&state.world, &state.target, &state.prev_actions);
    let global = if config.observation_noise_std > 0.0 {
        let scale = noise_scale_vector(&config.noise_scaling, q);
        add_observation_noise(&global, config.observation_noise_std, &scale, rng)
    } else {
        global
    };
    (0..q).map(|i| agent_view(&global, i, q)).collect()
}

/// Samples a fresh episode: actuator limits, initial state and the lagged
/// motor state (near hover when airborne, zero on the ground).
pub fn reset<R: Rng + ?Sized>(
    rng: &mut R,
    config: &EnvConfig,
    params: &PhysicalParams,
) -> (EnvState, Vec<Vec<f64>>) {
    let motors = sample_domain_randomization(rng, &config.dr, config.num_agents);
    let (mut world, start) = sample_initial_state(rng, config, params);
    world.motors = motors;
    let hover = params.hover_thrust_per_motor();
    for bank in world.motors.iter_mut() {
        for j in 0..4 {
            bank.filtered_speed[j] = if start == StartKind::Ground {
                0.0
            } else {
                let cap = bank.speed_cap(j);
                let noise: f64 = rng.sample(rand_distr::StandardNormal);
                (hover.min(bank.thrust_cap[j]).sqrt()
                    + config.dr.reset_filtered_state_perturbation_std * noise)
                    .clamp(0.0, cap)
            };
        }
    }
    let prev_actions = world.motors.iter().map(|m| action_for_thrust(hover, &m.thrust_cap)).collect();
    let state = EnvState {
        world,
        target: Vec3::from(config.target_position),
        prev_actions,
        start,
        terminal: false,
    };
    let obs = observe(&state, config, rng);
    (state, obs)
}

/// Advances `state` by one control step.
pub fn env_step<R: Rng + ?Sized>(
    state: &mut EnvState,
    joint_action: &[[f64; 4]],
    rng: &mut R,
    config: &EnvConfig,
    params: &PhysicalParams,
) -> Result<StepResult, EnvError> {
    if state.terminal {
        return Err(EnvError::Usage("step called on a terminal state; reset first".into()));
    }
    let q = state.world.num_quads();
    if joint_action.len() != q {
        return Err(EnvError::Usage(format!("expected {q} actions, got {}", joint_action.len())));
    }
    let actions: Vec<[f64; 4]> = joint_action
        .iter()
        .map(|a| std::array::from_fn(|j| a[j].clamp(-1.0, 1.0)))
        .collect();

    let mut world = state.world.clone();
    apply_rpm_jump(rng, &mut world.motors, &config.dr);
    let mut commanded = Vec::with_capacity(q);
    let mut applied = Vec::with_capacity(q);
    for (bank, a) in world.motors.iter_mut().zip(&actions) {
        let f_cmd = map_action(a, &bank.thrust_cap);
        let (next, f) = motor_lag_step(bank, &f_cmd, params.dt)?;
        *bank = next;
        commanded.push(f_cmd);
        applied.push(f);
    }
    let pushes = apply_random_disturbances(rng, &config.disturbance, &world);
    let world = step_dynamics(&world, &applied, &pushes, params)?;

    let collided = check_collision(&world, config.reward.min_separation, params);
    let (done, reason) = check_termination(&world, config, collided);
    let flags = SafetyFlags {
        collision: collided,
        out_of_bounds: out_of_bounds(&world, config),
    };
    let breakdown = reward_total(
        &world,
        &state.target,
        &actions,
        &state.prev_actions,
        flags,
        params.cable_length,
        &config.reward,
    )?;

    state.target = sample_target_update(rng, &state.target, &Vec3::from(config.target_position), &config.target);
    state.world = world;
    state.prev_actions = actions;
    state.terminal = done;
    let observations = observe(state, config, rng);
    Ok(StepResult {
        observations,
        reward: breakdown.total,
        breakdown,
        done,
        reason,
        commanded_thrust: commanded,
        applied_thrust: applied,
        world: state.world.clone(),
    })
}

/// An environment instance owning its RNG stream.
#[derive(Debug, Clone)]
pub struct PayloadEnv {
    pub config: EnvConfig,
    pub params: PhysicalParams,
    pub state: EnvState,
    rng: ChaCha8Rng,
}

impl PayloadEnv {
    /// Creates and resets an environment on RNG stream `stream` of `seed`.
    pub fn new(config: EnvConfig, params: PhysicalParams, seed: u64, stream: u64) -> (Self, Vec<Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let (state, obs) = reset(&mut rng, &config, &params);
        (
            Self {
                config,
                params,
                state,
                rng,
            },
            obs,
        )
    }

    pub fn reset(&mut self) -> Vec<Vec<f64>> {
        let (state, obs) = reset(&mut self.rng, &self.config, &self.params);
        self.state = state;
        obs
    }

    pub fn step(&mut self, joint_action: &[[f64; 4]]) -> Result<StepResult, EnvError> {
        env_step(&mut self.state, joint_action, &mut self.rng, &self.config, &self.params)
    }

    /// Rebuilds observations for the current state (draws fresh noise).
    pub fn observe(&mut self) -> Vec<Vec<f64>> {
        observe(&self.state, &self.config, &mut self.rng)
    }

    pub fn obs_dim(&self) -> usize {
        agent_obs_dim(self.config.num_agents)
    }
}
