use serde::{Deserialize, Serialize};

use crate::reward::RewardConstants;

/// Axis-aligned box the quads and payload must stay inside, m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Default for Bounds {
    fn default() -> Self {
        Self {
            min: [-3.0, -3.0, -0.02],
            max: [3.0, 3.0, 4.0],
        }
    }
}

impl Bounds {
    pub fn contains(&self, p: &crate::sim::Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

/// Per-block observation noise scales (the diagonal of Λ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseScaling {
    pub position: f64,
    pub velocity: f64,
    pub rotation: f64,
    pub body_rate: f64,
    pub action: f64,
}

impl Default for NoiseScaling {
    fn default() -> Self {
        Self {
            position: 0.002,
            velocity: 0.01,
            rotation: 0.01,
            body_rate: 0.05,
            action: 0.0,
        }
    }
}

/// Actuator randomization drawn once per episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrConfig {
    /// Quad-level base thrust cap, uniform range, N.
    pub base_thrust_range: [f64; 2],
    /// Std of the independent per-motor offset, N.
    pub motor_offset_std: f64,
    pub thrust_clip: [f64; 2],
    /// Lag time constant, uniform range, s.
    pub tau_range: [f64; 2],
    /// Std of the reset perturbation of the filtered speed proxy, √N.
    pub reset_filtered_state_perturbation_std: f64,
    pub rpm_jump_enabled: bool,
    /// Chance per step that one motor's speed proxy jumps.
    pub rpm_jump_probability: f64,
    /// Largest jump as a fraction of that motor's speed cap.
    pub rpm_jump_max_fraction: f64,
}

impl Default for DrConfig {
    fn default() -> Self {
        Self {
            base_thrust_range: [0.105, 0.15],
            motor_offset_std: 0.008,
            thrust_clip: [0.095, 0.16],
            tau_range: [0.004, 0.05],
            reset_filtered_state_perturbation_std: 0.01,
            rpm_jump_enabled: true,
            rpm_jump_probability: 0.002,
            rpm_jump_max_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisturbanceConfig {
    /// N
    pub quad_force_max: f64,
    /// N·m
    pub quad_torque_max: f64,
    /// N
    pub payload_force_max: f64,
    pub per_step_probability: f64,
    /// Weight of the body z axis in the quad push direction.
    pub z_bias_weight: f64,
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        Self {
            quad_force_max: 0.05,
            quad_torque_max: 0.03,
            payload_force_max: 5.0,
            per_step_probability: 0.01,
            z_bias_weight: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetConfig {
    pub randomization_enabled: bool,
    /// Half-width of the box around the nominal target, m.
    pub box_half_extent: f64,
    /// Chance per step of drawing a new target.
    pub per_step_probability: f64,
}

impl Default for TargetConfig {
    fn default() -> Self {
        Self {
            randomization_enabled: false,
            box_half_extent: 0.5,
            per_step_probability: 0.001,
        }
    }
}

/// Reset distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitConfig {
    /// Chance of a grounded start with slack cables.
    pub ground_start_probability: f64,
    /// Half-width of the payload placement box around the target, m.
    pub payload_offset: f64,
    /// Inner radius of the quad placement shell as a fraction of cable length.
    pub shell_min_fraction: f64,
    /// Largest angle of a quad from straight above the payload, rad.
    pub max_polar_angle: f64,
    /// rad
    pub max_tilt: f64,
    /// m/s
    pub max_speed: f64,
    /// rad/s
    pub max_body_rate: f64,
    pub max_attempts: usize,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            ground_start_probability: 0.2,
            payload_offset: 0.5,
            shell_min_fraction: 0.7,
            max_polar_angle: 1.2,
            max_tilt: std::f64::consts::FRAC_PI_3,
            max_speed: 1.0,
            max_body_rate: 2.0,
            max_attempts: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub num_agents: usize,
    pub target_position: [f64; 3],
    pub episode_length: u64,
    pub bounds: Bounds,
    pub observation_noise_std: f64,
    pub noise_scaling: NoiseScaling,
    pub dr: DrConfig,
    pub disturbance: DisturbanceConfig,
    pub target: TargetConfig,
    pub init: InitConfig,
    pub reward: RewardConstants,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            num_agents: 2,
            target_position: [0.0, 0.0, 1.5],
            episode_length: 3072,
            bounds: Bounds::default(),
            observation_noise_std: 1.0,
            noise_scaling: NoiseScaling::default(),
            dr: DrConfig::default(),
            disturbance: DisturbanceConfig::default(),
            target: TargetConfig::default(),
            init: InitConfig::default(),
            reward: RewardConstants::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.num_agents < 1 {
            return Err("env.num_agents must be >= 1".into());
        }
        if self.episode_length < 1 {
            return Err("env.episode_length must be >= 1".into());
        }
        if !(self.observation_noise_std >= 0.0) {
            return Err("env.observation_noise_std must be >= 0".into());
        }
        if (0..3).any(|k| !(self.bounds.min[k] < self.bounds.max[k])) {
            return Err("env.bounds must be a non-empty box".into());
        }
        let ordered = |name: &str, r: [f64; 2]| {
            if r[0] <= r[1] {
                Ok(())
            } else {
                Err(format!("env.dr.{name} must be ordered, got {r:?}"))
            }
        };
        ordered("base_thrust_range", self.dr.base_thrust_range)?;
        ordered("thrust_clip", self.dr.thrust_clip)?;
        ordered("tau_range", self.dr.tau_range)?;
        if self.dr.thrust_clip[0] > self.dr.base_thrust_range[0] || self.dr.thrust_clip[1] < self.dr.base_thrust_range[1] {
            return Err("env.dr.thrust_clip must contain base_thrust_range".into());
        }
        if !(self.dr.tau_range[0] > 0.0 && self.dr.thrust_clip[0] > 0.0) {
            return Err("env.dr: tau and thrust caps must be > 0".into());
        }
        let d = &self.disturbance;
        if [d.quad_force_max, d.quad_torque_max, d.payload_force_max].iter().any(|v| !(*v >= 0.0)) {
            return Err("env.disturbance maxima must be >= 0".into());
        }
        for (name, p) in [
            ("disturbance.per_step_probability", d.per_step_probability),
            ("target.per_step_probability", self.target.per_step_probability),
            ("init.ground_start_probability", self.init.ground_start_probability),
            ("dr.rpm_jump_probability", self.dr.rpm_jump_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("env.{name} must be in [0, 1], got {p}"));
            }
        }
        self.reward.validate()
    }
}
