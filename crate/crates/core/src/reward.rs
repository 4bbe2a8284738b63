//! Shared team reward: `total = track · stable + safe`.
//!
//! Each sub-term is computed separately and kept in a [`RewardBreakdown`] so
//! training logs and trajectory exports can show what drives the scalar.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{tilt_angle, Vec3, WorldState};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("reward term `{term}` is not finite ({value})")]
pub struct RewardError {
    pub term: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConstants {
    /// Rate of the exponential shaping function.
    pub shaping_rate: f64,
    /// Floor of the distance gate on allowed speed.
    pub gate_floor: f64,
    /// Alignment sharpness per metre of payload error.
    pub align_gain: f64,
    /// Upper bound on alignment sharpness.
    pub align_cap: f64,
    /// Exponent of the soft speed wall.
    pub speed_wall_exponent: f64,
    /// Payload speed allowance relative to the quads.
    pub swing_factor: f64,
    pub collision_penalty: f64,
    pub out_of_bounds_penalty: f64,
    /// Sharpness of the command saturation barrier.
    pub barrier_sharpness: f64,
    /// m
    pub min_separation: f64,
    /// m
    pub safe_separation: f64,
    pub yaw_weight: f64,
    pub upright_weight: f64,
    pub smoothness_weight: f64,
    /// m/s
    pub max_speed: f64,
    pub direction_epsilon: f64,
}

impl Default for RewardConstants {
    fn default() -> Self {
        Self {
            shaping_rate: 2.0,
            gate_floor: 0.02,
            align_gain: 40.0,
            align_cap: 2.0,
            speed_wall_exponent: 8.0,
            swing_factor: 0.75,
            collision_penalty: 10.0,
            out_of_bounds_penalty: 10.0,
            barrier_sharpness: 50.0,
            min_separation: 0.15,
            safe_separation: 0.18,
            yaw_weight: 10.0,
            upright_weight: 5.0,
            smoothness_weight: 10.0,
            max_speed: 1.5,
            direction_epsilon: 1e-6,
        }
    }
}

impl RewardConstants {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.safe_separation > self.min_separation && self.min_separation > 0.0) {
            return Err("reward: need safe_separation > min_separation > 0".into());
        }
        if !(self.max_speed > 0.0) {
            return Err("reward: max_speed must be > 0".into());
        }
        let positive = [
            ("shaping_rate", self.shaping_rate),
            ("gate_floor", self.gate_floor),
            ("align_gain", self.align_gain),
            ("align_cap", self.align_cap),
            ("speed_wall_exponent", self.speed_wall_exponent),
            ("swing_factor", self.swing_factor),
            ("barrier_sharpness", self.barrier_sharpness),
            ("direction_epsilon", self.direction_epsilon),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("reward: {name} must be > 0, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SafetyFlags {
    pub collision: bool,
    pub out_of_bounds: bool,
}

/// Every reward sub-term plus the composite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub position: f64,
    pub direction: f64,
    pub track: f64,
    pub payload_speed: f64,
    pub quad_speed: f64,
    pub yaw: f64,
    pub upright: f64,
    pub taut: f64,
    pub stable: f64,
    pub separation: f64,
    pub collision: f64,
    pub out_of_bounds: f64,
    pub smoothness: f64,
    pub energy: f64,
    pub safe: f64,
    pub total: f64,
}

impl RewardBreakdown {
    pub const FIELD_NAMES: [&'static str; 16] = [
        "position",
        "direction",
        "track",
        "payload_speed",
        "quad_speed",
        "yaw",
        "upright",
        "taut",
        "stable",
        "separation",
        "collision",
        "out_of_bounds",
        "smoothness",
        "energy",
        "safe",
        "total",
    ];

    pub fn values(&self) -> [f64; 16] {
        [
            self.position,
            self.direction,
            self.track,
            self.payload_speed,
            self.quad_speed,
            self.yaw,
            self.upright,
            self.taut,
            self.stable,
            self.separation,
            self.collision,
            self.out_of_bounds,
            self.smoothness,
            self.energy,
            self.safe,
            self.total,
        ]
    }
}

/// `exp(-s·|x|)`.
pub fn shaping_phi(s: f64, x: f64) -> f64 {
    (-s * x.abs()).exp()
}

/// `min(3d, 1) + floor`: shrinks the speed allowance near the target.
pub fn distance_gate(d: f64, floor: f64) -> f64 {
    (3.0 * d).min(1.0) + floor
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackTerms {
    pub track: f64,
    pub position: f64,
    pub direction: f64,
}

/// Tracking reward from the payload error `target - p` and payload velocity.
pub fn reward_track(error: &Vec3, payload_velocity: &Vec3, k: &RewardConstants) -> TrackTerms {
    let d = error.norm();
    let position = shaping_phi(k.shaping_rate, d);
    let v_dir = payload_velocity / (payload_velocity.norm() + k.direction_epsilon);
    let e_dir = error / (d + k.direction_epsilon);
    let sharpness = (k.align_gain * d).min(k.align_cap);
    let direction = shaping_phi(sharpness, 1.0 - v_dir.dot(&e_dir));
    TrackTerms {
        track: 0.5 * (position + direction),
        position,
        direction,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableTerms {
    pub stable: f64,
    pub payload_speed: f64,
    pub quad_speed: f64,
    pub yaw: f64,
    pub upright: f64,
    pub taut: f64,
}

fn speed_wall(speed: f64, limit: f64, exponent: f64) -> f64 {
    (-(speed / limit).powf(exponent)).exp()
}

pub fn reward_stable(world: &WorldState, error: &Vec3, cable_length: f64, k: &RewardConstants) -> StableTerms {
    let gate = distance_gate(error.norm(), k.gate_floor);
    let payload = &world.payload;
    let n = world.quads.len() as f64;

    let payload_speed = speed_wall(payload.velocity.norm(), k.swing_factor * k.max_speed * gate, k.speed_wall_exponent);
    let mut quad_speed = 0.0;
    let mut yaw = 0.0;
    let mut upright = 0.0;
    let mut radial = 0.0;
    let mut vertical = 0.0;
    for q in &world.quads {
        quad_speed += speed_wall(q.linear_velocity.norm(), k.max_speed * gate, k.speed_wall_exponent);
        yaw += shaping_phi(k.shaping_rate, q.body_rates.z);
        upright += shaping_phi(k.shaping_rate, tilt_angle(&q.attitude));
        radial += (q.position - payload.position).norm();
        vertical += q.position.z - payload.position.z;
    }
    let quad_speed = quad_speed / n;
    let yaw = yaw / n;
    let upright = upright / n;
    let taut = (radial / n + vertical / n) / cable_length;
    let stable = (payload_speed + quad_speed + k.yaw_weight * yaw + k.upright_weight * upright + taut) / 5.0;
    StableTerms {
        stable,
        payload_speed,
        quad_speed,
        yaw,
        upright,
        taut,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeTerms {
    pub safe: f64,
    pub separation: f64,
    pub collision: f64,
    pub out_of_bounds: f64,
    pub smoothness: f64,
    pub energy: f64,
}

/// Safety reward. Smoothness works on the raw actions in `[-1, 1]`, the
/// saturation barrier on the normalized commands `(a + 1) / 2`.
pub fn reward_safe(
    world: &WorldState,
    actions: &[[f64; 4]],
    prev_actions: &[[f64; 4]],
    flags: SafetyFlags,
    k: &RewardConstants,
) -> SafeTerms {
    let quads = &world.quads;
    let n = quads.len();
    let separation = if n == 1 {
        1.0
    } else {
        let span = k.safe_separation - k.min_separation;
        let mut sum = 0.0;
        let mut pairs = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = (quads[i].position - quads[j].position).norm();
                sum += ((d - k.min_separation) / span).clamp(0.0, 1.0);
                pairs += 1;
            }
        }
        sum / pairs as f64
    };
    let collision = if flags.collision { k.collision_penalty } else { 0.0 };
    let out_of_bounds = if flags.out_of_bounds { k.out_of_bounds_penalty } else { 0.0 };

    let mut temporal = 0.0;
    let mut balance = 0.0;
    let mut energy = 0.0;
    for (a, prev) in actions.iter().zip(prev_actions) {
        let mean = a.iter().sum::<f64>() / 4.0;
        for j in 0..4 {
            temporal += (a[j] - prev[j]).abs();
            balance += (a[j] - mean).abs();
            let u = 0.5 * (a[j] + 1.0);
            energy += (-k.barrier_sharpness * u.abs()).exp() + (k.barrier_sharpness * (u - 1.0)).exp();
        }
    }
    let nf = actions.len() as f64;
    let smoothness = 0.5 * (temporal / nf + balance / nf);
    let energy = energy / (4.0 * nf);
    let safe = (-collision - out_of_bounds - k.smoothness_weight * smoothness - energy + separation) / 5.0;
    SafeTerms {
        safe,
        separation,
        collision,
        out_of_bounds,
        smoothness,
        energy,
    }
}

/// Composite reward with its full breakdown.
pub fn reward_total(
    world: &WorldState,
    target: &Vec3,
    actions: &[[f64; 4]],
    prev_actions: &[[f64; 4]],
    flags: SafetyFlags,
    cable_length: f64,
    k: &RewardConstants,
) -> Result<RewardBreakdown, RewardError> {
    let error = target - world.payload.position;
    let track = reward_track(&error, &world.payload.velocity, k);
    let stable = reward_stable(world, &error, cable_length, k);
    let safe = reward_safe(world, actions, prev_actions, flags, k);
    let out = RewardBreakdown {
        position: track.position,
        direction: track.direction,
        track: track.track,
        payload_speed: stable.payload_speed,
        quad_speed: stable.quad_speed,
        yaw: stable.yaw,
        upright: stable.upright,
        taut: stable.taut,
        stable: stable.stable,
        separation: safe.separation,
        collision: safe.collision,
        out_of_bounds: safe.out_of_bounds,
        smoothness: safe.smoothness,
        energy: safe.energy,
        safe: safe.safe,
        total: track.track * stable.stable + safe.safe,
    };
    for (name, value) in RewardBreakdown::FIELD_NAMES.iter().zip(out.values()) {
        if !value.is_finite() {
            return Err(RewardError { term: name, value });
        }
    }
    Ok(out)
}
