use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{DisturbanceConfig, DrConfig, EnvConfig, TargetConfig};
use crate::sim::{
    ExternalWrench, MotorBank, PayloadState, PhysicalParams, Quat, QuadState, Vec3, WorldState, WrenchTarget,
};

/// How an episode starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartKind {
    Airborne,
    /// Everything resting on the ground, cables slack.
    Ground,
    /// Rejection sampling gave up; quads in a fixed ring above the payload.
    Nominal,
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal));
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn random_attitude<R: Rng + ?Sized>(rng: &mut R, max_tilt: f64) -> Quat {
    let yaw = Quat::from_axis_angle(&Vec3::z_axis(), uniform(rng, 0.0, TAU));
    let heading = uniform(rng, 0.0, TAU);
    let axis = nalgebra::Unit::new_normalize(Vec3::new(heading.cos(), heading.sin(), 0.0));
    Quat::from_axis_angle(&axis, uniform(rng, 0.0, max_tilt)) * yaw
}

fn separated(candidate: &Vec3, placed: &[Vec3], d_min: f64) -> bool {
    placed.iter().all(|p| (p - candidate).norm() >= d_min)
}

fn nominal_motors(config: &EnvConfig, q: usize) -> Vec<MotorBank> {
    let cap = 0.5 * (config.dr.base_thrust_range[0] + config.dr.base_thrust_range[1]);
    let tau = 0.5 * (config.dr.tau_range[0] + config.dr.tau_range[1]);
    vec![MotorBank::new([cap; 4], tau); q]
}

/// Ring of quads above the payload at a fixed polar angle.
pub fn nominal_formation(config: &EnvConfig, params: &PhysicalParams) -> WorldState {
    let q = config.num_agents;
    let payload = Vec3::from(config.target_position);
    let r = 0.95 * params.cable_length;
    let polar: f64 = if q == 1 { 0.0 } else { config.init.max_polar_angle.min(0.6) };
    let quads = (0..q)
        .map(|i| {
            let az = TAU * i as f64 / q as f64;
            let dir = Vec3::new(polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos());
            QuadState::at_rest(payload + dir * r)
        })
        .collect();
    WorldState {
        quads,
        payload: PayloadState::at_rest(payload),
        motors: nominal_motors(config, q),
        time: 0.0,
        step_count: 0,
    }
}

/// Draws a reset state. Motors carry nominal limits; see
/// [`sample_domain_randomization`] for the per-episode draw.
pub fn sample_initial_state<R: Rng + ?Sized>(
    rng: &mut R,
    config: &EnvConfig,
    params: &PhysicalParams,
) -> (WorldState, StartKind) {
    let init = &config.init;
    let q = config.num_agents;
    let target = Vec3::from(config.target_position);
    let d_min = config.reward.min_separation;
    let l = params.cable_length;
    let ground = rng.random::<f64>() < init.ground_start_probability;

    let offset = Vec3::new(
        uniform(rng, -init.payload_offset, init.payload_offset),
        uniform(rng, -init.payload_offset, init.payload_offset),
        uniform(rng, -init.payload_offset, init.payload_offset),
    );
    let payload = if ground {
        PayloadState::at_rest(Vec3::new(target.x + offset.x, target.y + offset.y, params.payload_radius))
    } else {
        PayloadState {
            position: target + offset,
            velocity: random_unit(rng) * uniform(rng, 0.0, init.max_speed),
        }
    };

    let mut placed: Vec<Vec3> = Vec::with_capacity(q);
    let mut attempts = 0;
    while placed.len() < q {
        attempts += 1;
        if attempts > init.max_attempts {
            return (nominal_formation(config, params), StartKind::Nominal);
        }
        let az = uniform(rng, 0.0, TAU);
        let candidate = if ground {
            let dz = params.quad_collision_radius - params.payload_radius;
            let reach = (l * l - dz * dz).max(0.0).sqrt() * 0.98;
            let h = uniform(rng, init.shell_min_fraction * reach, reach);
            Vec3::new(
                payload.position.x + h * az.cos(),
                payload.position.y + h * az.sin(),
                params.quad_collision_radius,
            )
        } else {
            let polar = uniform(rng, 0.0, init.max_polar_angle);
            let r = uniform(rng, init.shell_min_fraction * l, l);
            let dir = Vec3::new(polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos());
            payload.position + dir * r
        };
        if separated(&candidate, &placed, d_min) {
            placed.push(candidate);
        }
    }

    let quads = placed
        .into_iter()
        .map(|position| {
            if ground {
                let yaw = Quat::from_axis_angle(&Vec3::z_axis(), uniform(rng, 0.0, TAU));
                QuadState {
                    attitude: yaw,
                    ..QuadState::at_rest(position)
                }
            } else {
                QuadState {
                    position,
                    attitude: random_attitude(rng, init.max_tilt),
                    linear_velocity: random_unit(rng) * uniform(rng, 0.0, init.max_speed),
                    body_rates: random_unit(rng) * uniform(rng, 0.0, init.max_body_rate),
                }
            }
        })
        .collect();
    let world = WorldState {
        quads,
        payload,
        motors: nominal_motors(config, q),
        time: 0.0,
        step_count: 0,
    };
    (world, if ground { StartKind::Ground } else { StartKind::Airborne })
}

/// Per-quad thrust caps and lag constants for one episode.
pub fn sample_domain_randomization<R: Rng + ?Sized>(rng: &mut R, dr: &DrConfig, num_quads: usize) -> Vec<MotorBank> {
    (0..num_quads)
        .map(|_| {
            let base = uniform(rng, dr.base_thrust_range[0], dr.base_thrust_range[1]);
            let caps = std::array::from_fn(|_| {
                let offset: f64 = rng.sample(StandardNormal);
                (base + dr.motor_offset_std * offset).clamp(dr.thrust_clip[0], dr.thrust_clip[1])
            });
            let tau = uniform(rng, dr.tau_range[0], dr.tau_range[1]);
            MotorBank::new(caps, tau)
        })
        .collect()
}

/// One-step pushes: maybe one quad (force biased toward its body z axis plus
/// a torque), and independently maybe the payload.
pub fn apply_random_disturbances<R: Rng + ?Sized>(
    rng: &mut R,
    config: &DisturbanceConfig,
    world: &WorldState,
) -> Vec<ExternalWrench> {
    let mut out = Vec::new();
    if rng.random::<f64>() < config.per_step_probability {
        let i = rng.random_range(0..world.num_quads());
        let body_z = world.quads[i].attitude * Vec3::z();
        let force_dir = (random_unit(rng) + body_z * config.z_bias_weight).normalize();
        let torque_dir = (random_unit(rng) + Vec3::z() * config.z_bias_weight).normalize();
        out.push(ExternalWrench {
            force: force_dir * uniform(rng, 0.0, config.quad_force_max),
            torque: torque_dir * uniform(rng, 0.0, config.quad_torque_max),
            target: WrenchTarget::Quad(i),
        });
    }
    if rng.random::<f64>() < config.per_step_probability {
        out.push(ExternalWrench {
            force: random_unit(rng) * uniform(rng, 0.0, config.payload_force_max),
            torque: Vec3::zeros(),
            target: WrenchTarget::Payload,
        });
    }
    out
}

/// Occasionally redraws the target inside a box around the nominal goal.
pub fn sample_target_update<R: Rng + ?Sized>(rng: &mut R, current: &Vec3, nominal: &Vec3, config: &TargetConfig) -> Vec3 {
    if !config.randomization_enabled || rng.random::<f64>() >= config.per_step_probability {
        return *current;
    }
    let h = config.box_half_extent;
    nominal + Vec3::new(uniform(rng, -h, h), uniform(rng, -h, h), uniform(rng, -h, h))
}

/// Occasional bounded step in one motor's filtered speed proxy.
pub fn apply_rpm_jump<R: Rng + ?Sized>(rng: &mut R, motors: &mut [MotorBank], dr: &DrConfig) {
    if !dr.rpm_jump_enabled || rng.random::<f64>() >= dr.rpm_jump_probability {
        return;
    }
    let i = rng.random_range(0..motors.len());
    let j = rng.random_range(0..4);
    let cap = motors[i].speed_cap(j);
    let jump = uniform(rng, -dr.rpm_jump_max_fraction, dr.rpm_jump_max_fraction) * cap;
    motors[i].filtered_speed[j] = (motors[i].filtered_speed[j] + jump).clamp(0.0, cap);
}
