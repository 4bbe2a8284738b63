//! Observation layouts.
//!
//! Agent `i` sees
//!
//! | offset | len | block |
//! |-------:|----:|-------|
//! | 0  | 3 | payload error `target - p_payload` |
//! | 3  | 3 | payload velocity |
//! | 6  | 3 | own offset from payload `p_i - p_payload` |
//! | 9  | 9 | own rotation matrix, columns stacked |
//! | 18 | 3 | own linear velocity (world) |
//! | 21 | 3 | own body rates |
//! | 24 | 4 | own previous action |
//! | 28 | 3 each | teammates' offsets from payload, ascending agent index |
//!
//! for a total of `25 + 3Q`. The global observation is the payload error and
//! velocity followed by one 22-wide block per quad (offset, rotation,
//! velocity, body rates, previous action), total `6 + 22Q`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::NoiseScaling;
use crate::sim::{rotation_columns, Vec3, WorldState};

pub const PAYLOAD_ERROR: usize = 0;
pub const PAYLOAD_VELOCITY: usize = 3;
pub const OWN_OFFSET: usize = 6;
pub const OWN_ROTATION: usize = 9;
pub const OWN_VELOCITY: usize = 18;
pub const OWN_BODY_RATES: usize = 21;
pub const OWN_PREV_ACTION: usize = 24;
pub const PEER_OFFSETS: usize = 28;

/// Width of one per-quad block in the global observation.
pub const GLOBAL_QUAD_BLOCK: usize = 22;
pub const GLOBAL_HEADER: usize = 6;

pub fn agent_obs_dim(num_agents: usize) -> usize {
    PEER_OFFSETS + 3 * (num_agents - 1)
}

pub fn global_obs_dim(num_agents: usize) -> usize {
    GLOBAL_HEADER + GLOBAL_QUAD_BLOCK * num_agents
}

/// Inverse of [`agent_obs_dim`]; `None` if no team size has that width.
pub fn agents_for_obs_dim(obs_dim: usize) -> Option<usize> {
    if obs_dim < PEER_OFFSETS || (obs_dim - PEER_OFFSETS) % 3 != 0 {
        return None;
    }
    Some((obs_dim - PEER_OFFSETS) / 3 + 1)
}

fn push3(out: &mut Vec<f64>, v: &Vec3) {
    out.extend_from_slice(v.as_slice());
}

pub fn build_global_observation(world: &WorldState, target: &Vec3, prev_actions: &[[f64; 4]]) -> Vec<f64> {
    let q = world.num_quads();
    let payload = &world.payload;
    let mut out = Vec::with_capacity(global_obs_dim(q));
    push3(&mut out, &(target - payload.position));
    push3(&mut out, &payload.velocity);
    for (quad, prev) in world.quads.iter().zip(prev_actions) {
        push3(&mut out, &(quad.position - payload.position));
        out.extend_from_slice(&rotation_columns(&quad.attitude));
        push3(&mut out, &quad.linear_velocity);
        push3(&mut out, &quad.body_rates);
        out.extend_from_slice(prev);
    }
    out
}

pub fn build_agent_observation(i: usize, world: &WorldState, target: &Vec3, prev_actions: &[[f64; 4]]) -> Vec<f64> {
    let q = world.num_quads();
    assert!(i < q, "agent index {i} out of range for {q} quads");
    let payload = &world.payload;
    let quad = &world.quads[i];
    let mut out = Vec::with_capacity(agent_obs_dim(q));
    push3(&mut out, &(target - payload.position));
    push3(&mut out, &payload.velocity);
    push3(&mut out, &(quad.position - payload.position));
    out.extend_from_slice(&rotation_columns(&quad.attitude));
    push3(&mut out, &quad.linear_velocity);
    push3(&mut out, &quad.body_rates);
    out.extend_from_slice(&prev_actions[i]);
    for (j, peer) in world.quads.iter().enumerate() {
        if j != i {
            push3(&mut out, &(peer.position - payload.position));
        }
    }
    out
}

/// Extracts agent `i`'s observation from a global observation vector.
///
/// Used after noise injection so every agent sees the same noisy quantities.
pub fn agent_view(global: &[f64], i: usize, num_agents: usize) -> Vec<f64> {
    debug_assert_eq!(global.len(), global_obs_dim(num_agents));
    let block = |k: usize| GLOBAL_HEADER + GLOBAL_QUAD_BLOCK * k;
    let mut out = Vec::with_capacity(agent_obs_dim(num_agents));
    out.extend_from_slice(&global[..GLOBAL_HEADER]);
    out.extend_from_slice(&global[block(i)..block(i) + GLOBAL_QUAD_BLOCK]);
    for j in (0..num_agents).filter(|&j| j != i) {
        out.extend_from_slice(&global[block(j)..block(j) + 3]);
    }
    out
}

/// Λ laid out to match the global observation.
pub fn noise_scale_vector(scaling: &NoiseScaling, num_agents: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(global_obs_dim(num_agents));
    out.extend([scaling.position; 3]);
    out.extend([scaling.velocity; 3]);
    for _ in 0..num_agents {
        out.extend([scaling.position; 3]);
        out.extend([scaling.rotation; 9]);
        out.extend([scaling.velocity; 3]);
        out.extend([scaling.body_rate; 3]);
        out.extend([scaling.action; 4]);
    }
    out
}

/// `obs + σ · Λ ⊙ η` with `η ~ N(0, I)`.
pub fn add_observation_noise<R: Rng + ?Sized>(obs: &[f64], sigma: f64, scale: &[f64], rng: &mut R) -> Vec<f64> {
    assert_eq!(obs.len(), scale.len(), "noise scale length must match observation");
    if sigma == 0.0 {
        return obs.to_vec();
    }
    obs.iter()
        .zip(scale)
        .map(|(o, l)| {
            let eta: f64 = rng.sample(StandardNormal);
            o + sigma * l * eta
        })
        .collect()
}
