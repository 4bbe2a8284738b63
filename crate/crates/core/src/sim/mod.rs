//! Rigid-body dynamics for a team of quadrotors tethered to a point-mass
//! payload.
//!
//! Every function here is a pure state transition: no globals, no interior
//! mutability. A [`WorldState`] can be cloned and stepped on any thread.

mod actuation;
mod dynamics;
mod forces;
mod params;
mod rotation;

pub use actuation::{body_wrench_from_thrusts, motor_lag_step, MotorBank};
pub use dynamics::{check_collision, step_dynamics, tilt_angle};
pub use forces::{cable_force, ground_contact_force};
pub use params::{PhysicalParams, DEFAULT_ARM};
pub use rotation::{attitude_rotate, integrate_attitude, rotation_columns};

use nalgebra::UnitQuaternion;
use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Quat = UnitQuaternion<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration fault: non-finite {quantity} on {body} after step {step}")]
    IntegrationFault {
        quantity: &'static str,
        body: String,
        step: u64,
    },
    #[error("invalid physical parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("physical params file: {0}")]
    ParamsFile(String),
}

/// Rigid-body state of one quadrotor.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadState {
    /// World frame, m.
    pub position: Vec3,
    /// Rotation taking body-frame vectors to the world frame.
    pub attitude: Quat,
    /// World frame, m/s.
    pub linear_velocity: Vec3,
    /// Body frame, rad/s.
    pub body_rates: Vec3,
}

impl QuadState {
    pub fn at_rest(position: Vec3) -> Self {
        Self {
            position,
            attitude: Quat::identity(),
            linear_velocity: Vec3::zeros(),
            body_rates: Vec3::zeros(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayloadState {
    pub position: Vec3,
    pub velocity: Vec3,
}

impl PayloadState {
    pub fn at_rest(position: Vec3) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
        }
    }
}

/// Full simulator state.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub quads: Vec<QuadState>,
    pub payload: PayloadState,
    pub motors: Vec<MotorBank>,
    /// Always `step_count as f64 * dt`.
    pub time: f64,
    pub step_count: u64,
}

impl WorldState {
    pub fn num_quads(&self) -> usize {
        self.quads.len()
    }

    pub fn is_finite(&self) -> bool {
        let v = |x: &Vec3| x.iter().all(|c| c.is_finite());
        self.quads.iter().all(|q| {
            v(&q.position)
                && v(&q.linear_velocity)
                && v(&q.body_rates)
                && q.attitude.coords.iter().all(|c| c.is_finite())
        }) && v(&self.payload.position)
            && v(&self.payload.velocity)
            && self.time.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WrenchTarget {
    Quad(usize),
    Payload,
}

/// A force/torque pair applied for exactly one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalWrench {
    /// World frame, N.
    pub force: Vec3,
    /// Body frame, N·m. Ignored for the payload.
    pub torque: Vec3,
    pub target: WrenchTarget,
}
