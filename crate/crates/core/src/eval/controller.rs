use std::sync::Arc;

use ndarray::Array2;

use crate::env::{action_for_thrust, nominal_formation, EnvState};
use crate::marl::PolicyParams;
use crate::sim::PhysicalParams;

/// Anything that maps the team's observations to joint actions.
pub trait Controller {
    /// Observation width the controller was built for, if it cares.
    fn obs_dim(&self) -> Option<usize> {
        None
    }

    fn act(&mut self, observations: &[Vec<f64>]) -> Vec<[f64; 4]>;

    /// Whether [`Controller::intervene`] edits the state.
    fn intervenes(&self) -> bool {
        false
    }

    /// Called before every step with write access to the environment state.
    fn intervene(&mut self, _state: &mut EnvState, _params: &PhysicalParams) {}
}

/// Mean action of a shared policy, applied to every agent.
#[derive(Debug, Clone)]
pub struct MeanPolicy {
    pub params: Arc<PolicyParams>,
}

impl MeanPolicy {
    pub fn new(params: PolicyParams) -> Self {
        Self { params: Arc::new(params) }
    }
}

impl Controller for MeanPolicy {
    fn obs_dim(&self) -> Option<usize> {
        Some(self.params.obs_dim())
    }

    fn act(&mut self, observations: &[Vec<f64>]) -> Vec<[f64; 4]> {
        let d = self.params.obs_dim();
        let flat: Vec<f64> = observations.iter().flatten().copied().collect();
        let obs = Array2::from_shape_vec((observations.len(), d), flat).expect("observation width checked up front");
        let mean = self.params.actor_forward(obs.view());
        mean.rows().into_iter().map(|r| [r[0], r[1], r[2], r[3]]).collect()
    }
}

/// All motors off.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroThrust;

impl Controller for ZeroThrust {
    fn act(&mut self, observations: &[Vec<f64>]) -> Vec<[f64; 4]> {
        vec![[-1.0; 4]; observations.len()]
    }
}

/// Test double that teleports the team into a resting hover formation with
/// the payload on the target before every step.
#[derive(Debug, Clone, Default)]
pub struct TeleportOracle {
    hover_actions: Vec<[f64; 4]>,
}

impl Controller for TeleportOracle {
    fn act(&mut self, observations: &[Vec<f64>]) -> Vec<[f64; 4]> {
        if self.hover_actions.len() == observations.len() {
            self.hover_actions.clone()
        } else {
            vec![[0.0; 4]; observations.len()]
        }
    }

    fn intervenes(&self) -> bool {
        true
    }

    fn intervene(&mut self, state: &mut EnvState, params: &PhysicalParams) {
        let q = state.world.num_quads();
        let cfg = crate::env::EnvConfig {
            num_agents: q,
            target_position: state.target.into(),
            ..Default::default()
        };
        let mut world = nominal_formation(&cfg, params);
        let hover = params.hover_thrust_per_motor();
        world.motors = state.world.motors.clone();
        for bank in world.motors.iter_mut() {
            bank.filtered_speed = std::array::from_fn(|j| hover.min(bank.thrust_cap[j]).sqrt());
        }
        world.time = state.world.time;
        world.step_count = state.world.step_count;
        self.hover_actions = world.motors.iter().map(|m| action_for_thrust(hover, &m.thrust_cap)).collect();
        state.world = world;
    }
}
