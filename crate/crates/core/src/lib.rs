//! Simulation and multi-agent training for quadrotor teams carrying a
//! cable-suspended payload.

pub mod cli;
pub mod env;
pub mod eval;
pub mod marl;
pub mod reward;
pub mod sim;
