use super::{PhysicalParams, SimError, Vec3};

/// Per-quad motor state: the lagged rotor-speed proxy and the actuator limits
/// drawn for the current episode.
#[derive(Debug, Clone, PartialEq)]
pub struct MotorBank {
    /// Filtered square root of thrust, √N. Stays in `[0, √thrust_cap]`.
    pub filtered_speed: [f64; 4],
    /// Per-motor thrust ceiling, N.
    pub thrust_cap: [f64; 4],
    /// First-order lag time constant, s.
    pub lag_time_constant: f64,
}

impl MotorBank {
    pub fn new(thrust_cap: [f64; 4], lag_time_constant: f64) -> Self {
        Self {
            filtered_speed: [0.0; 4],
            thrust_cap,
            lag_time_constant,
        }
    }

    /// Filter gain `dt / τ`, capped at one (instant response).
    pub fn alpha(&self, dt: f64) -> f64 {
        (dt / self.lag_time_constant).min(1.0)
    }

    pub fn speed_cap(&self, j: usize) -> f64 {
        self.thrust_cap[j].sqrt()
    }
}

/// Advances the rotor-speed lag by one step and returns the thrust each motor
/// actually produces.
pub fn motor_lag_step(
    motors: &MotorBank,
    f_cmd: &[f64; 4],
    dt: f64,
) -> Result<(MotorBank, [f64; 4]), SimError> {
    if !(dt > 0.0) {
        return Err(SimError::Domain(format!("dt must be > 0, got {dt}")));
    }
    if let Some(bad) = f_cmd.iter().find(|f| !(**f >= 0.0)) {
        return Err(SimError::Domain(format!(
            "commanded thrust must be >= 0, got {bad}"
        )));
    }
    let alpha = motors.alpha(dt);
    let mut next = motors.clone();
    let mut applied = [0.0; 4];
    for j in 0..4 {
        let target = f_cmd[j].sqrt();
        let filtered = motors.filtered_speed[j] + alpha * (target - motors.filtered_speed[j]);
        next.filtered_speed[j] = filtered.clamp(0.0, motors.speed_cap(j));
        applied[j] = (filtered * filtered).clamp(0.0, motors.thrust_cap[j]);
    }
    Ok((next, applied))
}

/// Net body-frame force and torque from four rotor thrusts.
///
/// Each rotor pushes along body +z at its hub and adds a reaction torque of
/// `spin_sign · k_τ · f` about body z.
pub fn body_wrench_from_thrusts(f: &[f64; 4], params: &PhysicalParams) -> (Vec3, Vec3) {
    let mut force = Vec3::zeros();
    let mut torque = Vec3::zeros();
    for (j, &thrust) in f.iter().enumerate() {
        let lift = Vec3::new(0.0, 0.0, thrust);
        force += lift;
        torque += params.motor_position(j).cross(&lift);
        torque.z += params.rotor_spin_signs[j] * params.thrust_to_torque * thrust;
    }
    (force, torque)
}
