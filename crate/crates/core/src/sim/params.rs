use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SimError, Vec3};

/// Physical constants of the quadrotor team, payload, cables and ground.
///
/// All quantities are SI. The file form is a flat TOML table whose keys are
/// the field names below, e.g.
///
/// ```text
/// quad_mass = 0.034
/// quad_inertia = [1.7e-5, 1.7e-5, 2.9e-5]
/// motor_positions = [[0.0325, -0.0325, 0.0], ...]
/// rotor_spin_signs = [1.0, -1.0, 1.0, -1.0]
/// cable_length = 0.3
/// dt = 0.004
/// ```
///
/// Missing keys take the defaults, unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// kg
    pub quad_mass: f64,
    /// Diagonal of the body inertia tensor, kg·m².
    pub quad_inertia: [f64; 3],
    /// Rotor hub positions in the body frame, m.
    pub motor_positions: [[f64; 3]; 4],
    /// +1 / -1 per rotor; multiplies the reaction torque.
    pub rotor_spin_signs: [f64; 4],
    /// Reaction torque per Newton of thrust, m.
    pub thrust_to_torque: f64,
    /// kg
    pub payload_mass: f64,
    /// Contact sphere radius of the payload, m.
    pub payload_radius: f64,
    /// Natural cable length, m.
    pub cable_length: f64,
    /// N/m
    pub cable_stiffness: f64,
    /// N·s/m, acts only while the cable is stretching.
    pub cable_damping: f64,
    /// N/m
    pub ground_stiffness: f64,
    /// N·s/m, normal damping and viscous tangential friction coefficient.
    pub ground_damping: f64,
    pub friction_coefficient: f64,
    /// Body sphere radius used for ground contact and collision tests, m.
    pub quad_collision_radius: f64,
    /// m/s², magnitude of gravity along -z.
    pub gravity: f64,
    /// s
    pub dt: f64,
}

pub const DEFAULT_ARM: f64 = 0.0325;

impl Default for PhysicalParams {
    fn default() -> Self {
        let a = DEFAULT_ARM;
        Self {
            quad_mass: 0.034,
            quad_inertia: [1.7e-5, 1.7e-5, 2.9e-5],
            // front-right, back-right, back-left, front-left
            motor_positions: [[a, -a, 0.0], [-a, -a, 0.0], [-a, a, 0.0], [a, a, 0.0]],
            rotor_spin_signs: [1.0, -1.0, 1.0, -1.0],
            thrust_to_torque: 0.006,
            payload_mass: 0.01,
            payload_radius: 0.01,
            cable_length: 0.3,
            cable_stiffness: 500.0,
            cable_damping: 0.3,
            ground_stiffness: 500.0,
            ground_damping: 1.0,
            friction_coefficient: 0.5,
            quad_collision_radius: 0.05,
            gravity: 9.81,
            dt: 0.004,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("quad_mass", self.quad_mass),
            ("quad_inertia[0]", self.quad_inertia[0]),
            ("quad_inertia[1]", self.quad_inertia[1]),
            ("quad_inertia[2]", self.quad_inertia[2]),
            ("payload_mass", self.payload_mass),
            ("cable_length", self.cable_length),
            ("cable_stiffness", self.cable_stiffness),
            ("ground_stiffness", self.ground_stiffness),
            ("quad_collision_radius", self.quad_collision_radius),
            ("dt", self.dt),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(SimError::InvalidParam {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        let non_negative = [
            ("cable_damping", self.cable_damping),
            ("ground_damping", self.ground_damping),
            ("friction_coefficient", self.friction_coefficient),
            ("payload_radius", self.payload_radius),
            ("thrust_to_torque", self.thrust_to_torque),
            ("gravity", self.gravity),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SimError::InvalidParam {
                    name,
                    reason: format!("must be finite and >= 0, got {value}"),
                });
            }
        }
        if self.rotor_spin_signs.iter().any(|s| s.abs() != 1.0) {
            return Err(SimError::InvalidParam {
                name: "rotor_spin_signs",
                reason: "entries must be +1 or -1".into(),
            });
        }
        let centroid: Vec3 = self.motor_positions.iter().map(|p| Vec3::from(*p)).sum::<Vec3>() / 4.0;
        if centroid.norm() > 1e-9 {
            return Err(SimError::InvalidParam {
                name: "motor_positions",
                reason: format!("rotor layout must be centred on the body origin, centroid {centroid:?}"),
            });
        }
        Ok(())
    }

    pub fn motor_position(&self, j: usize) -> Vec3 {
        Vec3::from(self.motor_positions[j])
    }

    /// Per-motor thrust that balances the bare quad's weight.
    pub fn hover_thrust_per_motor(&self) -> f64 {
        self.quad_mass * self.gravity / 4.0
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("physical params always serialize")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let params: Self = toml::from_str(text).map_err(|e| SimError::ParamsFile(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::ParamsFile(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        std::fs::write(path, self.to_toml_string())
            .map_err(|e| SimError::ParamsFile(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_x_symmetric() {
        let p = PhysicalParams::default();
        p.validate().unwrap();
        for j in 0..4 {
            let a = p.motor_position(j);
            let b = p.motor_position((j + 2) % 4);
            assert!((a + b).norm() < 1e-15);
        }
        // roughly 1.44 thrust-to-weight with 0.12 N motors
        let ratio = 4.0 * 0.12 / (p.quad_mass * p.gravity);
        assert!((ratio - 1.44).abs() < 0.01);
    }

    #[test]
    fn flat_file_round_trip() {
        let mut p = PhysicalParams::default();
        p.cable_length = 0.5;
        let text = p.to_toml_string();
        assert!(text.contains("cable_length = 0.5"));
        assert_eq!(PhysicalParams::from_toml_str(&text).unwrap(), p);
    }

    #[test]
    fn rejects_unknown_and_invalid_keys() {
        assert!(PhysicalParams::from_toml_str("cable_lenght = 0.3").is_err());
        let err = PhysicalParams::from_toml_str("payload_mass = -1.0").unwrap_err();
        assert!(err.to_string().contains("payload_mass"));
    }
}
