use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::sim::Vec3;

/// Lemniscate of Gerono in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferenceTrajectory {
    pub center: [f64; 3],
    /// m
    pub amplitude_x: f64,
    /// m
    pub amplitude_y: f64,
    /// s
    pub period: f64,
}

impl Default for ReferenceTrajectory {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0, 1.5],
            amplitude_x: 0.5,
            amplitude_y: 0.25,
            period: 8.0,
        }
    }
}

impl ReferenceTrajectory {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(format!("reference.period must be > 0, got {}", self.period));
        }
        Ok(())
    }
}

/// `center + (A_x sin ωt, A_y sin(2ωt) / 2, 0)` with `ω = 2π / period`.
pub fn figure_eight_target(t: f64, r: &ReferenceTrajectory) -> Vec3 {
    let w = TAU / r.period;
    Vec3::from(r.center) + Vec3::new(r.amplitude_x * (w * t).sin(), 0.5 * r.amplitude_y * (2.0 * w * t).sin(), 0.0)
}

/// Time derivative of [`figure_eight_target`].
pub fn figure_eight_velocity(t: f64, r: &ReferenceTrajectory) -> Vec3 {
    let w = TAU / r.period;
    Vec3::new(r.amplitude_x * w * (w * t).cos(), r.amplitude_y * w * (2.0 * w * t).cos(), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_and_ends_at_center() {
        let r = ReferenceTrajectory::default();
        let c = Vec3::from(r.center);
        assert!((figure_eight_target(0.0, &r) - c).norm() < 1e-15);
        assert!((figure_eight_target(r.period, &r) - c).norm() < 1e-12);
        assert!((figure_eight_target(3.0 * r.period, &r) - c).norm() < 1e-12);
    }

    #[test]
    fn peak_speed_matches_derivative() {
        let r = ReferenceTrajectory::default();
        let n = 200_000;
        let h = r.period / n as f64;
        let mut numeric: f64 = 0.0;
        let mut analytic: f64 = 0.0;
        for k in 0..n {
            let t = k as f64 * h;
            let d = (figure_eight_target(t + 1e-6, &r) - figure_eight_target(t - 1e-6, &r)) / 2e-6;
            numeric = numeric.max(d.norm());
            analytic = analytic.max(figure_eight_velocity(t, &r).norm());
        }
        assert!((numeric - analytic).abs() < 1e-6);
        // discrete 4 ms steps never outrun twice the peak speed
        for k in 0..2000 {
            let t = k as f64 * 0.004;
            let step = (figure_eight_target(t + 0.004, &r) - figure_eight_target(t, &r)).norm() / 0.004;
            assert!(step < 2.0 * analytic);
        }
    }
}
