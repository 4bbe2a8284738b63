use nalgebra::{Quaternion, UnitQuaternion};

use super::{Quat, Vec3};

/// Rotates a body-frame vector into the world frame.
///
/// `q` is renormalized first, so slightly drifted quaternions are accepted.
pub fn attitude_rotate(q: &Quaternion<f64>, v: &Vec3) -> Vec3 {
    UnitQuaternion::from_quaternion(*q) * v
}

/// Columns of the rotation matrix stacked into a 9-vector (`vec(R)`).
pub fn rotation_columns(q: &Quat) -> [f64; 9] {
    let m = q.to_rotation_matrix().into_inner();
    // nalgebra storage is column-major
    let mut out = [0.0; 9];
    out.copy_from_slice(m.as_slice());
    out
}

/// Advances an attitude by body rates held constant over `dt`, renormalizing
/// the result.
pub fn integrate_attitude(q: &Quat, body_rates: &Vec3, dt: f64) -> Quat {
    let delta = UnitQuaternion::from_scaled_axis(body_rates * dt);
    UnitQuaternion::new_normalize((q * delta).into_inner())
}
