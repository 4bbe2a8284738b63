use super::{PayloadState, PhysicalParams, QuadState, Vec3};

/// Unilateral spring-damper cable between a quad and the payload.
///
/// Returns `(force_on_quad, force_on_payload)`. The cable only pulls: below
/// its natural length both forces are zero, and the damping term only resists
/// further stretching.
pub fn cable_force(quad: &QuadState, payload: &PayloadState, params: &PhysicalParams) -> (Vec3, Vec3) {
    let offset = quad.position - payload.position;
    let d = offset.norm();
    if d <= params.cable_length || d == 0.0 {
        return (Vec3::zeros(), Vec3::zeros());
    }
    let u = offset / d;
    let separation_speed = (quad.linear_velocity - payload.velocity).dot(&u);
    let tension = params.cable_stiffness * (d - params.cable_length)
        + params.cable_damping * separation_speed.max(0.0);
    let tension = tension.max(0.0);
    (-tension * u, tension * u)
}

/// Penalty contact with the plane z = 0 for a sphere of `radius` centred at
/// `position`.
pub fn ground_contact_force(position: &Vec3, velocity: &Vec3, radius: f64, params: &PhysicalParams) -> Vec3 {
    let penetration = radius - position.z;
    if penetration <= 0.0 {
        return Vec3::zeros();
    }
    let normal = (params.ground_stiffness * penetration + params.ground_damping * (-velocity.z).max(0.0)).max(0.0);
    let mut force = Vec3::new(0.0, 0.0, normal);
    let slip = Vec3::new(velocity.x, velocity.y, 0.0);
    let speed = slip.norm();
    if speed > 0.0 {
        let magnitude = (params.ground_damping * speed).min(params.friction_coefficient * normal);
        force -= slip * (magnitude / speed);
    }
    force
}
