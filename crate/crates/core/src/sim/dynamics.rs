use super::{
    body_wrench_from_thrusts, cable_force, ground_contact_force, integrate_attitude, ExternalWrench, PhysicalParams,
    SimError, Vec3, WorldState, WrenchTarget,
};

/// Advances the world by one step of `params.dt`.
///
/// Kick-drift-kick (velocity Verlet) update: half a velocity step with the
/// forces at the start of the step, a full position step, then the second
/// half with the forces at the new positions. Velocity-dependent damping in
/// the second kick uses the half-step velocity. Uniform accelerations are
/// integrated exactly and a body at rest in equilibrium stays exactly at rest.
/// Stable for the stiff cable and ground springs as long as `ω·dt < 2` for
/// the lightest body.
pub fn step_dynamics(
    world: &WorldState,
    thrusts: &[[f64; 4]],
    external: &[ExternalWrench],
    params: &PhysicalParams,
) -> Result<WorldState, SimError> {
    let q_count = world.quads.len();
    if thrusts.len() != q_count || world.motors.len() != q_count {
        return Err(SimError::Domain(format!(
            "expected {q_count} thrust vectors and motor banks, got {} and {}",
            thrusts.len(),
            world.motors.len()
        )));
    }
    let dt = params.dt;
    let half = 0.5 * dt;
    let inertia = Vec3::from(params.quad_inertia);

    let wrenches: Vec<(Vec3, Vec3)> = (0..q_count)
        .map(|i| {
            let (body_force, mut torque) = body_wrench_from_thrusts(&thrusts[i], params);
            for w in external.iter().filter(|w| w.target == WrenchTarget::Quad(i)) {
                torque += w.torque;
            }
            (body_force, torque)
        })
        .collect();
    let angular_accel = |w: &Vec3, torque: &Vec3| (torque - w.cross(&inertia.component_mul(w))).component_div(&inertia);

    let mut next = world.clone();
    let (quad_acc, payload_acc) = accelerations(world, &wrenches, external, params);
    for (i, quad) in next.quads.iter_mut().enumerate() {
        quad.linear_velocity += quad_acc[i] * half;
        quad.position += quad.linear_velocity * dt;
        quad.body_rates += angular_accel(&quad.body_rates, &wrenches[i].1) * half;
        quad.attitude = integrate_attitude(&quad.attitude, &quad.body_rates, dt);
    }
    next.payload.velocity += payload_acc * half;
    next.payload.position += next.payload.velocity * dt;

    let (quad_acc, payload_acc) = accelerations(&next, &wrenches, external, params);
    for (i, quad) in next.quads.iter_mut().enumerate() {
        quad.linear_velocity += quad_acc[i] * half;
        quad.body_rates += angular_accel(&quad.body_rates, &wrenches[i].1) * half;
    }
    next.payload.velocity += payload_acc * half;

    next.step_count = world.step_count + 1;
    next.time = next.step_count as f64 * dt;
    check_finite(&next)?;
    Ok(next)
}

/// Linear accelerations of every quad and of the payload at `world`.
fn accelerations(
    world: &WorldState,
    wrenches: &[(Vec3, Vec3)],
    external: &[ExternalWrench],
    params: &PhysicalParams,
) -> (Vec<Vec3>, Vec3) {
    let gravity = Vec3::new(0.0, 0.0, -params.gravity);
    let payload = &world.payload;
    let mut payload_force = gravity * params.payload_mass
        + ground_contact_force(&payload.position, &payload.velocity, params.payload_radius, params);
    let mut quad_acc = Vec::with_capacity(world.quads.len());
    for (i, quad) in world.quads.iter().enumerate() {
        let (on_quad, on_payload) = cable_force(quad, payload, params);
        payload_force += on_payload;
        let mut force = quad.attitude * wrenches[i].0
            + gravity * params.quad_mass
            + on_quad
            + ground_contact_force(&quad.position, &quad.linear_velocity, params.quad_collision_radius, params);
        for w in external.iter().filter(|w| w.target == WrenchTarget::Quad(i)) {
            force += w.force;
        }
        quad_acc.push(force / params.quad_mass);
    }
    for w in external.iter().filter(|w| w.target == WrenchTarget::Payload) {
        payload_force += w.force;
    }
    (quad_acc, payload_force / params.payload_mass)
}

fn check_finite(world: &WorldState) -> Result<(), SimError> {
    let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
    let fault = |quantity, body: String| SimError::IntegrationFault {
        quantity,
        body,
        step: world.step_count,
    };
    for (i, q) in world.quads.iter().enumerate() {
        if !finite(&q.position) {
            return Err(fault("position", format!("quad {i}")));
        }
        if !finite(&q.linear_velocity) {
            return Err(fault("linear_velocity", format!("quad {i}")));
        }
        if !finite(&q.body_rates) {
            return Err(fault("body_rates", format!("quad {i}")));
        }
        if !q.attitude.coords.iter().all(|c| c.is_finite()) {
            return Err(fault("attitude", format!("quad {i}")));
        }
    }
    if !finite(&world.payload.position) {
        return Err(fault("position", "payload".into()));
    }
    if !finite(&world.payload.velocity) {
        return Err(fault("velocity", "payload".into()));
    }
    Ok(())
}

/// Angle between the body z axis and world z, radians in `[0, π]`.
pub fn tilt_angle(attitude: &super::Quat) -> f64 {
    let body_z = attitude * Vec3::z();
    body_z.z.clamp(-1.0, 1.0).acos()
}

const CRASH_TILT: f64 = std::f64::consts::FRAC_PI_3;

/// Collision indicator: quads closer than `d_min`, a quad touching the
/// payload, or a quad hitting the ground while tilted more than 60°.
pub fn check_collision(world: &WorldState, d_min: f64, params: &PhysicalParams) -> bool {
    let quads = &world.quads;
    for i in 0..quads.len() {
        for j in (i + 1)..quads.len() {
            if (quads[i].position - quads[j].position).norm() < d_min {
                return true;
            }
        }
    }
    quads.iter().any(|q| {
        (q.position - world.payload.position).norm() < params.quad_collision_radius
            || (q.position.z < params.quad_collision_radius && tilt_angle(&q.attitude) > CRASH_TILT)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{MotorBank, PayloadState, Quat, QuadState};

    fn world_with(quads: Vec<QuadState>, payload: Vec3) -> WorldState {
        let n = quads.len();
        WorldState {
            quads,
            payload: PayloadState::at_rest(payload),
            motors: vec![MotorBank::new([0.15; 4], 0.02); n],
            time: 0.0,
            step_count: 0,
        }
    }

    #[test]
    fn free_fall_velocity_increment() {
        let p = PhysicalParams::default();
        let w = world_with(vec![QuadState::at_rest(Vec3::new(0.0, 0.0, 2.0))], Vec3::new(0.0, 0.0, 1.8));
        let next = step_dynamics(&w, &[[0.0; 4]], &[], &p).unwrap();
        assert!((next.quads[0].linear_velocity.z + 0.03924).abs() < 1e-12);
        assert_eq!(next.step_count, 1);
        assert!((next.time - 0.004).abs() < 1e-15);
    }

    #[test]
    fn zero_torque_keeps_rates_zero() {
        let p = PhysicalParams::default();
        let mut w = world_with(vec![QuadState::at_rest(Vec3::new(0.0, 0.0, 2.0))], Vec3::new(0.0, 0.0, 1.8));
        for _ in 0..100 {
            w = step_dynamics(&w, &[[0.05; 4]], &[], &p).unwrap();
            assert_eq!(w.quads[0].body_rates, Vec3::zeros());
        }
    }

    #[test]
    fn nan_thrust_is_an_integration_fault() {
        let p = PhysicalParams::default();
        let w = world_with(vec![QuadState::at_rest(Vec3::new(0.0, 0.0, 2.0))], Vec3::new(0.0, 0.0, 1.8));
        let err = step_dynamics(&w, &[[f64::NAN, 0.0, 0.0, 0.0]], &[], &p).unwrap_err();
        assert!(matches!(err, SimError::IntegrationFault { body, .. } if body == "quad 0"));
    }

    #[test]
    fn external_torque_spins_only_its_target() {
        let p = PhysicalParams::default();
        let w = world_with(
            vec![
                QuadState::at_rest(Vec3::new(0.0, 0.0, 2.0)),
                QuadState::at_rest(Vec3::new(0.0, 0.5, 2.0)),
            ],
            Vec3::new(0.0, 0.2, 1.9),
        );
        let push = ExternalWrench {
            force: Vec3::zeros(),
            torque: Vec3::new(0.0, 0.0, 0.01),
            target: WrenchTarget::Quad(1),
        };
        let next = step_dynamics(&w, &[[0.0; 4]; 2], &[push], &p).unwrap();
        assert_eq!(next.quads[0].body_rates, Vec3::zeros());
        assert!(next.quads[1].body_rates.z > 0.0);
    }

    #[test]
    fn collision_rules() {
        let p = PhysicalParams::default();
        let close = world_with(
            vec![
                QuadState::at_rest(Vec3::new(0.0, 0.0, 1.5)),
                QuadState::at_rest(Vec3::new(0.10, 0.0, 1.5)),
            ],
            Vec3::new(0.05, 0.0, 1.3),
        );
        assert!(check_collision(&close, 0.15, &p));
        let apart = world_with(
            vec![
                QuadState::at_rest(Vec3::new(0.0, 0.0, 1.5)),
                QuadState::at_rest(Vec3::new(0.20, 0.0, 1.5)),
            ],
            Vec3::new(0.1, 0.0, 1.3),
        );
        assert!(!check_collision(&apart, 0.15, &p));
        let single = world_with(vec![QuadState::at_rest(Vec3::new(0.0, 0.0, 1.5))], Vec3::new(0.0, 0.0, 1.2));
        assert!(!check_collision(&single, 0.15, &p));

        let mut flipped = single.clone();
        flipped.quads[0].position.z = 0.04;
        assert!(!check_collision(&flipped, 0.15, &p));
        flipped.quads[0].attitude = Quat::from_axis_angle(&Vec3::x_axis(), 1.2);
        assert!(check_collision(&flipped, 0.15, &p));

        let mut touching = single.clone();
        touching.payload.position = Vec3::new(0.0, 0.0, 1.47);
        assert!(check_collision(&touching, 0.15, &p));
    }
}
