//! Payload swinging under a fixed anchor: measured period against the small
//! angle pendulum, for a few cable lengths.

use std::f64::consts::PI;

use quadcable::sim::{step_dynamics, MotorBank, PayloadState, PhysicalParams, QuadState, Vec3, WorldState};

fn period(p: &PhysicalParams, angle: f64) -> anyhow::Result<f64> {
    let anchor = Vec3::new(0.0, 0.0, 3.0);
    let r = p.cable_length + p.payload_mass * p.gravity / p.cable_stiffness;
    let mut w = WorldState {
        quads: vec![QuadState::at_rest(anchor)],
        payload: PayloadState::at_rest(anchor + Vec3::new(r * angle.sin(), 0.0, -r * angle.cos())),
        motors: vec![MotorBank::new([0.12; 4], 0.02)],
        time: 0.0,
        step_count: 0,
    };
    let mut crossings = Vec::new();
    let mut prev = w.payload.position.x;
    while crossings.len() < 6 {
        w = step_dynamics(&w, &[[0.0; 4]], &[], p)?;
        w.quads[0] = QuadState::at_rest(anchor);
        let x = w.payload.position.x;
        if prev > 0.0 && x <= 0.0 {
            crossings.push(w.time - p.dt * x / (x - prev));
        }
        prev = x;
    }
    Ok((crossings[5] - crossings[0]) / 5.0)
}

fn main() -> anyhow::Result<()> {
    println!("{:>8} {:>8} {:>12} {:>12} {:>8}", "L [m]", "angle", "measured", "2pi sqrt(L/g)", "err %");
    for length in [0.2, 0.3, 0.5, 1.0] {
        for angle in [0.05, 0.3] {
            let p = PhysicalParams {
                cable_length: length,
                ..PhysicalParams::default()
            };
            let measured = period(&p, angle)?;
            let ideal = 2.0 * PI * (length / p.gravity).sqrt();
            println!(
                "{length:8.2} {angle:8.2} {measured:12.4} {ideal:12.4} {:8.2}",
                100.0 * (measured / ideal - 1.0)
            );
        }
    }
    Ok(())
}
