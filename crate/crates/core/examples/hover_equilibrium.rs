//! A quad holding a hanging payload at exact static equilibrium, then the
//! same start with the payload released from a slack cable.

use quadcable::sim::{step_dynamics, MotorBank, PayloadState, PhysicalParams, QuadState, Vec3, WorldState};

fn main() -> anyhow::Result<()> {
    let p = PhysicalParams::default();
    let quad = Vec3::new(0.0, 0.0, 1.8);
    let sag = p.cable_length + p.payload_mass * p.gravity / p.cable_stiffness;
    let thrust = (p.quad_mass + p.payload_mass) * p.gravity / 4.0;
    println!("hover thrust per motor {thrust:.5} N, static sag {sag:.6} m");

    for (label, drop) in [("taut", 0.0), ("slack by 5 cm", 0.05)] {
        let mut w = WorldState {
            quads: vec![QuadState::at_rest(quad)],
            payload: PayloadState::at_rest(quad - Vec3::new(0.0, 0.0, sag - drop)),
            motors: vec![MotorBank::new([0.12; 4], 0.02)],
            time: 0.0,
            step_count: 0,
        };
        println!("\n{label}:");
        println!("{:>6} {:>12} {:>12} {:>12}", "t [s]", "quad z", "payload z", "cable [m]");
        for k in 0..=250 {
            if k % 50 == 0 {
                let cable = (w.quads[0].position - w.payload.position).norm();
                println!("{:6.2} {:12.6} {:12.6} {:12.6}", w.time, w.quads[0].position.z, w.payload.position.z, cable);
            }
            w = step_dynamics(&w, &[[thrust; 4]], &[], &p)?;
        }
    }
    Ok(())
}
