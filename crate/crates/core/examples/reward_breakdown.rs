//! Reward sub-terms for a few hand-built two-quad situations.

use quadcable::env::{nominal_formation, EnvConfig};
use quadcable::reward::{reward_total, RewardBreakdown, SafetyFlags};
use quadcable::sim::{PhysicalParams, Quat, Vec3};

fn main() -> anyhow::Result<()> {
    let cfg = EnvConfig::default();
    let p = PhysicalParams::default();
    let target = Vec3::from(cfg.target_position);
    let hover = [[-0.2; 4]; 2];
    let base = nominal_formation(&cfg, &p);

    let mut off_target = base.clone();
    for q in off_target.quads.iter_mut() {
        q.position.x -= 0.8;
    }
    off_target.payload.position.x -= 0.8;
    off_target.payload.velocity = Vec3::new(0.6, 0.0, 0.0);

    let mut tilted = base.clone();
    tilted.quads[0].attitude = Quat::from_axis_angle(&Vec3::x_axis(), 0.7);
    tilted.quads[0].body_rates = Vec3::new(0.0, 0.0, 3.0);

    let jerky = [[0.9, -0.9, 0.9, -0.9], [-0.2; 4]];
    let cases = [
        ("on target, hovering", &base, hover, SafetyFlags::default()),
        ("0.8 m away, moving in", &off_target, hover, SafetyFlags::default()),
        ("tilted and spinning", &tilted, hover, SafetyFlags::default()),
        ("uneven motor commands", &base, jerky, SafetyFlags::default()),
        (
            "collision",
            &base,
            hover,
            SafetyFlags {
                collision: true,
                out_of_bounds: false,
            },
        ),
    ];
    print!("{:24}", "");
    for name in RewardBreakdown::FIELD_NAMES {
        print!(" {:>9.9}", name);
    }
    println!();
    for (label, world, actions, flags) in cases {
        let b = reward_total(world, &target, &actions, &hover, flags, p.cable_length, &cfg.reward)?;
        print!("{label:24}");
        for v in b.values() {
            print!(" {v:9.4}");
        }
        println!();
    }
    Ok(())
}
