//! Summary statistics of the per-episode randomization: actuator limits, lag
//! constants and reset states.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use quadcable::env::{reset, EnvConfig, StartKind};
use quadcable::sim::PhysicalParams;

fn summary(name: &str, xs: &[f64]) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    println!("{name:28} mean {mean:9.5} std {std:9.5} min {lo:9.5} max {hi:9.5}");
}

fn main() {
    let cfg = EnvConfig::default();
    let p = PhysicalParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut caps, mut taus, mut offsets, mut speeds) = (vec![], vec![], vec![], vec![]);
    let (mut ground, mut nominal) = (0, 0);
    let episodes = 20_000;
    for _ in 0..episodes {
        let (state, _) = reset(&mut rng, &cfg, &p);
        match state.start {
            StartKind::Ground => ground += 1,
            StartKind::Nominal => nominal += 1,
            StartKind::Airborne => {}
        }
        for m in &state.world.motors {
            caps.extend(m.thrust_cap);
            taus.push(m.lag_time_constant);
        }
        let target = quadcable::sim::Vec3::from(cfg.target_position);
        offsets.push((state.world.payload.position - target).norm());
        speeds.extend(state.world.quads.iter().map(|q| q.linear_velocity.norm()));
    }
    println!("{episodes} resets of a {}-quad team", cfg.num_agents);
    summary("motor thrust cap [N]", &caps);
    summary("lag time constant [s]", &taus);
    summary("payload offset [m]", &offsets);
    summary("quad speed [m/s]", &speeds);
    println!(
        "ground starts {:.1}%, fallback formations {:.2}%",
        100.0 * ground as f64 / episodes as f64,
        100.0 * nominal as f64 / episodes as f64
    );
}
