//! The figure-eight reference and its tracking error for the teleport oracle
//! and, if given, a trained checkpoint.
//!
//! ```text
//! cargo run --release --example figure_eight -- [checkpoint.qcp]
//! ```

use quadcable::env::EnvConfig;
use quadcable::eval::{figure_eight_eval, figure_eight_target, figure_eight_velocity, EvalConfig, MeanPolicy, TeleportOracle};
use quadcable::marl::load_checkpoint;
use quadcable::sim::PhysicalParams;

fn main() -> anyhow::Result<()> {
    let eval = EvalConfig::default();
    let r = &eval.reference;
    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "t [s]", "x", "y", "z", "speed");
    for k in 0..=16 {
        let t = k as f64 * r.period / 16.0;
        let p = figure_eight_target(t, r);
        println!("{t:6.2} {:8.4} {:8.4} {:8.4} {:8.4}", p.x, p.y, p.z, figure_eight_velocity(t, r).norm());
    }

    let env = EnvConfig::default();
    let physics = PhysicalParams::default();
    let (oracle, _) = figure_eight_eval(&mut TeleportOracle::default(), &env, &physics, &eval, 0)?;
    println!("\nteleport oracle: rmse {:.4} m, max {:.4} m over {:.1} s", oracle.rmse, oracle.max_error, oracle.duration);

    if let Some(path) = std::env::args().nth(1) {
        let ckpt = load_checkpoint(path.as_ref())?;
        let mut env = env;
        env.num_agents = quadcable::env::observation::agents_for_obs_dim(ckpt.params.obs_dim())
            .ok_or_else(|| anyhow::anyhow!("checkpoint observation width matches no team size"))?;
        let (report, _) = figure_eight_eval(&mut MeanPolicy::new(ckpt.params), &env, &physics, &eval, 0)?;
        println!(
            "policy: rmse {:.4} m, max {:.4} m over {:.2} s ({})",
            report.rmse,
            report.max_error,
            report.duration,
            report.reason.as_str()
        );
    }
    Ok(())
}
