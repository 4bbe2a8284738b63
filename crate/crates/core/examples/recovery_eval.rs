//! Recovery rate and mean payload speed of a checkpoint, next to the two
//! reference controllers that bound the harness.
//!
//! ```text
//! cargo run --release --example recovery_eval -- [checkpoint.qcp] [trials]
//! ```

use quadcable::env::EnvConfig;
use quadcable::eval::{recovery_rate, EvalConfig, MeanPolicy, TeleportOracle, ZeroThrust};
use quadcable::marl::load_checkpoint;
use quadcable::sim::PhysicalParams;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let trials = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(50);
    let env = EnvConfig::default();
    let physics = PhysicalParams::default();
    let eval = EvalConfig::default();

    let oracle = recovery_rate(&TeleportOracle::default(), &env, &physics, trials, &eval, 0)?;
    println!("teleport oracle  rate {:5.1}%  mean speed {:.3} m/s", 100.0 * oracle.rate, oracle.mean_speed);
    let zero = recovery_rate(&ZeroThrust, &env, &physics, trials, &eval, 0)?;
    println!("motors off       rate {:5.1}%  mean speed {:.3} m/s", 100.0 * zero.rate, zero.mean_speed);

    if let Some(path) = args.get(1) {
        let ckpt = load_checkpoint(path.as_ref())?;
        let mut env = env;
        env.num_agents = quadcable::env::observation::agents_for_obs_dim(ckpt.params.obs_dim())
            .ok_or_else(|| anyhow::anyhow!("checkpoint observation width matches no team size"))?;
        let report = recovery_rate(&MeanPolicy::new(ckpt.params), &env, &physics, trials, &eval, 0)?;
        println!("policy (Q={})     rate {:5.1}%  mean speed {:.3} m/s", env.num_agents, 100.0 * report.rate, report.mean_speed);
        for t in report.trials.iter().filter(|t| !t.success).take(5) {
            println!("  trial {:3} failed: {} with final error {:.3} m", t.trial, t.reason.as_str(), t.final_error);
        }
    }
    Ok(())
}
