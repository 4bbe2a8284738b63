//! Success rate across cable lengths and payload masses. Uses the teleport
//! oracle unless a checkpoint is given.
//!
//! ```text
//! cargo run --release --example generalization_sweep -- [checkpoint.qcp] [trials]
//! ```

use quadcable::env::EnvConfig;
use quadcable::eval::{generalization_sweep, Controller, EvalConfig, MeanPolicy, SweepAxis, SweepRow, TeleportOracle};
use quadcable::marl::load_checkpoint;
use quadcable::sim::PhysicalParams;

fn sweep<C: Controller + Clone + Send + Sync>(ctl: &C, env: &EnvConfig, trials: u64) -> anyhow::Result<()> {
    let physics = PhysicalParams::default();
    let eval = EvalConfig::default();
    for axis in [SweepAxis::CableLength, SweepAxis::PayloadMass] {
        let rows: Vec<SweepRow> =
            generalization_sweep(ctl, env, &physics, axis, &axis.default_values(), trials, &eval, 0)?;
        println!("{}:", axis.name());
        for r in rows {
            println!("  {:8.3}  rate {:5.1}%  mean speed {:.3} m/s", r.value, 100.0 * r.rate, r.mean_speed);
        }
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let trials = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(20);
    let mut env = EnvConfig::default();
    match args.get(1) {
        Some(path) => {
            let ckpt = load_checkpoint(path.as_ref())?;
            env.num_agents = quadcable::env::observation::agents_for_obs_dim(ckpt.params.obs_dim())
                .ok_or_else(|| anyhow::anyhow!("checkpoint observation width matches no team size"))?;
            sweep(&MeanPolicy::new(ckpt.params), &env, trials)
        }
        None => sweep(&TeleportOracle::default(), &env, trials),
    }
}
