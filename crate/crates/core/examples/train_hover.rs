//! Desk-scale single-quad hover training.
//!
//! ```text
//! cargo run --release --example train_hover -- [total_steps] [seed]
//! ```

use quadcable::cli::RunConfig;
use quadcable::marl::train;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let total_steps = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(5_000_000);
    let seed = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let mut cfg = RunConfig::from_toml_str(include_str!("../configs/hover_q1.toml"))?;
    cfg.train.total_steps = total_steps;
    cfg.train.seed = seed;
    let t0 = std::time::Instant::now();
    train(&cfg.train, &cfg.env, &cfg.physics, None, |row| {
        println!(
            "update {:4} steps {:8} eps {:4} return {:9.2} len {:7.1} coll {:3} oob {:3} ent {:6.3} vloss {:9.3} kl {:.4} track {:.3} smooth {:.3} [{:.0}s]",
            row.update,
            row.env_steps,
            row.episodes,
            row.mean_return,
            row.mean_length,
            row.collisions,
            row.out_of_bounds,
            row.entropy,
            row.value_loss,
            row.approx_kl,
            row.breakdown_mean[2],
            row.breakdown_mean[12],
            t0.elapsed().as_secs_f64()
        );
    })?;
    Ok(())
}
