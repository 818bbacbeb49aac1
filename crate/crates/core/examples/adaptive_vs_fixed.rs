//! Track a force target on the two-regime object with the trained estimator
//! and with fixed estimates matched to each regime.
//!
//! `cargo run --release --example adaptive_vs_fixed -- <checkpoint>`
//!
//! Produce a checkpoint with `train_estimator` or the `train` subcommand.

use gfl::control::{
    simulate_closed_loop, EstimatorMode, LoopConfig, Scenario, HARD_STIFFNESS, SOFT_STIFFNESS,
};
use gfl::estimators::{read_checkpoint, LsmConfig};
use gfl::metrics::summarize;
use std::path::PathBuf;

fn main() -> gfl::Result<()> {
    let Some(path) = std::env::args().nth(1).map(PathBuf::from) else {
        eprintln!("usage: adaptive_vs_fixed <checkpoint>");
        std::process::exit(2);
    };
    let ckpt = read_checkpoint(&path)?;
    let cfg = LoopConfig::default();
    let window = cfg.target.period().unwrap_or(10.0);
    let plant = Scenario::TwoRegime.plant(cfg.duration, 12.0)?;

    println!("{:<12} {:>14} {:>10} {:>9}", "k̂", "mean RMSE [N]", "asym [N]", "diverged");
    for mode in [
        EstimatorMode::Recurrent(&ckpt),
        EstimatorMode::Lsm(LsmConfig::default()),
        EstimatorMode::Fixed(SOFT_STIFFNESS),
        EstimatorMode::Fixed(HARD_STIFFNESS),
        EstimatorMode::Oracle,
    ] {
        let run = simulate_closed_loop(&plant, &cfg, mode)?;
        let (s, _) = summarize(&run, window, Scenario::TwoRegime.name(), &mode.label())?;
        println!(
            "{:<12} {:>14.5} {:>10.5} {:>9}",
            s.estimator, s.mean_sliding_rmse, s.asymptotic_error, s.diverged
        );
    }
    Ok(())
}
