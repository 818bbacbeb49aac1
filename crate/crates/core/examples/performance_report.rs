//! Simulate a handful of runs and write the comparison table and plots.
//!
//! `cargo run --release --example performance_report -- [out_dir]`

use gfl::control::{simulate_closed_loop, EstimatorMode, LoopConfig, Scenario, HARD_STIFFNESS};
use gfl::estimators::LsmConfig;
use gfl::metrics::{compare_runs, RunRecord};
use std::path::PathBuf;

fn main() -> gfl::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("gfl-report"));
    let cfg = LoopConfig::default();
    let window = cfg.target.period().unwrap_or(10.0);

    let mut runs = Vec::new();
    for sc in [Scenario::Plastic, Scenario::Viscoelastic] {
        let plant = sc.plant(cfg.duration, 12.0)?;
        for mode in [
            EstimatorMode::Oracle,
            EstimatorMode::Lsm(LsmConfig::default()),
            EstimatorMode::Fixed(HARD_STIFFNESS),
        ] {
            let result = simulate_closed_loop(&plant, &cfg, mode)?;
            runs.push(RunRecord::new(result, window, sc.name(), &mode.label())?);
        }
    }
    let written = compare_runs(&runs, &out)?;
    print!("{}", std::fs::read_to_string(&written[0]).unwrap_or_default());
    println!("{} files in {}", written.len(), out.display());
    Ok(())
}
