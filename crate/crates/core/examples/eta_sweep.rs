//! Run the spring scenario with fixed stiffness estimates at several ratios
//! η = k̂ / k and compare the first and last target cycles.

use gfl::control::{simulate_closed_loop, EstimatorMode, LoopConfig, Scenario, SPRING_STIFFNESS};
use gfl::metrics::sliding_rmse;

fn main() -> gfl::Result<()> {
    let cfg = LoopConfig::default();
    let plant = Scenario::Spring.plant(cfg.duration, 12.0)?;
    let window = cfg.target.period().unwrap_or(10.0);
    println!("{:>5} {:>9} {:>12} {:>12}", "η", "diverged", "first [N]", "last [N]");
    for eta in [0.3, 0.5, 0.7, 1.0, 2.0, 3.0] {
        let run = simulate_closed_loop(&plant, &cfg, EstimatorMode::Fixed(eta * SPRING_STIFFNESS))?;
        let s = sliding_rmse(&run, window)?;
        let first = s.values[(s.window_samples - 1).min(s.values.len() - 1)];
        let last = *s.values.last().unwrap();
        println!("{eta:>5.1} {:>9} {first:>12.5} {last:>12.5}", run.diverged);
    }
    Ok(())
}
