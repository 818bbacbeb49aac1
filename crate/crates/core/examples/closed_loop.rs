//! Track the default trapezoid force target on every named scenario with
//! the oracle estimator and the least-squares estimator.

use gfl::control::{simulate_closed_loop, EstimatorMode, LoopConfig, Scenario};
use gfl::estimators::LsmConfig;
use gfl::metrics::summarize;

fn main() -> gfl::Result<()> {
    let cfg = LoopConfig::default();
    let window = cfg.target.period().unwrap_or(10.0);
    println!("{:<14} {:<8} {:>10} {:>10} {:>9}", "scenario", "k̂", "asym [N]", "probe [s]", "diverged");
    for sc in Scenario::ALL {
        let plant = sc.plant(cfg.duration, 12.0)?;
        for mode in [EstimatorMode::Oracle, EstimatorMode::Lsm(LsmConfig::default())] {
            let run = simulate_closed_loop(&plant, &cfg, mode)?;
            let (s, _) = summarize(&run, window, sc.name(), &mode.label())?;
            let probe = if s.probing_time.settled {
                format!("{:.2}", s.probing_time.time)
            } else {
                "-".into()
            };
            println!(
                "{:<14} {:<8} {:>10.5} {:>10} {:>9}",
                s.scenario, s.estimator, s.asymptotic_error, probe, s.diverged
            );
        }
    }
    Ok(())
}
