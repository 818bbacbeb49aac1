//! Plan a grasp-force target from a tangential load and a friction
//! coefficient, then track it on the viscoelastic scenario.

use gfl::control::{planned_profile, simulate_closed_loop, EstimatorMode, LoopConfig, Scenario};
use gfl::estimators::LsmConfig;

fn main() -> gfl::Result<()> {
    let mu = 0.6;
    // A 20 s load: lift-off, a heavier phase, then set-down.
    let spacing = 0.5;
    let load: Vec<f64> = (0..=40)
        .map(|i| {
            let t = i as f64 * spacing;
            match t {
                t if t < 2.0 => 0.0,
                t if t < 8.0 => 1.5,
                t if t < 14.0 => 4.0,
                _ => 0.5,
            }
        })
        .collect();
    let target = planned_profile(&load, mu, spacing)?;
    let cfg = LoopConfig {
        duration: 20.0,
        target: target.clone(),
        ..LoopConfig::default()
    };
    let plant = Scenario::Viscoelastic.plant(cfg.duration, 12.0)?;
    let run = simulate_closed_loop(&plant, &cfg, EstimatorMode::Lsm(LsmConfig::default()))?;

    println!("{:>6} {:>10} {:>10} {:>10}", "t [s]", "load [N]", "F_d [N]", "F [N]");
    for t in [1.0, 5.0, 7.5, 11.0, 13.5, 18.0] {
        let i = (t / cfg.period).round() as usize;
        println!(
            "{t:>6.1} {:>10.2} {:>10.3} {:>10.3}",
            load[(t / spacing) as usize],
            run.f_d[i],
            run.force[i]
        );
    }
    println!("diverged: {}", run.diverged);
    Ok(())
}
