//! Build a plant by hand, push force through it and back, then check a
//! randomly sampled object against the modeling assumptions.

use gfl::plant::{validate_assumptions, DriftCurve, ModelBounds, Plant, StiffnessField};
use gfl::scenario::{sample_force_profile, sample_plant, trace_rng, GenConfig};

fn main() -> gfl::Result<()> {
    // Stiffness grows linearly with force; the object creeps 0.2 mm over 10 s.
    let grid_f: Vec<f64> = (0..=24).map(|j| j as f64 * 0.5).collect();
    let field = StiffnessField::from_fn(vec![0.0, 10.0], grid_f, |_, f| 1.0 + 0.5 * f)?;
    let drift = DriftCurve::new(vec![0.0, 10.0], vec![0.0, 0.2])?;
    let plant = Plant::new(field, drift)?;

    println!("{:>6} {:>8} {:>10} {:>10} {:>10}", "t", "F", "k", "x", "F(x)");
    for (t, f) in [(0.0, 1.0), (2.5, 3.0), (5.0, 6.0), (10.0, 11.0)] {
        let x = plant.deformation(t, f)?;
        let back = plant.force_from_displacement(t, x)?;
        println!(
            "{t:>6.1} {f:>8.3} {:>10.4} {x:>10.5} {:>10.6}",
            plant.stiffness_at(t, f)?,
            back.force
        );
    }

    match plant.force_from_displacement(0.0, 100.0) {
        Err(e) => println!("pressing too far: {e}"),
        Ok(r) => println!("unexpected reading {r:?}"),
    }

    let cfg = GenConfig::default();
    let mut rng = trace_rng(cfg.seed, 42);
    let profile = sample_force_profile(&cfg, &mut rng)?;
    let random = sample_plant(&cfg, &mut rng)?;
    let report = validate_assumptions(&random, &profile, &ModelBounds::default());
    println!("\nrandom object #42:");
    for c in &report.checks {
        println!(
            "  {:<28} {}  worst {:.3e} bound {:.3e}",
            c.name,
            if c.passed { "ok  " } else { "FAIL" },
            c.worst,
            c.bound
        );
    }
    Ok(())
}
