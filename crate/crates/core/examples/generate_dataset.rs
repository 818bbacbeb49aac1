//! Generate a small seeded dataset on disk and load it back.
//!
//! `cargo run --release --example generate_dataset -- [out_dir] [n_traces]`

use gfl::scenario::{generate_dataset, Dataset, GenConfig};
use std::path::PathBuf;

fn main() -> gfl::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("gfl-dataset"));
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);

    let cfg = GenConfig {
        n_traces: n,
        ..GenConfig::default()
    };
    let summary = generate_dataset(&cfg, &out)?;
    println!("wrote {} traces, manifest {}", summary.files.len(), summary.manifest.display());

    let ds = Dataset::load(&out)?;
    println!("loaded {} train / {} val (config {})", ds.train.len(), ds.val.len(), ds.config_hash);
    if let Some(tr) = ds.train.first() {
        let (lo, hi) = tr.k_true.iter().fold((f64::MAX, f64::MIN), |(a, b), &k| (a.min(k), b.max(k)));
        let f_max = tr.force.iter().cloned().fold(0.0, f64::max);
        println!(
            "first trace: {} steps, peak force {f_max:.2} N, stiffness {lo:.3}..{hi:.3} N/mm, final x {:.4} mm",
            tr.len(),
            tr.x.last().unwrap()
        );
    }
    Ok(())
}
