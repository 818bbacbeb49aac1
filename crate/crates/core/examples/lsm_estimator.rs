//! Run the sliding-window least-squares stiffness estimator over generated
//! traces and score it against the true stiffness.

use gfl::estimators::{lsm_series, sequence_loss, LsmConfig};
use gfl::scenario::{synthesize_trace, trace_rng, GenConfig};

fn main() -> gfl::Result<()> {
    let cfg = GenConfig::default();
    let lsm = LsmConfig::default();
    println!("{:>5} {:>9} {:>9} {:>9}", "trace", "mean η", "loss", "held %");
    for i in 0..8u64 {
        let tr = synthesize_trace(&cfg, &mut trace_rng(cfg.seed, i))?.trace;
        let k = lsm_series(lsm, &tr.force, &tr.x);
        let scored = lsm.window..tr.len();
        let n = scored.len() as f64;
        let mean_eta = scored.clone().map(|t| k[t] / tr.k_true[t]).sum::<f64>() / n;
        let loss = sequence_loss(&k[lsm.window..], &tr.k_true[lsm.window..])?;
        let held = scored.filter(|&t| t > 0 && k[t] == k[t - 1]).count() as f64 / n;
        println!("{i:>5} {mean_eta:>9.3} {loss:>9.3} {:>8.1}%", 100.0 * held);
    }
    Ok(())
}
