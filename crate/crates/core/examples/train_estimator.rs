//! Train the recurrent stiffness estimator and save a checkpoint.
//!
//! `cargo run --release --example train_estimator -- [n_traces] [epochs] [checkpoint]`
//!
//! The desk setting (1000 traces, 40 epochs) takes several minutes on one
//! core; the defaults here finish in well under a minute.

use gfl::estimators::write_checkpoint;
use gfl::scenario::{synthesize_trace, trace_rng, Dataset, GenConfig};
use gfl::training::{train_with, TrainConfig};
use rayon::prelude::*;
use std::path::PathBuf;
use std::time::Instant;

fn main() -> gfl::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(100);
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("gfl-model.ckpt"));

    // Same traces `generate_dataset` would write, kept in memory.
    let gen = GenConfig {
        n_traces: n,
        ..GenConfig::default()
    };
    let traces = (0..n as u64)
        .into_par_iter()
        .map(|i| synthesize_trace(&gen, &mut trace_rng(gen.seed, i)).map(|p| p.trace))
        .collect::<gfl::Result<Vec<_>>>()?;
    let (train, val) = traces.split_at(gen.n_train());
    let data = Dataset {
        config_hash: gen.hash(),
        config: gen.clone(),
        train: train.to_vec(),
        val: val.to_vec(),
    };

    let cfg = TrainConfig {
        epochs,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let (ckpt, report) = train_with(&data, &cfg, |e| {
        println!(
            "epoch {:>3}  train {:>9.4}  val {:>9.4}  ({:.0?})",
            e.epoch,
            e.train_loss,
            e.val_loss,
            start.elapsed()
        );
    })?;
    println!(
        "kept epoch {}: val Mean {:.4} Var {:.4}; LSM Mean {:.4} Var {:.4}",
        report.best_epoch, report.val.mean, report.val.var, report.lsm_val.mean, report.lsm_val.var
    );
    write_checkpoint(&ckpt, &out)?;
    println!("checkpoint written to {}", out.display());
    Ok(())
}
