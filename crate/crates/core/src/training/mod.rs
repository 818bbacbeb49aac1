//! Training and evaluation of the recurrent stiffness estimator.

mod adam;
mod bptt;
mod config;
mod eval;
mod gradcheck;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use adam::{clip_global_norm, Adam};
pub use bptt::{
    predict, segment_backward, segment_forward, trace_loss, Carry, PreparedTrace, SegmentLoss, Workspace,
};
pub use config::TrainConfig;
pub use eval::{evaluate, evaluate_prepared, EstimatorKind, EvalSummary};
pub use gradcheck::{analytic_gradient, grad_check, GradCheck};

use crate::error::{Error, Result};
use crate::estimators::{Checkpoint, RecurrentParams};
use crate::scenario::{Dataset, GraspTrace};

/// Losses after one epoch. Epoch 0 is the untrained network, whose output
/// equals the slope estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose weights were kept.
    pub best_epoch: usize,
    pub wall_clock: Duration,
    pub stopped_early: bool,
    /// Steps at the start of each trace excluded from the training loss.
    pub warmup_excluded: usize,
    pub val_skip_warmup: bool,
    /// Validation statistics of the kept weights.
    pub val: EvalSummary,
    /// Validation statistics of the slope estimator alone.
    pub lsm_val: EvalSummary,
    pub config_hash: String,
}

impl TrainReport {
    /// `epoch,train_loss,val_loss` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss\n");
        for r in &self.epochs {
            out.push_str(&format!("{},{},{}\n", r.epoch, r.train_loss, r.val_loss));
        }
        out
    }

    /// Key-value summary. Wall-clock time is left out so that reruns
    /// produce identical files.
    pub fn summary(&self) -> crate::kv::KvFile {
        let mut kv = crate::kv::KvFile::new();
        kv.set("best_epoch", self.best_epoch);
        kv.set("epochs_run", self.epochs.len().saturating_sub(1));
        kv.set("stopped_early", self.stopped_early);
        kv.set("warmup_excluded_steps", self.warmup_excluded);
        kv.set("val_skip_warmup", self.val_skip_warmup);
        kv.set("val_mean_loss", self.val.mean);
        kv.set("val_var_loss", self.val.var);
        kv.set("lsm_val_mean_loss", self.lsm_val.mean);
        kv.set("lsm_val_var_loss", self.lsm_val.var);
        kv.set("config_hash", &self.config_hash);
        kv
    }
}

fn prepare(traces: &[GraspTrace], cfg: &TrainConfig, skip: usize, id_base: usize) -> Vec<PreparedTrace> {
    traces
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            let id = t.provenance.as_ref().map_or(id_base + i, |p| p.index as usize);
            PreparedTrace::new(id, t, cfg.lsm, skip)
        })
        .collect()
}

/// Per-trace slot reused across batches.
struct Slot {
    carry: Carry,
    ws: Workspace,
    grad: Vec<f64>,
    loss: SegmentLoss,
}

/// Runs one epoch of truncated-BPTT minibatch training; returns the mean over
/// traces of each trace's mean loss, as seen during the epoch.
fn run_epoch(
    params: &mut RecurrentParams,
    opt: &mut Adam,
    train: &[PreparedTrace],
    order: &[usize],
    cfg: &TrainConfig,
) -> Result<f64> {
    let n_par = params.values().len();
    let mut per_trace = Vec::with_capacity(train.len());
    let mut total = vec![0.0; n_par];
    for batch in order.chunks(cfg.batch_size) {
        let mut slots: Vec<Slot> = batch
            .iter()
            .map(|_| Slot {
                carry: Carry::zeros(params.dims()),
                ws: Workspace::default(),
                grad: vec![0.0; n_par],
                loss: SegmentLoss::default(),
            })
            .collect();
        let longest = batch.iter().map(|&i| train[i].len()).max().unwrap_or(0);
        let mut start = 0;
        while start < longest {
            let p: &RecurrentParams = params;
            let seg: Vec<Result<SegmentLoss>> = slots
                .par_iter_mut()
                .zip(batch.par_iter())
                .map(|(slot, &i)| {
                    let tr = &train[i];
                    slot.grad.iter_mut().for_each(|g| *g = 0.0);
                    if start >= tr.len() {
                        return Ok(SegmentLoss::default());
                    }
                    let range = start..(start + cfg.bptt).min(tr.len());
                    let loss = segment_forward(p, tr, range.clone(), &mut slot.carry, &mut slot.ws)?;
                    if loss.count > 0 {
                        segment_backward(p, tr, range, &slot.ws, &mut slot.grad);
                    }
                    slot.loss.sum += loss.sum;
                    slot.loss.count += loss.count;
                    Ok(loss)
                })
                .collect();
            let mut count = 0;
            for s in seg {
                count += s?.count;
            }
            if count > 0 {
                total.iter_mut().for_each(|g| *g = 0.0);
                for slot in &slots {
                    for (t, g) in total.iter_mut().zip(&slot.grad) {
                        *t += g;
                    }
                }
                let inv = 1.0 / count as f64;
                total.iter_mut().for_each(|g| *g *= inv);
                clip_global_norm(&mut total, cfg.grad_clip);
                debug_assert!(total.iter().map(|g| g * g).sum::<f64>().sqrt() <= cfg.grad_clip * (1.0 + 1e-12));
                opt.step(params.values_mut(), &total);
                if let Some(i) = params.values().iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(format!("parameter {i} after update")));
                }
            }
            start += cfg.bptt;
        }
        for slot in &slots {
            if slot.loss.count > 0 {
                per_trace.push(slot.loss.sum / slot.loss.count as f64);
            }
        }
    }
    Ok(per_trace.iter().sum::<f64>() / per_trace.len().max(1) as f64)
}

/// Trains on `dataset.train`, selects the epoch with the lowest validation
/// loss (the untrained network included) and returns it as a checkpoint.
pub fn train(dataset: &Dataset, cfg: &TrainConfig) -> Result<(Checkpoint, TrainReport)> {
    train_with(dataset, cfg, |_| {})
}

/// As [`train`], calling `on_epoch` after every epoch.
pub fn train_with(
    dataset: &Dataset,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<(Checkpoint, TrainReport)> {
    cfg.validate()?;
    if dataset.train.is_empty() || dataset.val.is_empty() {
        return Err(Error::Config("training needs at least one train and one validation trace".into()));
    }
    let clock = Instant::now();
    let train = prepare(&dataset.train, cfg, cfg.warmup(), 0);
    let val = prepare(&dataset.val, cfg, cfg.val_skip(), dataset.train.len());
    if let Some(t) = train.iter().find(|t| t.scored_steps() == 0) {
        return Err(Error::Config(format!("trace {} is shorter than the warm-up", t.id)));
    }

    let mut params = RecurrentParams::init(cfg.dims, cfg.seed)?;
    let mut opt = Adam::new(params.values().len(), cfg.learning_rate);
    let val_loss = |p: &RecurrentParams| -> Result<f64> {
        Ok(evaluate_prepared(&EstimatorKind::Recurrent(p), &val)?.mean)
    };
    let initial_train = evaluate_prepared(&EstimatorKind::Recurrent(&params), &train)?.mean;
    let first = EpochRecord {
        epoch: 0,
        train_loss: initial_train,
        val_loss: val_loss(&params)?,
    };
    on_epoch(&first);
    let mut records = vec![first];
    let mut best = (0, first.val_loss, params.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f_7a11);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut stopped_early = false;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let train_loss = run_epoch(&mut params, &mut opt, &train, &order, cfg)?;
        let rec = EpochRecord {
            epoch,
            train_loss,
            val_loss: val_loss(&params)?,
        };
        on_epoch(&rec);
        records.push(rec);
        if rec.val_loss < best.1 {
            best = (epoch, rec.val_loss, params.clone());
        } else if epoch - best.0 >= cfg.patience {
            stopped_early = epoch < cfg.epochs;
            break;
        }
    }

    let (best_epoch, _, params) = best;
    let val_summary = evaluate_prepared(&EstimatorKind::Recurrent(&params), &val)?;
    let lsm_val = evaluate_prepared(&EstimatorKind::Lsm, &val)?;
    let config_hash = cfg.hash();
    let report = TrainReport {
        epochs: records,
        best_epoch,
        wall_clock: clock.elapsed(),
        stopped_early,
        warmup_excluded: cfg.warmup(),
        val_skip_warmup: cfg.val_skip_warmup,
        val: val_summary,
        lsm_val,
        config_hash: config_hash.clone(),
    };
    let ckpt = Checkpoint {
        params,
        lsm: cfg.lsm,
        config_hash,
    };
    Ok((ckpt, report))
}
