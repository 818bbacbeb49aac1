use rayon::prelude::*;

use super::bptt::{mean_scored_loss, predict, PreparedTrace};
use crate::error::{Error, Result};
use crate::estimators::{LsmConfig, RecurrentParams};
use crate::scenario::GraspTrace;

/// Which estimate to score.
#[derive(Debug, Clone, Copy)]
pub enum EstimatorKind<'a> {
    /// The true stiffness itself.
    Oracle,
    /// A constant estimate, N/mm.
    Fixed(f64),
    /// The sliding-window least-squares estimate.
    Lsm,
    Recurrent(&'a RecurrentParams),
}

/// Loss statistics over a set of traces.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    /// Mean of the per-trace mean losses.
    pub mean: f64,
    /// Population variance of the per-trace mean losses.
    pub var: f64,
    pub per_trace: Vec<f64>,
}

impl EvalSummary {
    pub fn from_losses(per_trace: Vec<f64>) -> Result<Self> {
        if per_trace.is_empty() {
            return Err(Error::Dimension("no traces to evaluate".into()));
        }
        let n = per_trace.len() as f64;
        let mean = per_trace.iter().sum::<f64>() / n;
        let var = per_trace.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / n;
        Ok(Self { mean, var, per_trace })
    }
}

pub fn evaluate_prepared(kind: &EstimatorKind, traces: &[PreparedTrace]) -> Result<EvalSummary> {
    let losses: Result<Vec<f64>> = traces
        .par_iter()
        .map(|tr| match *kind {
            EstimatorKind::Oracle => mean_scored_loss(&tr.k_true, tr),
            EstimatorKind::Fixed(k) => mean_scored_loss(&vec![k; tr.len()], tr),
            EstimatorKind::Lsm => mean_scored_loss(&tr.k_lsm, tr),
            EstimatorKind::Recurrent(p) => mean_scored_loss(&predict(p, tr)?, tr),
        })
        .collect();
    EvalSummary::from_losses(losses?)
}

/// Streams every trace through the estimator and scores it, skipping the
/// first `skip` steps of each.
pub fn evaluate(kind: &EstimatorKind, traces: &[GraspTrace], lsm: LsmConfig, skip: usize) -> Result<EvalSummary> {
    if let EstimatorKind::Recurrent(p) = kind {
        p.dims().validate()?;
    }
    let prepared: Vec<PreparedTrace> = traces
        .par_iter()
        .enumerate()
        .map(|(i, t)| PreparedTrace::new(i, t, lsm, skip))
        .collect();
    evaluate_prepared(kind, &prepared)
}
