use crate::error::{Error, Result};

/// Ratio `η = k̂ / k` of estimated to true stiffness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRatio(pub f64);

impl EstimateRatio {
    pub fn of(estimate: f64, truth: f64) -> Self {
        Self(estimate / truth)
    }
}

/// `η² + η⁻² − 2`: zero at `η = 1`, symmetric under `η ↔ 1/η`.
pub fn ratio_loss(eta: EstimateRatio) -> Result<f64> {
    let e = eta.0;
    if !(e > 0.0) || !e.is_finite() {
        return Err(Error::Domain(format!("ratio loss needs a positive finite ratio, got {e}")));
    }
    // (η − 1/η)² keeps full relative precision near η = 1
    let d = e - e.recip();
    Ok(d * d)
}

/// Mean of [`ratio_loss`] over aligned estimate and truth series.
pub fn sequence_loss(estimates: &[f64], truth: &[f64]) -> Result<f64> {
    if estimates.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} estimates vs {} labels",
            estimates.len(),
            truth.len()
        )));
    }
    if estimates.is_empty() {
        return Err(Error::Dimension("empty series".into()));
    }
    let mut sum = 0.0;
    for (&e, &k) in estimates.iter().zip(truth) {
        sum += ratio_loss(EstimateRatio::of(e, k))?;
    }
    Ok(sum / estimates.len() as f64)
}
