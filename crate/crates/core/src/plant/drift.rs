use crate::error::{Error, Result};

/// Zero-force drift `C'(t)` in mm, linear between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftCurve {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl DriftCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::Dimension(format!(
                "drift curve needs matching time/value arrays of length >= 2 (got {} and {})",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "drift times must increase strictly and values must be finite".into(),
            ));
        }
        Ok(Self { times, values })
    }

    pub fn zero(t_end: f64) -> Self {
        Self {
            times: vec![0.0, t_end],
            values: vec![0.0, 0.0],
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.time_range();
        let slack = 1e-9 * (hi - lo).max(1.0);
        if !t.is_finite() || t < lo - slack || t > hi + slack {
            return Err(Error::Domain(format!("t = {t} outside drift range [{lo}, {hi}]")));
        }
        let t = t.clamp(lo, hi);
        let i = self
            .times
            .partition_point(|&g| g <= t)
            .saturating_sub(1)
            .min(self.times.len() - 2);
        let a = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        if a == 0.0 {
            return Ok(v0);
        }
        Ok(v0 + a * (v1 - v0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
