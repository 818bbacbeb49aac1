use crate::error::{Error, Result};

/// Force samples `F(t)` at a uniform control period.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceProfile {
    samples: Vec<f64>,
    period: f64,
}

impl ForceProfile {
    pub fn new(samples: Vec<f64>, period: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Domain("empty force profile".into()));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Domain(format!("invalid period {period}")));
        }
        Ok(Self { samples, period })
    }

    /// `round(duration / period) + 1` samples at `level`.
    pub fn constant(level: f64, period: f64, duration: f64) -> Result<Self> {
        let n = (duration / period).round() as usize + 1;
        Self::new(vec![level; n], period)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.period
    }

    pub fn duration(&self) -> f64 {
        self.time(self.samples.len() - 1)
    }

    pub fn max_step(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    }
}
