use crate::error::{Error, Result};

/// Desired grasp force over time.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetProfile {
    Constant(f64),
    /// `before` until `at` seconds, `after` from then on.
    Step { before: f64, after: f64, at: f64 },
    /// Periodic trapezoid starting at `low`: hold, ramp up over `ramp`
    /// seconds, hold at `high`, ramp down.
    Trapezoid { period: f64, low: f64, high: f64, ramp: f64 },
    /// Sampled at fixed spacing, held after the last sample.
    Series { spacing: f64, samples: Vec<f64> },
}

impl Default for TargetProfile {
    fn default() -> Self {
        TargetProfile::Trapezoid {
            period: 10.0,
            low: 1.0,
            high: 6.0,
            ramp: 1.0,
        }
    }
}

impl TargetProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            TargetProfile::Constant(v) => v.is_finite(),
            TargetProfile::Step { before, after, at } => before.is_finite() && after.is_finite() && at.is_finite(),
            TargetProfile::Trapezoid { period, low, high, ramp } => {
                *period > 0.0 && *ramp >= 0.0 && 2.0 * ramp <= *period && low.is_finite() && high.is_finite()
            }
            TargetProfile::Series { spacing, samples } => {
                *spacing > 0.0 && !samples.is_empty() && samples.iter().all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid target profile {self:?}")))
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            TargetProfile::Constant(v) => *v,
            TargetProfile::Step { before, after, at } => {
                if t < *at {
                    *before
                } else {
                    *after
                }
            }
            TargetProfile::Trapezoid { period, low, high, ramp } => {
                let hold = 0.5 * (period - 2.0 * ramp);
                let tau = t.rem_euclid(*period);
                let span = high - low;
                if tau < hold {
                    *low
                } else if tau < hold + ramp {
                    low + span * (tau - hold) / ramp
                } else if tau < 2.0 * hold + ramp {
                    *high
                } else {
                    high - span * (tau - 2.0 * hold - ramp) / ramp
                }
            }
            TargetProfile::Series { spacing, samples } => {
                let pos = (t / spacing).max(0.0);
                let i = pos.floor() as usize;
                if i + 1 >= samples.len() {
                    return *samples.last().expect("validated non-empty");
                }
                let w = pos - i as f64;
                samples[i] + w * (samples[i + 1] - samples[i])
            }
        }
    }

    /// Natural evaluation window: the trapezoid period, if any.
    pub fn period(&self) -> Option<f64> {
        match self {
            TargetProfile::Trapezoid { period, .. } => Some(*period),
            _ => None,
        }
    }
}

/// Grasp force needed to hold a tangential load `F_T` with friction
/// coefficient `mu`, with a 1.2 safety factor and a 1 N floor.
pub fn plan_target_force(tangential: f64, mu: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("friction coefficient must be positive, got {mu}")));
    }
    if !(tangential >= 0.0) {
        return Err(Error::Domain(format!("tangential force must be non-negative, got {tangential}")));
    }
    Ok((1.2 * tangential / mu).max(1.0))
}

/// Target series planned from a sampled tangential load.
pub fn planned_profile(tangential: &[f64], mu: f64, spacing: f64) -> Result<TargetProfile> {
    let samples = tangential
        .iter()
        .map(|&f| plan_target_force(f, mu))
        .collect::<Result<Vec<_>>>()?;
    let p = TargetProfile::Series { spacing, samples };
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planning_examples() {
        assert_eq!(plan_target_force(0.0, 0.5).unwrap(), 1.0);
        assert!((plan_target_force(5.0, 0.5).unwrap() - 12.0).abs() < 1e-12);
        assert_eq!(plan_target_force(0.4, 0.5).unwrap(), 1.0);
        assert!(plan_target_force(1.0, 0.0).is_err());
    }

    #[test]
    fn trapezoid_shape() {
        let p = TargetProfile::default();
        assert_eq!(p.at(0.0), 1.0);
        assert_eq!(p.at(3.9), 1.0);
        assert!((p.at(4.5) - 3.5).abs() < 1e-12);
        assert_eq!(p.at(5.0), 6.0);
        assert_eq!(p.at(8.9), 6.0);
        assert!((p.at(9.5) - 3.5).abs() < 1e-12);
        assert!((p.at(10.0) - 1.0).abs() < 1e-12);
        assert!((p.at(14.5) - 3.5).abs() < 1e-9);
    }

    #[test]
    fn series_interpolates_and_holds() {
        let p = TargetProfile::Series {
            spacing: 0.5,
            samples: vec![1.0, 2.0, 4.0],
        };
        assert_eq!(p.at(0.25), 1.5);
        assert_eq!(p.at(0.75), 3.0);
        assert_eq!(p.at(9.0), 4.0);
    }
}
