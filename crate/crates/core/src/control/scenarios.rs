use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::plant::{DriftCurve, Plant, StiffnessField};

/// Built-in simulated objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Linear spring, 2 N/mm.
    Spring,
    /// Soft (about 0.5 N/mm) below 3 N, hard (about 5 N/mm) above.
    TwoRegime,
    /// Stiffens irreversibly over time, like a compressed plastic material.
    Plastic,
    /// Creeps at constant force through a growing zero-force offset.
    Viscoelastic,
}

pub const SPRING_STIFFNESS: f64 = 2.0;
pub const SOFT_STIFFNESS: f64 = 0.5;
pub const HARD_STIFFNESS: f64 = 5.0;
pub const REGIME_SWITCH_FORCE: f64 = 3.0;

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn two_regime(force: f64) -> f64 {
    let w = 1.0 / (1.0 + (-(force - REGIME_SWITCH_FORCE) / 0.25).exp());
    SOFT_STIFFNESS + (HARD_STIFFNESS - SOFT_STIFFNESS) * w
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Spring,
        Scenario::TwoRegime,
        Scenario::Plastic,
        Scenario::Viscoelastic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spring => "spring",
            Scenario::TwoRegime => "two-regime",
            Scenario::Plastic => "plastic",
            Scenario::Viscoelastic => "viscoelastic",
        }
    }

    /// Builds the plant on `[0, duration]` s and `[0, f_max]` N.
    pub fn plant(self, duration: f64, f_max: f64) -> Result<Plant> {
        if !(duration > 0.0 && f_max > 0.0) {
            return Err(Error::Config("scenario needs positive duration and force range".into()));
        }
        let grid_t = linspace(0.0, duration, 121);
        let grid_f = linspace(0.0, f_max, 241);
        match self {
            Scenario::Spring => Plant::new(
                StiffnessField::constant(SPRING_STIFFNESS, duration, f_max)?,
                DriftCurve::zero(duration),
            ),
            Scenario::TwoRegime => Plant::new(
                StiffnessField::from_fn(grid_t, grid_f, |_, f| two_regime(f))?,
                DriftCurve::zero(duration),
            ),
            Scenario::Plastic => Plant::new(
                StiffnessField::from_fn(grid_t, grid_f, |t, f| {
                    (0.8 + 0.3 * f) * (1.0 + 0.4 * (1.0 - (-t / 15.0).exp()))
                })?,
                DriftCurve::zero(duration),
            ),
            Scenario::Viscoelastic => {
                let times = linspace(0.0, duration, 601);
                let values = times.iter().map(|t| 0.6 * (1.0 - (-t / 8.0).exp())).collect();
                Plant::new(
                    StiffnessField::from_fn(grid_t, grid_f, |_, f| 1.0 + 0.15 * f)?,
                    DriftCurve::new(times, values)?,
                )
            }
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}
