//! Nonlinear time-varying object model.
//!
//! An object is described by a generalized-stiffness surface `k_t(F)` and a
//! zero-force drift curve `C'(t)`. Deformation at time `t` under force `F` is
//! `x(t, F) = ∫₀^F dF / k_t(F) + C'(t)`. The history argument of the stiffness
//! is folded into the time axis.

mod bounds;
mod drift;
mod field;
pub mod io;
mod validate;

pub use bounds::ModelBounds;
pub use drift::DriftCurve;
pub use field::{ForceSlice, StiffnessField};
pub use validate::{validate_assumptions, Assumption, Check, ValidationReport};

use crate::error::{Error, Result};

/// Current state of the simulated object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantState {
    pub t: f64,
    pub force: f64,
    pub x: f64,
}

/// Result of inverting the plant at a displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceReading {
    pub force: f64,
    /// Displacement fell below the zero-force position; contact is lost.
    pub separated: bool,
}

/// A stiffness field together with its zero-force drift.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub field: StiffnessField,
    pub drift: DriftCurve,
}

impl Plant {
    pub fn new(field: StiffnessField, drift: DriftCurve) -> Result<Self> {
        let (a0, a1) = field.time_range();
        let (b0, b1) = drift.time_range();
        if b0 > a0 + 1e-9 || b1 < a1 - 1e-9 {
            return Err(Error::Domain(format!(
                "drift curve covers [{b0}, {b1}] s but field covers [{a0}, {a1}] s"
            )));
        }
        Ok(Self { field, drift })
    }

    pub fn f_max(&self) -> f64 {
        self.field.f_max()
    }

    pub fn stiffness_at(&self, t: f64, force: f64) -> Result<f64> {
        self.field.stiffness_at(t, force)
    }

    /// Displacement `x(t, F)` in mm.
    pub fn deformation(&self, t: f64, force: f64) -> Result<f64> {
        let slice = self.field.slice_at(t)?;
        Ok(slice.compliance_integral(force)? + self.drift.at(t)?)
    }

    /// Inverse of [`Plant::deformation`] at fixed `t`.
    ///
    /// Below the zero-force position the object is out of contact and the
    /// reading is `0 N` with `separated` set.
    pub fn force_from_displacement(&self, t: f64, x: f64) -> Result<ForceReading> {
        let slice = self.field.slice_at(t)?;
        let offset = self.drift.at(t)?;
        let y = x - offset;
        if y <= 0.0 {
            return Ok(ForceReading {
                force: 0.0,
                separated: y < 0.0,
            });
        }
        let max = slice.total();
        if y > max {
            return Err(Error::Saturation {
                x,
                max: max + offset,
            });
        }
        Ok(ForceReading {
            force: slice.force_for_integral(y),
            separated: false,
        })
    }
}
