//! Adaptive grasp-force tracking in simulation.
//!
//! The crate covers the whole pipeline:
//!
//! - [`plant`]: nonlinear time-varying object model (generalized stiffness
//!   surface plus zero-force drift) and an assumption validator.
//! - [`scenario`]: random grasping processes and on-disk datasets.
//! - [`estimators`]: the sliding-window least-squares estimator and the
//!   recurrent residual estimator built on top of it.
//! - [`training`]: truncated BPTT training, evaluation, gradient checks.
//! - [`control`]: the stiffness-scaled PI force controller, closed-loop
//!   simulation, and spectral-norm stability analysis.
//! - [`metrics`]: sliding RMSE, asymptotic error, probing time, reports.
//!
//! The `gfl` binary wraps these behind `generate`, `train`, `eval`,
//! `simulate`, `stability` and `report` subcommands.

pub mod cli;
pub mod control;
pub mod error;
pub mod estimators;
pub mod interp;
pub mod kv;
pub mod metrics;
pub mod plant;
pub mod scenario;
pub mod training;

pub use error::{Error, Result};
