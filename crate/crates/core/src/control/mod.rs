//! Adaptive PI force control: control law, closed-loop simulation and
//! stability analysis of the error recursion.

mod law;
mod scenarios;
mod sim;
mod stability;
mod target;

pub use law::{pi_command, ControllerState};
pub use scenarios::{Scenario, HARD_STIFFNESS, REGIME_SWITCH_FORCE, SOFT_STIFFNESS, SPRING_STIFFNESS};
pub use sim::{simulate_closed_loop, ClosedLoopResult, EstimatorMode, LoopConfig, RESULT_HEADER};
pub use stability::{
    convergence_interval, eta_matrix, spectral_norm, stability_map, system_matrix, StabilityMap, SystemMatrix,
};
pub use target::{plan_target_force, planned_profile, TargetProfile};
