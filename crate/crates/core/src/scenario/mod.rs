//! Random grasping processes: force profiles, stiffness fields, drift curves,
//! and the labeled traces synthesized from them.

mod config;
pub mod dataset;
mod profile;
mod sampler;
mod trace;

pub use config::GenConfig;
pub use dataset::{generate_dataset, Dataset, DatasetSummary, Split};
pub use profile::ForceProfile;
pub use sampler::{
    sample_drift_curve, sample_force_profile, sample_plant, sample_stiffness_field,
    synthesize_trace, synthesize_trace_from, trace_rng, BaseStiffness, SampledProcess,
};
pub use trace::{format_sig9, GraspTrace, Provenance};
