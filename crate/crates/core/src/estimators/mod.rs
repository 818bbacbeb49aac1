//! Online generalized-stiffness estimators.
//!
//! [`LsmState`] fits the slope of the latest force/displacement samples and
//! holds its value while the loading rate is low. The recurrent estimator
//! multiplies a learned correction factor onto a learned positive rescaling
//! of that slope estimate.

pub mod checkpoint;
mod features;
mod loss;
mod lsm;
pub(crate) mod recurrent;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use features::{encode_features, FeatureEncoder, Features, N_FEATURES};
pub use loss::{ratio_loss, sequence_loss, EstimateRatio};
pub use lsm::{lsm_series, LsmConfig, LsmState};
pub use recurrent::{
    lstm_layer_step, recurrent_forward, RecurrentDims, RecurrentEstimator, RecurrentParams,
    RecurrentState, POSITIVITY_FLOOR,
};
