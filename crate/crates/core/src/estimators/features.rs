/// Number of per-step input features fed to the recurrent estimator.
pub const N_FEATURES: usize = 6;

pub type Features = [f64; N_FEATURES];

const TINY: f64 = 1e-6;

fn log_magnitude(d: f64) -> f64 {
    ((d.abs() + TINY).ln() + 7.0) / 4.0
}

/// Maps raw measurements and the slope estimate to roughly unit-scale inputs.
///
/// Force and displacement increments enter on a log scale so their
/// difference tracks the local log-stiffness.
pub fn encode_features(force: f64, x: f64, k_lsm: f64, d_force: f64, d_x: f64) -> Features {
    [
        force / 10.0,
        k_lsm.ln() / 3.0,
        log_magnitude(d_force),
        log_magnitude(d_x),
        (d_force / 0.01).tanh(),
        x.asinh() / 4.0,
    ]
}

/// Streaming feature encoder; remembers the previous sample.
#[derive(Debug, Clone, Default)]
pub struct FeatureEncoder {
    prev: Option<(f64, f64)>,
}

impl FeatureEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.prev = None;
    }

    /// Features for this step without advancing the encoder.
    pub fn peek(&self, force: f64, x: f64, k_lsm: f64) -> Features {
        let (df, dx) = match self.prev {
            Some((f0, x0)) => (force - f0, x - x0),
            None => (0.0, 0.0),
        };
        encode_features(force, x, k_lsm, df, dx)
    }

    pub fn push(&mut self, force: f64, x: f64, k_lsm: f64) -> Features {
        let out = self.peek(force, x, k_lsm);
        self.prev = Some((force, x));
        out
    }
}
