use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::{FeatureEncoder, Features, N_FEATURES};
use super::lsm::{LsmConfig, LsmState};
use crate::error::{Error, Result};

/// Lower clamp on the rescaled slope estimate, N/mm.
pub const POSITIVITY_FLOOR: f64 = 1e-4;

/// Architecture of the recurrent estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrentDims {
    pub layers: usize,
    pub hidden: usize,
    pub inputs: usize,
    /// Upper bound of the correction factor.
    pub g_max: f64,
}

impl Default for RecurrentDims {
    fn default() -> Self {
        Self {
            layers: 2,
            hidden: 16,
            inputs: N_FEATURES,
            g_max: 4.0,
        }
    }
}

impl RecurrentDims {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden == 0 {
            return Err(Error::Dimension("recurrent net needs at least one layer and unit".into()));
        }
        if self.inputs != N_FEATURES {
            return Err(Error::Dimension(format!(
                "input width {} does not match the {N_FEATURES} encoded features",
                self.inputs
            )));
        }
        if !(self.g_max > 1.0) || !self.g_max.is_finite() {
            return Err(Error::Dimension("g_max must exceed 1".into()));
        }
        Ok(())
    }

    pub fn layer_inputs(&self, layer: usize) -> usize {
        if layer == 0 {
            self.inputs
        } else {
            self.hidden
        }
    }

    /// Weight matrix length of a layer: `(inputs + hidden) × 4·hidden`.
    pub fn weight_len(&self, layer: usize) -> usize {
        (self.layer_inputs(layer) + self.hidden) * 4 * self.hidden
    }

    pub fn layer_offset(&self, layer: usize) -> usize {
        (0..layer).map(|l| self.weight_len(l) + 4 * self.hidden).sum()
    }

    pub fn head_offset(&self) -> usize {
        self.layer_offset(self.layers)
    }

    pub fn param_count(&self) -> usize {
        self.head_offset() + self.hidden + 3
    }
}

/// Flat parameter vector.
///
/// Per layer: the gate weights stored input-major (row `j` holds the
/// `4·hidden` gate pre-activation contributions of input `j`, with the
/// layer input first and the previous hidden state after it), then the
/// `4·hidden` bias. Gate order is input, forget, cell, output. After the
/// layers: head weights (`hidden`), head bias, scale weight, scale bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentParams {
    dims: RecurrentDims,
    values: Vec<f64>,
}

impl RecurrentParams {
    pub fn from_values(dims: RecurrentDims, values: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if values.len() != dims.param_count() {
            return Err(Error::Dimension(format!(
                "expected {} parameters, got {}",
                dims.param_count(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {i}")));
        }
        Ok(Self { dims, values })
    }

    /// Zero recurrent weights with the correction factor pinned at 1 and the
    /// scale at `(1, 0)`, so the output equals the slope estimate.
    pub fn identity(dims: RecurrentDims) -> Result<Self> {
        dims.validate()?;
        let mut p = Self {
            dims,
            values: vec![0.0; dims.param_count()],
        };
        p.set_identity_head();
        for l in 0..dims.layers {
            let h = dims.hidden;
            p.bias_mut(l)[h..2 * h].fill(1.0);
        }
        Ok(p)
    }

    /// Uniform `±1/√hidden` recurrent weights with the identity head.
    pub fn init(dims: RecurrentDims, seed: u64) -> Result<Self> {
        let mut p = Self::identity(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = 1.0 / (dims.hidden as f64).sqrt();
        for l in 0..dims.layers {
            let (w, _) = p.layer_mut(l);
            for v in w {
                *v = rng.gen_range(-a..a);
            }
        }
        Ok(p)
    }

    fn set_identity_head(&mut self) {
        let h = self.dims.hidden;
        let off = self.dims.head_offset();
        let g_max = self.dims.g_max;
        self.values[off..off + h].fill(0.0);
        self.values[off + h] = -(g_max - 1.0).ln();
        self.values[off + h + 1] = 1.0;
        self.values[off + h + 2] = 0.0;
    }

    pub fn dims(&self) -> &RecurrentDims {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let off = self.dims.layer_offset(l);
        let wl = self.dims.weight_len(l);
        let (w, rest) = self.values[off..].split_at(wl);
        (w, &rest[..4 * self.dims.hidden])
    }

    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let off = self.dims.layer_offset(l);
        let wl = self.dims.weight_len(l);
        let h4 = 4 * self.dims.hidden;
        let (w, rest) = self.values[off..].split_at_mut(wl);
        (w, &mut rest[..h4])
    }

    fn bias_mut(&mut self, l: usize) -> &mut [f64] {
        self.layer_mut(l).1
    }

    pub fn head(&self) -> (&[f64], f64) {
        let off = self.dims.head_offset();
        let h = self.dims.hidden;
        (&self.values[off..off + h], self.values[off + h])
    }

    /// Scale affine `(w, b)` applied to the slope estimate.
    pub fn scale(&self) -> (f64, f64) {
        let off = self.dims.head_offset() + self.dims.hidden;
        (self.values[off + 1], self.values[off + 2])
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// One LSTM cell update.
///
/// `gates` receives the activated gates `[i, f, g, o]`, each of width
/// `hidden`; `c` and `h` receive the new cell and hidden state.
#[allow(clippy::too_many_arguments)]
pub fn lstm_layer_step(
    w: &[f64],
    b: &[f64],
    input: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    gates: &mut [f64],
    c: &mut [f64],
    h: &mut [f64],
) {
    let hid = h_prev.len();
    let h4 = 4 * hid;
    gates.copy_from_slice(b);
    for (j, &a) in input.iter().chain(h_prev).enumerate() {
        if a == 0.0 {
            continue;
        }
        let row = &w[j * h4..(j + 1) * h4];
        for (z, &wv) in gates.iter_mut().zip(row) {
            *z += a * wv;
        }
    }
    let (gi, rest) = gates.split_at_mut(hid);
    let (gf, rest) = rest.split_at_mut(hid);
    let (gg, go) = rest.split_at_mut(hid);
    for k in 0..hid {
        gi[k] = sigmoid(gi[k]);
        gf[k] = sigmoid(gf[k]);
        gg[k] = gg[k].tanh();
        go[k] = sigmoid(go[k]);
        c[k] = gf[k] * c_prev[k] + gi[k] * gg[k];
        h[k] = go[k] * c[k].tanh();
    }
}

/// Correction factor `g = g_max·σ(head_w·h + head_b)`.
pub(crate) fn correction(params: &RecurrentParams, h_top: &[f64]) -> (f64, f64) {
    let (hw, hb) = params.head();
    let z = hb + hw.iter().zip(h_top).map(|(a, b)| a * b).sum::<f64>();
    // keeps g representable and strictly positive
    let s = sigmoid(z.max(-700.0));
    (params.dims.g_max * s, s)
}

/// Rescaled slope estimate `max(w·k̂_E + b, ε)` and whether it is unclamped.
pub(crate) fn rescale(params: &RecurrentParams, k_lsm: f64) -> (f64, bool) {
    let (w, b) = params.scale();
    let s = w * k_lsm + b;
    if s > POSITIVITY_FLOOR {
        (s, true)
    } else {
        (POSITIVITY_FLOOR, false)
    }
}

/// Per-layer hidden and cell vectors of one trace.
#[derive(Debug, Clone)]
pub struct RecurrentState {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub step: usize,
    encoder: FeatureEncoder,
    gates: Vec<f64>,
    scratch: (Vec<f64>, Vec<f64>),
}

impl RecurrentState {
    /// Zeroed state, as at contact.
    pub fn new(dims: &RecurrentDims) -> Self {
        let zeros = || vec![vec![0.0; dims.hidden]; dims.layers];
        Self {
            h: zeros(),
            c: zeros(),
            step: 0,
            encoder: FeatureEncoder::new(),
            gates: vec![0.0; 4 * dims.hidden],
            scratch: (vec![0.0; dims.hidden], vec![0.0; dims.hidden]),
        }
    }

    pub(crate) fn advance(&mut self, params: &RecurrentParams, x: &Features) {
        let dims = params.dims;
        for l in 0..dims.layers {
            let (w, b) = params.layer(l);
            let (c_new, h_new) = &mut self.scratch;
            {
                let input: &[f64] = if l == 0 { x } else { &self.h[l - 1] };
                lstm_layer_step(w, b, input, &self.h[l], &self.c[l], &mut self.gates, c_new, h_new);
            }
            std::mem::swap(&mut self.c[l], c_new);
            std::mem::swap(&mut self.h[l], h_new);
        }
    }
}

/// Advances the recurrent state by one sample and returns `k̂ > 0`.
///
/// Non-finite inputs are rejected before the state is touched.
pub fn recurrent_forward(
    params: &RecurrentParams,
    state: &mut RecurrentState,
    force: f64,
    x: f64,
    k_lsm: f64,
) -> Result<f64> {
    if !(force.is_finite() && x.is_finite() && k_lsm.is_finite()) {
        return Err(Error::NonFinite(format!(
            "estimator input at step {}: F={force}, x={x}, k_E={k_lsm}",
            state.step
        )));
    }
    if !(k_lsm > 0.0) {
        return Err(Error::Domain(format!("slope estimate must be positive, got {k_lsm}")));
    }
    let feats = state.encoder.push(force, x, k_lsm);
    state.advance(params, &feats);
    state.step += 1;
    let (g, _) = correction(params, &state.h[params.dims.layers - 1]);
    let (s, _) = rescale(params, k_lsm);
    Ok(g * s)
}

/// Slope estimator followed by the recurrent correction, for one trace.
#[derive(Debug, Clone)]
pub struct RecurrentEstimator<'a> {
    params: &'a RecurrentParams,
    lsm: LsmState,
    state: RecurrentState,
}

impl<'a> RecurrentEstimator<'a> {
    pub fn new(params: &'a RecurrentParams, lsm: LsmConfig) -> Self {
        Self {
            params,
            lsm: LsmState::new(lsm),
            state: RecurrentState::new(&params.dims),
        }
    }

    pub fn step(&mut self, force: f64, x: f64) -> Result<f64> {
        if !(force.is_finite() && x.is_finite()) {
            return Err(Error::NonFinite(format!("measurement F={force}, x={x}")));
        }
        let k_lsm = self.lsm.update(force, x);
        recurrent_forward(self.params, &mut self.state, force, x, k_lsm)
    }

    pub fn series(params: &RecurrentParams, lsm: LsmConfig, force: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        if force.len() != x.len() {
            return Err(Error::Dimension("force and displacement lengths differ".into()));
        }
        let mut est = RecurrentEstimator::new(params, lsm);
        force.iter().zip(x).map(|(&f, &x)| est.step(f, x)).collect()
    }
}
