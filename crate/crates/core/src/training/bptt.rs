//! Truncated backpropagation through time for the recurrent estimator.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::estimators::recurrent::{correction, rescale};
use crate::estimators::{
    lsm_series, lstm_layer_step, recurrent_forward, FeatureEncoder, Features, LsmConfig, RecurrentDims,
    RecurrentParams, RecurrentState, N_FEATURES,
};
use crate::scenario::GraspTrace;

/// A trace with its slope estimates and network inputs precomputed.
#[derive(Debug, Clone)]
pub struct PreparedTrace {
    /// Identifier used in diagnostics.
    pub id: usize,
    pub force: Vec<f64>,
    pub x: Vec<f64>,
    pub k_lsm: Vec<f64>,
    pub k_true: Vec<f64>,
    pub features: Vec<Features>,
    /// Steps at the start that carry no loss.
    pub skip: usize,
}

impl PreparedTrace {
    pub fn new(id: usize, trace: &GraspTrace, lsm: LsmConfig, skip: usize) -> Self {
        let k_lsm = lsm_series(lsm, &trace.force, &trace.x);
        let mut enc = FeatureEncoder::new();
        let features = trace
            .force
            .iter()
            .zip(&trace.x)
            .zip(&k_lsm)
            .map(|((&f, &x), &k)| enc.push(f, x, k))
            .collect();
        Self {
            id,
            force: trace.force.clone(),
            x: trace.x.clone(),
            k_lsm,
            k_true: trace.k_true.clone(),
            features,
            skip,
        }
    }

    pub fn len(&self) -> usize {
        self.k_true.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_true.is_empty()
    }

    /// Number of steps that contribute to the loss.
    pub fn scored_steps(&self) -> usize {
        self.len().saturating_sub(self.skip)
    }
}

/// Loss and its derivative with respect to `η`.
pub(crate) fn loss_and_slope(eta: f64) -> (f64, f64) {
    let r = eta.recip();
    let d = eta - r;
    (d * d, 2.0 * d * (1.0 + r * r))
}

/// Hidden and cell state carried between truncated segments.
#[derive(Debug, Clone)]
pub struct Carry {
    pub h: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl Carry {
    pub fn zeros(dims: &RecurrentDims) -> Self {
        Self {
            h: vec![vec![0.0; dims.hidden]; dims.layers],
            c: vec![vec![0.0; dims.hidden]; dims.layers],
        }
    }
}

/// Activations of one segment, kept for the backward pass.
#[derive(Debug, Clone, Default)]
pub struct Workspace {
    /// Per layer, `len × 4H` activated gates.
    gates: Vec<Vec<f64>>,
    /// Per layer, `(len + 1) × H`; row 0 is the carried-in state.
    c: Vec<Vec<f64>>,
    h: Vec<Vec<f64>>,
    /// Per step: correction factor, its sigmoid, rescaled slope, unclamped flag.
    head: Vec<(f64, f64, f64, bool)>,
}

impl Workspace {
    fn prepare(&mut self, dims: &RecurrentDims, len: usize) {
        let hid = dims.hidden;
        self.gates.resize(dims.layers, Vec::new());
        self.c.resize(dims.layers, Vec::new());
        self.h.resize(dims.layers, Vec::new());
        for l in 0..dims.layers {
            self.gates[l].resize(len * 4 * hid, 0.0);
            self.c[l].resize((len + 1) * hid, 0.0);
            self.h[l].resize((len + 1) * hid, 0.0);
        }
        self.head.resize(len, (0.0, 0.0, 0.0, false));
    }
}

/// Sum of scored losses over a segment and how many steps were scored.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SegmentLoss {
    pub sum: f64,
    pub count: usize,
}

/// Runs the network over `range`, starting from `carry`, and records the
/// activations. On return `carry` holds the state after the segment.
pub fn segment_forward(
    params: &RecurrentParams,
    trace: &PreparedTrace,
    range: Range<usize>,
    carry: &mut Carry,
    ws: &mut Workspace,
) -> Result<SegmentLoss> {
    let dims = *params.dims();
    let hid = dims.hidden;
    let len = range.len();
    ws.prepare(&dims, len);
    for l in 0..dims.layers {
        ws.c[l][..hid].copy_from_slice(&carry.c[l]);
        ws.h[l][..hid].copy_from_slice(&carry.h[l]);
    }
    let mut out = SegmentLoss::default();
    for (s, t) in range.clone().enumerate() {
        for l in 0..dims.layers {
            let (w, b) = params.layer(l);
            let (below, here) = ws.h.split_at_mut(l);
            let (h_prev, h_next) = here[0].split_at_mut((s + 1) * hid);
            let input: &[f64] = if l == 0 {
                &trace.features[t]
            } else {
                &below[l - 1][(s + 1) * hid..(s + 2) * hid]
            };
            let (c_prev, c_next) = ws.c[l].split_at_mut((s + 1) * hid);
            lstm_layer_step(
                w,
                b,
                input,
                &h_prev[s * hid..],
                &c_prev[s * hid..],
                &mut ws.gates[l][s * 4 * hid..(s + 1) * 4 * hid],
                &mut c_next[..hid],
                &mut h_next[..hid],
            );
        }
        let top = &ws.h[dims.layers - 1][(s + 1) * hid..(s + 2) * hid];
        let (g, sig) = correction(params, top);
        let (scale, live) = rescale(params, trace.k_lsm[t]);
        ws.head[s] = (g, sig, scale, live);
        if t >= trace.skip {
            let (l, _) = loss_and_slope(g * scale / trace.k_true[t]);
            if !l.is_finite() {
                return Err(Error::Diverged { trace: trace.id, step: t });
            }
            out.sum += l;
            out.count += 1;
        }
    }
    for l in 0..dims.layers {
        carry.c[l].copy_from_slice(&ws.c[l][len * hid..]);
        carry.h[l].copy_from_slice(&ws.h[l][len * hid..]);
    }
    Ok(out)
}

/// Accumulates into `grad` the gradient of the summed scored loss of the
/// segment last run through [`segment_forward`] with the same workspace.
/// Gradients are not propagated into the carried-in state.
pub fn segment_backward(
    params: &RecurrentParams,
    trace: &PreparedTrace,
    range: Range<usize>,
    ws: &Workspace,
    grad: &mut [f64],
) {
    let dims = *params.dims();
    let hid = dims.hidden;
    let h4 = 4 * hid;
    let layers = dims.layers;
    let g_max = dims.g_max;
    let head_off = dims.head_offset();
    let (head_w, _) = params.head();
    let head_w = head_w.to_vec();

    let mut dh_next = vec![vec![0.0; hid]; layers];
    let mut dc_next = vec![vec![0.0; hid]; layers];
    let mut dh = vec![0.0; hid];
    let mut dz = vec![0.0; h4];
    let mut dcat = vec![0.0; N_FEATURES.max(hid) + hid];

    for (s, t) in range.enumerate().rev() {
        let (g, sig, scale, live) = ws.head[s];
        let top_h = &ws.h[layers - 1][(s + 1) * hid..(s + 2) * hid];
        let mut dzh = 0.0;
        if t >= trace.skip {
            let k = trace.k_true[t];
            let (_, dl_deta) = loss_and_slope(g * scale / k);
            let dk = dl_deta / k;
            dzh = dk * scale * g_max * sig * (1.0 - sig);
            if live {
                let ds = dk * g;
                grad[head_off + hid + 1] += ds * trace.k_lsm[t];
                grad[head_off + hid + 2] += ds;
            }
            for j in 0..hid {
                grad[head_off + j] += dzh * top_h[j];
            }
            grad[head_off + hid] += dzh;
        }

        for l in (0..layers).rev() {
            // dh: from the layer above (already in `dh`) or the head
            if l == layers - 1 {
                for j in 0..hid {
                    dh[j] = dzh * head_w[j] + dh_next[l][j];
                }
            } else {
                for j in 0..hid {
                    dh[j] += dh_next[l][j];
                }
            }
            let gates = &ws.gates[l][s * h4..(s + 1) * h4];
            let c_prev = &ws.c[l][s * hid..(s + 1) * hid];
            let c = &ws.c[l][(s + 1) * hid..(s + 2) * hid];
            for k in 0..hid {
                let (i, f, gg, o) = (gates[k], gates[hid + k], gates[2 * hid + k], gates[3 * hid + k]);
                let tc = c[k].tanh();
                let dc = dc_next[l][k] + dh[k] * o * (1.0 - tc * tc);
                dz[k] = dc * gg * i * (1.0 - i);
                dz[hid + k] = dc * c_prev[k] * f * (1.0 - f);
                dz[2 * hid + k] = dc * i * (1.0 - gg * gg);
                dz[3 * hid + k] = dh[k] * tc * o * (1.0 - o);
                dc_next[l][k] = dc * f;
            }

            let n_in = dims.layer_inputs(l);
            let input: &[f64] = if l == 0 {
                &trace.features[t]
            } else {
                &ws.h[l - 1][(s + 1) * hid..(s + 2) * hid]
            };
            let h_prev = &ws.h[l][s * hid..(s + 1) * hid];
            let (w, _) = params.layer(l);
            let off = dims.layer_offset(l);
            let wl = dims.weight_len(l);
            let (gw, rest) = grad[off..].split_at_mut(wl);
            for (gb, &d) in rest[..h4].iter_mut().zip(&dz) {
                *gb += d;
            }
            let cat = &mut dcat[..n_in + hid];
            for (j, a) in input.iter().chain(h_prev).enumerate() {
                let row = &w[j * h4..(j + 1) * h4];
                let grow = &mut gw[j * h4..(j + 1) * h4];
                let mut acc = 0.0;
                for k in 0..h4 {
                    grow[k] += a * dz[k];
                    acc += row[k] * dz[k];
                }
                cat[j] = acc;
            }
            dh_next[l].copy_from_slice(&cat[n_in..]);
            if l > 0 {
                dh.copy_from_slice(&cat[..hid]);
            }
        }
    }
}

/// Streaming inference over a prepared trace.
pub fn predict(params: &RecurrentParams, trace: &PreparedTrace) -> Result<Vec<f64>> {
    let mut st = RecurrentState::new(params.dims());
    (0..trace.len())
        .map(|t| recurrent_forward(params, &mut st, trace.force[t], trace.x[t], trace.k_lsm[t]))
        .collect()
}

/// Mean scored loss of one trace under `params`.
pub fn trace_loss(params: &RecurrentParams, trace: &PreparedTrace) -> Result<f64> {
    let est = predict(params, trace)?;
    mean_scored_loss(&est, trace)
}

pub(crate) fn mean_scored_loss(est: &[f64], trace: &PreparedTrace) -> Result<f64> {
    if trace.scored_steps() == 0 {
        return Err(Error::Dimension(format!("trace {} has no scored steps", trace.id)));
    }
    let mut sum = 0.0;
    for t in trace.skip..trace.len() {
        let (l, _) = loss_and_slope(est[t] / trace.k_true[t]);
        if !l.is_finite() {
            return Err(Error::Diverged { trace: trace.id, step: t });
        }
        sum += l;
    }
    Ok(sum / trace.scored_steps() as f64)
}
