use super::bptt::{segment_backward, segment_forward, Carry, PreparedTrace, Workspace};
use crate::error::{Error, Result};
use crate::estimators::RecurrentParams;

/// Agreement between backpropagated and finite-difference gradients.
#[derive(Debug, Clone)]
pub struct GradCheck {
    /// Largest per-tensor relative error.
    pub max_rel_error: f64,
    /// `(tensor name, relative error)`, where the error of a tensor is the
    /// largest absolute entry difference over the largest entry magnitude.
    pub tensors: Vec<(String, f64)>,
}

fn objective(params: &RecurrentParams, trace: &PreparedTrace) -> Result<f64> {
    let mut carry = Carry::zeros(params.dims());
    let mut ws = Workspace::default();
    let seg = segment_forward(params, trace, 0..trace.len(), &mut carry, &mut ws)?;
    if seg.count == 0 {
        return Err(Error::Dimension("fragment has no scored steps".into()));
    }
    Ok(seg.sum / seg.count as f64)
}

/// Analytic gradient of the mean scored loss over the whole fragment.
pub fn analytic_gradient(params: &RecurrentParams, trace: &PreparedTrace) -> Result<Vec<f64>> {
    let mut carry = Carry::zeros(params.dims());
    let mut ws = Workspace::default();
    let seg = segment_forward(params, trace, 0..trace.len(), &mut carry, &mut ws)?;
    if seg.count == 0 {
        return Err(Error::Dimension("fragment has no scored steps".into()));
    }
    let mut grad = vec![0.0; params.values().len()];
    segment_backward(params, trace, 0..trace.len(), &ws, &mut grad);
    grad.iter_mut().for_each(|g| *g /= seg.count as f64);
    Ok(grad)
}

/// Compares [`analytic_gradient`] with central differences of step `epsilon`
/// for every parameter.
pub fn grad_check(params: &RecurrentParams, trace: &PreparedTrace, epsilon: f64) -> Result<GradCheck> {
    let analytic = analytic_gradient(params, trace)?;
    let mut p = params.clone();
    let mut numeric = vec![0.0; analytic.len()];
    for i in 0..numeric.len() {
        let orig = p.values()[i];
        p.values_mut()[i] = orig + epsilon;
        let up = objective(&p, trace)?;
        p.values_mut()[i] = orig - epsilon;
        let down = objective(&p, trace)?;
        p.values_mut()[i] = orig;
        numeric[i] = (up - down) / (2.0 * epsilon);
    }
    let dims = params.dims();
    let mut spans = Vec::new();
    for l in 0..dims.layers {
        let off = dims.layer_offset(l);
        let wl = dims.weight_len(l);
        spans.push((format!("layer{l}.weights"), off..off + wl));
        spans.push((format!("layer{l}.bias"), off + wl..off + wl + 4 * dims.hidden));
    }
    let h = dims.head_offset();
    spans.push(("head.weights".into(), h..h + dims.hidden));
    spans.push(("head.bias".into(), h + dims.hidden..h + dims.hidden + 1));
    spans.push(("scale".into(), h + dims.hidden + 1..h + dims.hidden + 3));

    let tensors: Vec<(String, f64)> = spans
        .into_iter()
        .map(|(name, r)| {
            let (a, n) = (&analytic[r.clone()], &numeric[r]);
            let diff = a.iter().zip(n).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            let mag = a.iter().chain(n).map(|x| x.abs()).fold(0.0, f64::max);
            let rel = if mag == 0.0 { 0.0 } else { diff / mag };
            (name, rel)
        })
        .collect();
    let max_rel_error = tensors.iter().map(|t| t.1).fold(0.0, f64::max);
    Ok(GradCheck { max_rel_error, tensors })
}
