//! Compare hand-written backpropagation through time with central finite
//! differences on a short fragment.

use gfl::estimators::{LsmConfig, RecurrentDims, RecurrentParams};
use gfl::scenario::{synthesize_trace, trace_rng, GenConfig};
use gfl::training::{grad_check, PreparedTrace};

fn main() -> gfl::Result<()> {
    let gen = GenConfig {
        duration: 0.09,
        ..GenConfig::default()
    };
    let trace = synthesize_trace(&gen, &mut trace_rng(11, 0))?.trace;
    // A short window keeps the stiffness input moving within ten steps.
    let lsm = LsmConfig {
        window: 3,
        rate_threshold: 0.0,
        ..LsmConfig::default()
    };
    let fragment = PreparedTrace::new(0, &trace, lsm, 0);

    let dims = RecurrentDims {
        hidden: 8,
        ..RecurrentDims::default()
    };
    let mut params = RecurrentParams::init(dims, 5)?;
    // Move the head off its identity start so every tensor gets gradient.
    let h = dims.head_offset();
    for (n, v) in params.values_mut()[h..h + dims.hidden].iter_mut().enumerate() {
        *v = 0.1 * (n as f64 - 3.5);
    }

    for eps in [1e-4, 1e-5, 1e-6] {
        let r = grad_check(&params, &fragment, eps)?;
        println!("epsilon {eps:e}: max relative error {:.2e}", r.max_rel_error);
        if eps == 1e-5 {
            for (name, err) in &r.tensors {
                println!("    {name:<16} {err:.2e}");
            }
        }
    }
    Ok(())
}
