//! Spectral norm of the closed-loop error recursion over normalized gains,
//! and the range of stiffness-estimate ratios it guarantees to converge.

use gfl::control::{convergence_interval, eta_matrix, spectral_norm, stability_map};

fn main() -> gfl::Result<()> {
    let map = stability_map((0.0, 1.5), (0.0, 2.0), 0.005)?;
    let (i, p, norm) = map.argmin;
    let contracting = map.norms.iter().filter(|&&n| n < 1.0).count();
    println!("grid {} x {}", map.i_values.len(), map.p_values.len());
    println!("minimum norm {norm:.6} at I = {i:.3}, P = {p:.3}");
    println!(
        "contracting nodes: {contracting} of {} ({:.1}%)",
        map.norms.len(),
        100.0 * contracting as f64 / map.norms.len() as f64
    );

    let (lo, hi) = convergence_interval(1e-12)?;
    println!("norm < 1 for {lo:.6} < η < {hi:.6}");
    for eta in [0.3, 0.5, lo, 0.7, 1.0, 2.0, hi, 3.0] {
        let m = eta_matrix(eta);
        let [[a, b], [c, d]] = m.a;
        let det = a * d - b * c;
        // Spectral radius of a 2x2 matrix with complex or real eigenvalues.
        let tr = a + d;
        let disc = tr * tr - 4.0 * det;
        let radius = if disc < 0.0 {
            det.sqrt()
        } else {
            0.5 * (tr.abs() + disc.sqrt())
        };
        println!("  η = {eta:<8.4} ‖A‖ = {:.4}  ρ(A) = {radius:.4}", spectral_norm(&m.a));
    }
    Ok(())
}
