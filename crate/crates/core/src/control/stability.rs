use rayon::prelude::*;

use crate::error::{Error, Result};

/// Error-recursion matrix `A = [[1−I, 1−P], [−I, 1−P]]` acting on `(s, e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemMatrix {
    /// Dimensionless proportional loop gain `K_P·T·k/k̂`.
    pub p: f64,
    /// Dimensionless integral loop gain `K_I·T·k/k̂`.
    pub i: f64,
    pub a: [[f64; 2]; 2],
}

pub fn system_matrix(p: f64, i: f64) -> SystemMatrix {
    SystemMatrix {
        p,
        i,
        a: [[1.0 - i, 1.0 - p], [-i, 1.0 - p]],
    }
}

/// Matrix for estimate ratio `η = k̂/k` under the default gains
/// (`P = 1/η`, `I = 1/(2η)`).
pub fn eta_matrix(eta: f64) -> SystemMatrix {
    system_matrix(1.0 / eta, 0.5 / eta)
}

impl SystemMatrix {
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let a = &self.a;
        [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
    }
}

/// Largest singular value of a 2×2 matrix, in closed form.
pub fn spectral_norm(a: &[[f64; 2]; 2]) -> f64 {
    let [[p, q], [r, s]] = *a;
    0.5 * ((p + s).hypot(q - r) + (p - s).hypot(q + r))
}

/// Spectral norm sampled on a rectangular `(I, P)` grid.
#[derive(Debug, Clone)]
pub struct StabilityMap {
    pub i_values: Vec<f64>,
    pub p_values: Vec<f64>,
    /// Row-major by `I`: `norms[a * p_values.len() + b]` is at `(I_a, P_b)`.
    pub norms: Vec<f64>,
    /// `(I, P, norm)` of the smallest norm. The minimum is flat along
    /// `I = 0.5`, so nodes within 1e-12 of it are ranked by Frobenius norm.
    pub argmin: (f64, f64, f64),
}

impl StabilityMap {
    pub fn norm(&self, a: usize, b: usize) -> f64 {
        self.norms[a * self.p_values.len() + b]
    }

    /// Whether `‖A‖ < 1` at grid node `(a, b)`.
    pub fn contracting(&self, a: usize, b: usize) -> bool {
        self.norm(a, b) < 1.0
    }

    /// `I,P,norm` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.norms.len() * 24);
        out.push_str("I,P,norm\n");
        for (a, &i) in self.i_values.iter().enumerate() {
            for (b, &p) in self.p_values.iter().enumerate() {
                out.push_str(&format!("{i:.6},{p:.6},{:.9}\n", self.norm(a, b)));
            }
        }
        out
    }
}

fn axis(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!("bad grid axis [{lo}, {hi}] step {step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

/// Evaluates `‖A(P, I)‖` on `[i_lo, i_hi] × [p_lo, p_hi]` with spacing `step`.
pub fn stability_map(i_range: (f64, f64), p_range: (f64, f64), step: f64) -> Result<StabilityMap> {
    let i_values = axis(i_range.0, i_range.1, step)?;
    let p_values = axis(p_range.0, p_range.1, step)?;
    let norms: Vec<f64> = i_values
        .par_iter()
        .flat_map_iter(|&i| p_values.iter().map(move |&p| spectral_norm(&system_matrix(p, i).a)))
        .collect();
    let np = p_values.len();
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let frobenius = |k: usize| {
        let a = system_matrix(p_values[k % np], i_values[k / np]).a;
        a.iter().flatten().map(|v| v * v).sum::<f64>()
    };
    let mut best = None::<(usize, f64)>;
    for (k, &n) in norms.iter().enumerate() {
        if n <= min + 1e-12 {
            let f = frobenius(k);
            if best.map_or(true, |(_, bf)| f < bf) {
                best = Some((k, f));
            }
        }
    }
    let best = best.map_or(0, |b| b.0);
    let argmin = (i_values[best / np], p_values[best % np], norms[best]);
    Ok(StabilityMap {
        i_values,
        p_values,
        norms,
        argmin,
    })
}

fn bisect(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Range of `η` around 1 on which `‖A(η)‖ < 1`, found by bisection on each
/// side to within `tol`.
pub fn convergence_interval(tol: f64) -> Result<(f64, f64)> {
    if !(tol > 0.0) {
        return Err(Error::Config("tolerance must be positive".into()));
    }
    let g = |eta: f64| spectral_norm(&eta_matrix(eta).a) - 1.0;
    // ‖A‖ grows without bound as η → 0 and tends to the golden ratio as η → ∞
    let mut lo = 0.5;
    while g(lo) <= 0.0 {
        lo *= 0.5;
    }
    let mut hi = 2.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    Ok((bisect(lo, 1.0, tol, g), bisect(1.0, hi, tol, g)))
}
