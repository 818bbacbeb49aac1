use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ForceProfile, GenConfig, GraspTrace};
use crate::error::Result;
use crate::interp::MonotoneCubic;
use crate::plant::{DriftCurve, Plant, StiffnessField};

/// Independent random stream for trace `index` of a dataset with `seed`.
pub fn trace_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn linspace(end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| end * i as f64 / (n - 1) as f64).collect()
}

/// Moves `values` toward themselves with at most `max_step` change between
/// neighbours, starting from `values[0]`.
fn slew_limit(values: &mut [f64], max_step: f64) {
    for i in 1..values.len() {
        let prev = values[i - 1];
        values[i] = prev + (values[i] - prev).clamp(-max_step, max_step);
    }
}

/// Random force profile: uniform waypoint levels joined by a monotone cubic,
/// then rate limited below `delta_f`.
pub fn sample_force_profile<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Result<ForceProfile> {
    let count = rng.gen_range(cfg.waypoints_min..=cfg.waypoints_max);
    let spacing = cfg.duration / (count - 1) as f64;
    let mut times = Vec::with_capacity(count);
    for i in 0..count {
        let jitter = if i == 0 || i == count - 1 {
            0.0
        } else {
            rng.gen_range(-0.25..=0.25) * spacing
        };
        times.push(i as f64 * spacing + jitter);
    }
    let levels: Vec<f64> = (0..count)
        .map(|_| uniform(rng, cfg.force_lo, cfg.force_hi))
        .collect();
    let curve = MonotoneCubic::new(times, levels);
    let mut samples: Vec<f64> = (0..=cfg.steps())
        .map(|i| curve.eval(i as f64 * cfg.period))
        .collect();
    slew_limit(&mut samples, 0.999 * cfg.bounds.delta_f);
    ForceProfile::new(samples, cfg.period)
}

fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

/// The time-invariant base curve `ln k_0(F)` sampled on the force grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseStiffness {
    pub grid_f: Vec<f64>,
    pub k0: Vec<f64>,
}

impl BaseStiffness {
    /// `∫₀^{F_m} dF / k_0`, the typical deformation magnitude in mm.
    pub fn typical_deformation(&self) -> f64 {
        let field = StiffnessField::new(
            vec![0.0, 1.0],
            self.grid_f.clone(),
            self.k0.iter().chain(self.k0.iter()).copied().collect(),
        )
        .expect("base stiffness is positive on a valid grid");
        field.slice_at(0.0).expect("t = 0 is in range").total()
    }
}

/// Random stiffness surface `k_t(F) = k_0(F) exp(d(t))`.
///
/// `ln k_0` is a monotone cubic through uniformly drawn `ln k` waypoints.
/// The drift `d(t)` is a random smooth curve starting at zero, limited so that
/// per-step relative change stays below `delta_k`, total change below
/// `cap_delta_k`, and the constant-force drift below `delta_kf`.
pub fn sample_stiffness_field<R: Rng>(
    cfg: &GenConfig,
    rng: &mut R,
) -> Result<(StiffnessField, BaseStiffness)> {
    let b = &cfg.bounds;
    let grid_f = linspace(b.f_max, cfg.grid_f);
    let grid_t = linspace(cfg.duration, cfg.grid_t);
    let (ln_lo, ln_hi) = (cfg.k_lo.ln(), cfg.k_hi.ln());
    let k_ceiling = cfg.k_hi * (1.0 - 1e-9);

    let m = rng.gen_range(cfg.k_waypoints_min..=cfg.k_waypoints_max);
    let knots = linspace(b.f_max, m);
    let ln_levels: Vec<f64> = (0..m).map(|_| uniform(rng, ln_lo, ln_hi)).collect();
    let curve = MonotoneCubic::new(knots, ln_levels);
    let k0: Vec<f64> = grid_f
        .iter()
        .map(|&f| curve.eval(f).exp().clamp(cfg.k_lo, k_ceiling))
        .collect();
    let base = BaseStiffness {
        grid_f: grid_f.clone(),
        k0,
    };

    let amplitude = 0.9 * b.cap_delta_k.ln_1p();
    let n_knots = rng.gen_range(3..=6usize);
    let t_knots = linspace(cfg.duration, n_knots);
    let mut d_levels: Vec<f64> = (0..n_knots)
        .map(|_| uniform(rng, -amplitude, amplitude))
        .collect();
    d_levels[0] = 0.0;
    let d_curve = MonotoneCubic::new(t_knots, d_levels);
    let mut d: Vec<f64> = grid_t.iter().map(|&t| d_curve.eval(t)).collect();

    let compliance = base.typical_deformation() * (1.0 + b.cap_delta_k);
    let per_step = b.delta_k.ln_1p().min(b.delta_kf / compliance);
    let node_steps = (grid_t[1] - grid_t[0]) / cfg.period;
    slew_limit(&mut d, 0.5 * per_step * node_steps);

    let mut values = Vec::with_capacity(grid_t.len() * grid_f.len());
    for &di in &d {
        for &k in &base.k0 {
            values.push((k * di.exp()).clamp(cfg.k_lo, k_ceiling));
        }
    }
    Ok((StiffnessField::new(grid_t, grid_f, values)?, base))
}

/// Zero-force drift approaching an amplitude drawn from
/// `U(drift_lo, drift_hi) · ∫₀^{F_m} dF / k_0`.
///
/// The approach is a critically damped step `A (1 - (1 + t/τ) e^{-t/τ})`,
/// rate limited below `delta_c`.
pub fn sample_drift_curve<R: Rng>(
    cfg: &GenConfig,
    rng: &mut R,
    base: &BaseStiffness,
) -> Result<DriftCurve> {
    let b = &cfg.bounds;
    let scale = uniform(rng, cfg.drift_lo, cfg.drift_hi);
    let tau = uniform(rng, cfg.drift_tau_lo, cfg.drift_tau_hi);
    let amplitude = (scale * base.typical_deformation()).clamp(-0.99 * b.cap_delta_c, 0.99 * b.cap_delta_c);
    let times = linspace(cfg.duration, cfg.grid_t);
    let mut values: Vec<f64> = times
        .iter()
        .map(|&t| {
            let u = t / tau;
            amplitude * (1.0 - (1.0 + u) * (-u).exp())
        })
        .collect();
    let node_steps = (times[1] - times[0]) / cfg.period;
    slew_limit(&mut values, 0.9 * b.delta_c * node_steps);
    DriftCurve::new(times, values)
}

/// Stiffness field and drift curve of one random object.
pub fn sample_plant<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Result<Plant> {
    let (field, base) = sample_stiffness_field(cfg, rng)?;
    let drift = sample_drift_curve(cfg, rng, &base)?;
    Plant::new(field, drift)
}

/// Everything drawn for one grasping process.
#[derive(Debug, Clone)]
pub struct SampledProcess {
    pub plant: Plant,
    pub profile: ForceProfile,
    pub trace: GraspTrace,
}

/// Draws a force profile and an object, then samples `x(t) = x(t, F(t))`
/// and `k(t, F(t))` at every control step.
pub fn synthesize_trace<R: Rng>(cfg: &GenConfig, rng: &mut R) -> Result<SampledProcess> {
    let profile = sample_force_profile(cfg, rng)?;
    let plant = sample_plant(cfg, rng)?;
    let trace = synthesize_trace_from(&plant, &profile)?;
    Ok(SampledProcess {
        plant,
        profile,
        trace,
    })
}

pub fn synthesize_trace_from(plant: &Plant, profile: &ForceProfile) -> Result<GraspTrace> {
    let n = profile.len();
    let mut t = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    for (i, &f) in profile.samples().iter().enumerate() {
        let ti = profile.time(i);
        let slice = plant.field.slice_at(ti)?;
        t.push(ti);
        x.push(slice.compliance_integral(f)? + plant.drift.at(ti)?);
        k.push(plant.field.stiffness_at(ti, f)?);
    }
    GraspTrace::new(profile.period(), t, profile.samples().to_vec(), x, k)
}
