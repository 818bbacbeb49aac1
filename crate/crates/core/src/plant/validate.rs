use std::fmt;

use super::{ModelBounds, Plant};
use crate::scenario::ForceProfile;

/// Which modeling assumption a check belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    /// Sampled time range is covered by the plant description.
    Coverage,
    /// `0 < k < k_m`.
    PositiveBoundedStiffness,
    /// `0 < F < F_m` and `|ΔF| < δ_F`.
    BoundedForce,
    /// `|ΔC'| < δ_C` and `|C'| < Δ_C`.
    ZeroForceDrift,
    /// `|ε_kF| < δ_kF`.
    ConstantForceDrift,
    /// Per-step and total relative stiffness drift.
    StiffnessDrift,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::Coverage => "coverage",
            Assumption::PositiveBoundedStiffness => "positive-bounded-stiffness",
            Assumption::BoundedForce => "bounded-force",
            Assumption::ZeroForceDrift => "zero-force-drift",
            Assumption::ConstantForceDrift => "constant-force-drift",
            Assumption::StiffnessDrift => "stiffness-drift",
        };
        f.write_str(s)
    }
}

/// One inequality evaluated over the whole record.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub assumption: Assumption,
    pub name: &'static str,
    pub bound: f64,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    /// Distance to the bound at the worst point; negative on failure.
    pub margin: f64,
    /// Step index of the worst point, if the check is per step.
    pub worst_step: Option<usize>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn passed(&self, a: Assumption) -> bool {
        self.checks
            .iter()
            .filter(|c| c.assumption == a)
            .all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Tracks the worst value of `|quantity|` against an upper bound.
struct Upper {
    worst: f64,
    step: Option<usize>,
}

impl Upper {
    fn new() -> Self {
        Self {
            worst: 0.0,
            step: None,
        }
    }

    fn see(&mut self, v: f64, step: usize) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if self.step.is_none() || v > self.worst {
            self.worst = v;
            self.step = Some(step);
        }
    }

    fn finish(self, assumption: Assumption, name: &'static str, bound: f64) -> Check {
        let margin = bound - self.worst;
        Check {
            assumption,
            name,
            bound,
            worst: self.worst,
            margin,
            worst_step: self.step,
            passed: margin > 0.0,
        }
    }
}

/// Checks a plant and a force profile against every modeling assumption.
///
/// Time-dependent checks run at the profile's sample times. The report is
/// always produced; evaluation problems show up as failed checks.
pub fn validate_assumptions(
    plant: &Plant,
    profile: &ForceProfile,
    bounds: &ModelBounds,
) -> ValidationReport {
    let mut checks = Vec::new();
    let n = profile.len();
    let times: Vec<f64> = (0..n).map(|i| profile.time(i)).collect();

    let (t0, t1) = plant.field.time_range();
    let (d0, d1) = plant.drift.time_range();
    let end = times.last().copied().unwrap_or(0.0);
    let covered = t0 <= 1e-12 && d0 <= 1e-12 && end <= t1 + 1e-9 && end <= d1 + 1e-9;
    checks.push(Check {
        assumption: Assumption::Coverage,
        name: "time_coverage",
        bound: t1.min(d1),
        worst: end,
        margin: t1.min(d1) - end,
        worst_step: None,
        passed: covered,
    });

    // Stiffness bounds over the grid; bilinear values are convex combinations
    // of the nodes, so the nodes are the extremes.
    let values = plant.field.values();
    let kmin = values.iter().copied().fold(f64::INFINITY, f64::min);
    let kmax = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check {
        assumption: Assumption::PositiveBoundedStiffness,
        name: "stiffness_positive",
        bound: 0.0,
        worst: kmin,
        margin: kmin,
        worst_step: None,
        passed: kmin > 0.0,
    });
    checks.push(Check {
        assumption: Assumption::PositiveBoundedStiffness,
        name: "stiffness_below_k_max",
        bound: bounds.k_max,
        worst: kmax,
        margin: bounds.k_max - kmax,
        worst_step: None,
        passed: kmax < bounds.k_max,
    });

    // Force positivity (after contact) and limit.
    let forces = profile.samples();
    let mut fmin = f64::INFINITY;
    let mut fmin_step = None;
    for (i, &f) in forces.iter().enumerate().skip(1) {
        if f < fmin || f.is_nan() {
            fmin = if f.is_nan() { f64::NEG_INFINITY } else { f };
            fmin_step = Some(i);
        }
    }
    if n <= 1 {
        fmin = forces.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    }
    checks.push(Check {
        assumption: Assumption::BoundedForce,
        name: "force_positive",
        bound: 0.0,
        worst: fmin,
        margin: fmin,
        worst_step: fmin_step,
        passed: fmin > 0.0,
    });
    let mut fpeak = Upper::new();
    let mut frate = Upper::new();
    for (i, &f) in forces.iter().enumerate() {
        fpeak.see(f, i);
        if i > 0 {
            frate.see((f - forces[i - 1]).abs(), i);
        }
    }
    checks.push(fpeak.finish(Assumption::BoundedForce, "force_below_f_max", bounds.f_max));
    checks.push(frate.finish(Assumption::BoundedForce, "force_rate", bounds.delta_f));

    if !covered {
        return ValidationReport { checks };
    }

    // Zero-force drift.
    let drift: Vec<f64> = times
        .iter()
        .map(|&t| plant.drift.at(t).unwrap_or(f64::NAN))
        .collect();
    let mut crate_ = Upper::new();
    let mut cmag = Upper::new();
    for (i, &c) in drift.iter().enumerate() {
        cmag.see(c.abs(), i);
        if i > 0 {
            crate_.see((c - drift[i - 1]).abs(), i);
        }
    }
    checks.push(crate_.finish(Assumption::ZeroForceDrift, "zero_force_drift_rate", bounds.delta_c));
    checks.push(cmag.finish(Assumption::ZeroForceDrift, "zero_force_drift_magnitude", bounds.cap_delta_c));

    // Stiffness drift at every force node, and constant-force drift at the
    // profile force.
    let grid_f = plant.field.grid_f();
    let initial: Vec<f64> = grid_f
        .iter()
        .map(|&f| plant.field.stiffness_at(times[0], f).unwrap_or(f64::NAN))
        .collect();
    let mut prev_k = initial.clone();
    let mut prev_slice = plant.field.slice_at(times[0]).ok();
    let mut kstep = Upper::new();
    let mut ktotal = Upper::new();
    let mut kf = Upper::new();
    for (i, &t) in times.iter().enumerate().skip(1) {
        let slice = plant.field.slice_at(t).ok();
        let cur: Vec<f64> = match &slice {
            Some(s) => s.stiffness().to_vec(),
            None => vec![f64::NAN; grid_f.len()],
        };
        for j in 0..grid_f.len() {
            kstep.see((cur[j] - prev_k[j]).abs() / prev_k[j], i);
            ktotal.see((cur[j] - initial[j]).abs() / initial[j], i);
        }
        let f = forces[i - 1].clamp(0.0, plant.f_max());
        let eps = match (&prev_slice, &slice) {
            (Some(a), Some(b)) => match (a.compliance_integral(f), b.compliance_integral(f)) {
                (Ok(x0), Ok(x1)) => (x1 - x0).abs(),
                _ => f64::NAN,
            },
            _ => f64::NAN,
        };
        kf.see(eps, i);
        prev_k = cur;
        prev_slice = slice;
    }
    checks.push(kstep.finish(Assumption::StiffnessDrift, "stiffness_drift_rate", bounds.delta_k));
    checks.push(ktotal.finish(Assumption::StiffnessDrift, "stiffness_drift_total", bounds.cap_delta_k));
    checks.push(kf.finish(Assumption::ConstantForceDrift, "constant_force_drift", bounds.delta_kf));

    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{DriftCurve, StiffnessField};

    fn constant_case() -> (Plant, ForceProfile) {
        let plant = Plant::new(
            StiffnessField::constant(2.0, 20.0, 12.0).unwrap(),
            DriftCurve::zero(20.0),
        )
        .unwrap();
        (plant, ForceProfile::constant(5.0, 0.01, 20.0).unwrap())
    }

    #[test]
    fn constant_everything_passes_with_full_margin() {
        let (plant, profile) = constant_case();
        let b = ModelBounds::default();
        let r = validate_assumptions(&plant, &profile, &b);
        assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.check("force_rate").unwrap().margin, b.delta_f);
        assert_eq!(r.check("zero_force_drift_rate").unwrap().margin, b.delta_c);
        assert_eq!(r.check("zero_force_drift_magnitude").unwrap().margin, b.cap_delta_c);
        assert_eq!(r.check("stiffness_drift_rate").unwrap().margin, b.delta_k);
        assert_eq!(r.check("stiffness_drift_total").unwrap().margin, b.cap_delta_k);
        assert_eq!(r.check("constant_force_drift").unwrap().margin, b.delta_kf);
    }

    #[test]
    fn zero_stiffness_node_is_flagged() {
        let mut values = vec![2.0; 4];
        values[3] = 0.0;
        let field = StiffnessField::new(vec![0.0, 20.0], vec![0.0, 12.0], values).unwrap();
        let plant = Plant::new(field, DriftCurve::zero(20.0)).unwrap();
        let profile = ForceProfile::constant(5.0, 0.01, 20.0).unwrap();
        let r = validate_assumptions(&plant, &profile, &ModelBounds::default());
        assert!(!r.passed(Assumption::PositiveBoundedStiffness));
        assert!(!r.all_passed());
    }

    #[test]
    fn fast_force_and_drift_are_flagged() {
        let field = StiffnessField::constant(2.0, 1.0, 12.0).unwrap();
        let drift = DriftCurve::new(vec![0.0, 0.5, 1.0], vec![0.0, 12.0, 0.0]).unwrap();
        let plant = Plant::new(field, drift).unwrap();
        let samples: Vec<f64> = (0..=100).map(|i| if i < 50 { 1.0 } else { 3.0 }).collect();
        let profile = ForceProfile::new(samples, 0.01).unwrap();
        let r = validate_assumptions(&plant, &profile, &ModelBounds::default());
        assert!(!r.check("force_rate").unwrap().passed);
        assert_eq!(r.check("force_rate").unwrap().worst_step, Some(50));
        assert!(!r.check("zero_force_drift_rate").unwrap().passed);
        assert!(!r.check("zero_force_drift_magnitude").unwrap().passed);
        assert!(r.passed(Assumption::PositiveBoundedStiffness));
    }

    #[test]
    fn stiffness_drift_is_measured() {
        // k doubles over 1 s: 100 steps, total relative drift 1.0 > 0.5.
        let field = StiffnessField::new(vec![0.0, 1.0], vec![0.0, 12.0], vec![1.0, 1.0, 2.0, 2.0])
            .unwrap();
        let plant = Plant::new(field, DriftCurve::zero(1.0)).unwrap();
        let profile = ForceProfile::constant(4.0, 0.01, 1.0).unwrap();
        let r = validate_assumptions(&plant, &profile, &ModelBounds::default());
        let total = r.check("stiffness_drift_total").unwrap();
        assert!((total.worst - 1.0).abs() < 1e-9);
        assert!(!total.passed);
        // ∫₀⁴ dF (1/k(t+T) - 1/k(t)) is at most 4 * 0.01 / 1 = 0.04 mm per step.
        let kf = r.check("constant_force_drift").unwrap();
        assert!(kf.worst > 0.01 && kf.worst < 0.04);
        assert!(!kf.passed);
    }

    #[test]
    fn uncovered_profile_fails_coverage() {
        let plant = Plant::new(
            StiffnessField::constant(2.0, 1.0, 12.0).unwrap(),
            DriftCurve::zero(1.0),
        )
        .unwrap();
        let profile = ForceProfile::constant(5.0, 0.01, 2.0).unwrap();
        let r = validate_assumptions(&plant, &profile, &ModelBounds::default());
        assert!(!r.passed(Assumption::Coverage));
    }
}
