use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::law::{pi_command, ControllerState};
use super::target::TargetProfile;
use crate::error::{Error, Result};
use crate::estimators::{Checkpoint, LsmConfig, LsmState, RecurrentEstimator};
use crate::kv::KvFile;
use crate::plant::Plant;
use crate::scenario::format_sig9;

/// Where the controller's stiffness estimate comes from.
#[derive(Debug, Clone, Copy)]
pub enum EstimatorMode<'a> {
    /// The plant's true local stiffness.
    Oracle,
    /// A constant estimate, N/mm.
    Fixed(f64),
    Lsm(LsmConfig),
    Recurrent(&'a Checkpoint),
}

impl EstimatorMode<'_> {
    /// Short label used in file names and tables.
    pub fn label(&self) -> String {
        match self {
            EstimatorMode::Oracle => "oracle".into(),
            EstimatorMode::Fixed(k) => format!("fixed-{k}"),
            EstimatorMode::Lsm(_) => "lsm".into(),
            EstimatorMode::Recurrent(_) => "recurrent".into(),
        }
    }
}

enum Active<'a> {
    Oracle,
    Fixed(f64),
    Lsm(LsmState),
    Recurrent(RecurrentEstimator<'a>),
}

impl Active<'_> {
    fn estimate(&mut self, force: f64, x: f64, k_true: f64) -> Result<f64> {
        match self {
            Active::Oracle => Ok(k_true),
            Active::Fixed(k) => Ok(*k),
            Active::Lsm(s) => Ok(s.update(force, x)),
            Active::Recurrent(r) => r.step(force, x),
        }
    }
}

/// Closed-loop simulation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    /// Control period, s.
    pub period: f64,
    pub duration: f64,
    /// Velocity tracking noise is uniform on `±noise_bound` mm/s.
    pub noise_bound: f64,
    pub target: TargetProfile,
    /// Force at the first step, N. Zero means the run starts at first contact.
    pub initial_force: f64,
    pub seed: u64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            period: 0.01,
            duration: 60.0,
            noise_bound: 0.05,
            target: TargetProfile::default(),
            initial_force: 0.0,
            seed: 0,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.duration >= self.period) {
            return Err(Error::Config("need period > 0 and duration >= period".into()));
        }
        if !(self.initial_force >= 0.0) {
            return Err(Error::Config("initial force must be non-negative".into()));
        }
        if !(self.noise_bound >= 0.0) {
            return Err(Error::Config("noise bound must be non-negative".into()));
        }
        self.target.validate()
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.period + 1e-9).floor() as usize + 1
    }

    pub fn to_kv(&self, kv: &mut KvFile, prefix: &str) {
        kv.set(format!("{prefix}period"), self.period);
        kv.set(format!("{prefix}duration"), self.duration);
        kv.set(format!("{prefix}noise_bound"), self.noise_bound);
        kv.set(format!("{prefix}seed"), self.seed);
        kv.set(format!("{prefix}initial_force"), self.initial_force);
        match &self.target {
            TargetProfile::Constant(v) => {
                kv.set(format!("{prefix}target"), "constant");
                kv.set(format!("{prefix}target.level"), v);
            }
            TargetProfile::Step { before, after, at } => {
                kv.set(format!("{prefix}target"), "step");
                kv.set(format!("{prefix}target.before"), before);
                kv.set(format!("{prefix}target.after"), after);
                kv.set(format!("{prefix}target.at"), at);
            }
            TargetProfile::Trapezoid { period, low, high, ramp } => {
                kv.set(format!("{prefix}target"), "trapezoid");
                kv.set(format!("{prefix}target.period"), period);
                kv.set(format!("{prefix}target.low"), low);
                kv.set(format!("{prefix}target.high"), high);
                kv.set(format!("{prefix}target.ramp"), ramp);
            }
            TargetProfile::Series { spacing, samples } => {
                kv.set(format!("{prefix}target"), "series");
                kv.set(format!("{prefix}target.spacing"), spacing);
                let joined: Vec<String> = samples.iter().map(|v| v.to_string()).collect();
                kv.set(format!("{prefix}target.samples"), joined.join(","));
            }
        }
    }

    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let d = Self::default();
        let t = kv.section("target");
        let target = match kv.get("target").unwrap_or("trapezoid") {
            "constant" => TargetProfile::Constant(t.parse_or("level", 1.0)?),
            "step" => TargetProfile::Step {
                before: t.parse_or("before", 1.0)?,
                after: t.parse_or("after", 2.0)?,
                at: t.parse_or("at", 1.0)?,
            },
            "trapezoid" => {
                let TargetProfile::Trapezoid { period, low, high, ramp } = TargetProfile::default() else {
                    unreachable!()
                };
                TargetProfile::Trapezoid {
                    period: t.parse_or("period", period)?,
                    low: t.parse_or("low", low)?,
                    high: t.parse_or("high", high)?,
                    ramp: t.parse_or("ramp", ramp)?,
                }
            }
            "series" => {
                let raw = t.get("samples").unwrap_or_default();
                let samples = raw
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Config("bad target.samples".into()))?;
                TargetProfile::Series {
                    spacing: t.parse_or("spacing", d.period)?,
                    samples,
                }
            }
            other => return Err(Error::Config(format!("unknown target kind `{other}`"))),
        };
        let cfg = Self {
            period: kv.parse_or("period", d.period)?,
            duration: kv.parse_or("duration", d.duration)?,
            noise_bound: kv.parse_or("noise_bound", d.noise_bound)?,
            target,
            initial_force: kv.parse_or("initial_force", d.initial_force)?,
            seed: kv.parse_or("seed", d.seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Recorded closed-loop run. Series are aligned by step.
#[derive(Debug, Clone, Default)]
pub struct ClosedLoopResult {
    pub period: f64,
    pub t: Vec<f64>,
    pub f_d: Vec<f64>,
    pub force: Vec<f64>,
    pub x: Vec<f64>,
    pub v_d: Vec<f64>,
    pub k_hat: Vec<f64>,
    pub k_true: Vec<f64>,
    pub e: Vec<f64>,
    /// Accumulated error after each step's update.
    pub s: Vec<f64>,
    /// Error magnitude exceeded the force range, or the plant saturated.
    pub diverged: bool,
    /// Time at which the run was stopped early.
    pub halted_at: Option<f64>,
}

pub const RESULT_HEADER: &str = "t,F_d,F,x,v_d,k_hat,k_true,e";

impl ClosedLoopResult {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 96);
        out.push_str(RESULT_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let row = [
                self.t[i],
                self.f_d[i],
                self.force[i],
                self.x[i],
                self.v_d[i],
                self.k_hat[i],
                self.k_true[i],
                self.e[i],
            ];
            let cells: Vec<String> = row.iter().map(|&v| format_sig9(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the CSV written by [`ClosedLoopResult::to_csv`]. The summed
    /// error is rebuilt from `e`; the divergence flag is not stored in the
    /// CSV and comes back false.
    pub fn from_csv(text: &str, path: &std::path::Path) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(RESULT_HEADER) {
            return Err(Error::format(path, format!("expected header `{RESULT_HEADER}`")));
        }
        let mut r = ClosedLoopResult::default();
        let mut s = 0.0;
        for (n, line) in lines.enumerate() {
            let v: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::format(path, format!("bad number on line {}", n + 2)))?;
            if v.len() != 8 {
                return Err(Error::format(path, format!("line {} has {} fields", n + 2, v.len())));
            }
            r.t.push(v[0]);
            r.f_d.push(v[1]);
            r.force.push(v[2]);
            r.x.push(v[3]);
            r.v_d.push(v[4]);
            r.k_hat.push(v[5]);
            r.k_true.push(v[6]);
            r.e.push(v[7]);
            s += v[7];
            r.s.push(s);
        }
        if r.t.len() >= 2 {
            r.period = r.t[1] - r.t[0];
        }
        Ok(r)
    }

    /// Largest deviation of the recorded error from the linear recursion
    /// `e' = (1 − P)·e − I·s` evaluated with the recorded `k̂` and `k`.
    pub fn recursion_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len().saturating_sub(1) {
            let ratio = self.k_true[i] / self.k_hat[i];
            let (p, ig) = (ratio, 0.5 * ratio);
            // the recursion holds for the default gains at constant target
            let predicted = (1.0 - p) * self.e[i] - ig * self.s[i] + (self.f_d[i + 1] - self.f_d[i]);
            worst = worst.max((self.e[i + 1] - predicted).abs());
        }
        worst
    }

    pub fn summary(&self) -> KvFile {
        let mut kv = KvFile::new();
        let n = self.len();
        kv.set("steps", n);
        kv.set("period", self.period);
        kv.set("diverged", self.diverged);
        kv.set(
            "halted_at",
            self.halted_at.map_or_else(|| "none".to_string(), format_sig9),
        );
        let rms = if n == 0 {
            0.0
        } else {
            (self.e.iter().map(|e| e * e).sum::<f64>() / n as f64).sqrt()
        };
        kv.set("rms_error_N", format_sig9(rms));
        kv.set(
            "max_abs_error_N",
            format_sig9(self.e.iter().fold(0.0f64, |m, e| m.max(e.abs()))),
        );
        kv.set("final_error_N", format_sig9(self.e.last().copied().unwrap_or(0.0)));
        kv.set("recursion_residual_N", format_sig9(self.recursion_residual()));
        kv
    }
}

/// Runs the force controller against `plant` for `cfg.duration` seconds.
///
/// Each step reads the force at the current displacement, updates the
/// estimator, computes the PI command and integrates the noisy velocity.
/// The run stops early, flagged as diverged, when the error exceeds the
/// plant's force range or the displacement saturates the plant.
pub fn simulate_closed_loop(plant: &Plant, cfg: &LoopConfig, mode: EstimatorMode) -> Result<ClosedLoopResult> {
    cfg.validate()?;
    let (_, t_end) = plant.field.time_range();
    if cfg.duration > t_end + 1e-9 {
        return Err(Error::Config(format!(
            "run of {} s exceeds the plant's {t_end} s time range",
            cfg.duration
        )));
    }
    let mut active = match mode {
        EstimatorMode::Oracle => Active::Oracle,
        EstimatorMode::Fixed(k) => {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::Config(format!("fixed estimate must be positive, got {k}")));
            }
            Active::Fixed(k)
        }
        EstimatorMode::Lsm(c) => {
            c.validate()?;
            Active::Lsm(LsmState::new(c))
        }
        EstimatorMode::Recurrent(ck) => Active::Recurrent(RecurrentEstimator::new(&ck.params, ck.lsm)),
    };
    let limit = plant.f_max();
    if !(0.0..limit).contains(&cfg.initial_force) {
        return Err(Error::Config(format!(
            "initial force {} N outside [0, {limit}) N",
            cfg.initial_force
        )));
    }
    let mut x = plant.deformation(0.0, cfg.initial_force)?;
    let mut ctl = ControllerState::new(cfg.period);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let steps = cfg.steps();
    let mut r = ClosedLoopResult {
        period: cfg.period,
        ..Default::default()
    };
    for i in 0..steps {
        let t = (i as f64 * cfg.period).min(t_end);
        let reading = match plant.force_from_displacement(t, x) {
            Ok(f) => f,
            Err(Error::Saturation { .. }) => {
                r.diverged = true;
                r.halted_at = Some(t);
                break;
            }
            Err(e) => return Err(e),
        };
        let force = reading.force;
        let k_true = plant.stiffness_at(t, force)?;
        let k_hat = active.estimate(force, x, k_true)?;
        let f_d = cfg.target.at(t);
        let e = f_d - force;
        let v_d = pi_command(&mut ctl, e, k_hat)?;
        r.t.push(t);
        r.f_d.push(f_d);
        r.force.push(force);
        r.x.push(x);
        r.v_d.push(v_d);
        r.k_hat.push(k_hat);
        r.k_true.push(k_true);
        r.e.push(e);
        r.s.push(ctl.s);
        if e.abs() > limit {
            r.diverged = true;
            r.halted_at = Some(t);
            break;
        }
        let noise = if cfg.noise_bound > 0.0 {
            rng.gen_range(-cfg.noise_bound..=cfg.noise_bound)
        } else {
            0.0
        };
        x += (v_d + noise) * cfg.period;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{eta_matrix, Scenario};

    fn quiet(target: TargetProfile, duration: f64) -> LoopConfig {
        LoopConfig {
            initial_force: target.at(0.0),
            duration,
            noise_bound: 0.0,
            target,
            ..LoopConfig::default()
        }
    }

    fn spring(duration: f64) -> Plant {
        Scenario::Spring.plant(duration, 12.0).unwrap()
    }

    #[test]
    fn equilibrium_start_stays_at_rest() {
        let r = simulate_closed_loop(&spring(5.0), &quiet(TargetProfile::Constant(3.0), 5.0), EstimatorMode::Oracle)
            .unwrap();
        assert!(r.e.iter().all(|&e| e.abs() < 1e-12));
        assert!(!r.diverged);
    }

    #[test]
    fn recorded_state_follows_error_recursion() {
        let target = TargetProfile::Step {
            before: 2.0,
            after: 4.0,
            at: 0.5,
        };
        let r = simulate_closed_loop(&spring(2.0), &quiet(target, 2.0), EstimatorMode::Fixed(2.0 * 1.5)).unwrap();
        let a = eta_matrix(1.5);
        let start = 51;
        for i in start..r.len() - 1 {
            let next = a.apply([r.s[i], r.e[i]]);
            assert!((next[0] - r.s[i + 1]).abs() < 1e-6);
            assert!((next[1] - r.e[i + 1]).abs() < 1e-6);
        }
    }

    #[test]
    fn far_too_low_estimate_diverges() {
        let r = simulate_closed_loop(&spring(20.0), &quiet(TargetProfile::default(), 20.0), EstimatorMode::Fixed(0.6))
            .unwrap();
        assert!(r.diverged);
        assert!(r.halted_at.is_some());
    }

    #[test]
    fn csv_round_trip() {
        let cfg = LoopConfig {
            duration: 1.0,
            ..LoopConfig::default()
        };
        let r = simulate_closed_loop(&spring(1.0), &cfg, EstimatorMode::Lsm(LsmConfig::default())).unwrap();
        let text = r.to_csv();
        assert!(text.starts_with("t,F_d,F,x,v_d,k_hat,k_true,e\n"));
        let back = ClosedLoopResult::from_csv(&text, std::path::Path::new("r.csv")).unwrap();
        assert_eq!(back.len(), r.len());
        assert_eq!(back.to_csv(), text);
    }

    #[test]
    fn same_seed_same_run() {
        let cfg = LoopConfig {
            duration: 10.0,
            seed: 9,
            ..LoopConfig::default()
        };
        let a = simulate_closed_loop(&spring(10.0), &cfg, EstimatorMode::Oracle).unwrap();
        let b = simulate_closed_loop(&spring(10.0), &cfg, EstimatorMode::Oracle).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn loop_config_kv_round_trip() {
        let cfg = LoopConfig {
            initial_force: 2.5,
            target: TargetProfile::Series {
                spacing: 0.1,
                samples: vec![1.0, 1.5, 2.25],
            },
            ..LoopConfig::default()
        };
        let mut kv = KvFile::new();
        cfg.to_kv(&mut kv, "");
        assert_eq!(LoopConfig::from_kv(&kv).unwrap(), cfg);
    }
}
