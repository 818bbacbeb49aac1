use crate::error::{Error, Result};
use crate::kv::KvFile;
use crate::plant::ModelBounds;

/// Settings of the random grasping-process generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    /// Total traces; the last `val_fraction` of them form the validation split.
    pub n_traces: usize,
    pub val_fraction: f64,
    /// Seconds.
    pub duration: f64,
    /// Control period in seconds.
    pub period: f64,
    pub waypoints_min: usize,
    pub waypoints_max: usize,
    /// Waypoint force levels are uniform on `[force_lo, force_hi]` N.
    pub force_lo: f64,
    pub force_hi: f64,
    /// `ln k` waypoints are uniform on `[ln k_lo, ln k_hi]`.
    pub k_lo: f64,
    pub k_hi: f64,
    /// Number of `ln k_0(F)` waypoints across the force axis.
    pub k_waypoints_min: usize,
    pub k_waypoints_max: usize,
    /// Zero-force drift amplitude, as a fraction of `∫₀^{F_m} dF / k_0`.
    pub drift_lo: f64,
    pub drift_hi: f64,
    /// Time constant range of the drift approach, seconds.
    pub drift_tau_lo: f64,
    pub drift_tau_hi: f64,
    pub grid_t: usize,
    pub grid_f: usize,
    pub bounds: ModelBounds,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_traces: 1000,
            val_fraction: 0.2,
            duration: 20.0,
            period: 0.01,
            waypoints_min: 4,
            waypoints_max: 12,
            force_lo: 0.1,
            force_hi: 10.0,
            k_lo: 0.05,
            k_hi: 8.0,
            k_waypoints_min: 2,
            k_waypoints_max: 4,
            drift_lo: -0.02,
            drift_hi: 0.04,
            drift_tau_lo: 1.0,
            drift_tau_hi: 8.0,
            grid_t: 64,
            grid_f: 64,
            bounds: ModelBounds::default(),
        }
    }
}

impl GenConfig {
    /// The dataset size used in the original study: 8000 train + 2000 validation.
    pub fn full_scale() -> Self {
        Self {
            n_traces: 10_000,
            ..Self::default()
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.period).round() as usize
    }

    pub fn n_val(&self) -> usize {
        (self.n_traces as f64 * self.val_fraction).round() as usize
    }

    pub fn n_train(&self) -> usize {
        self.n_traces - self.n_val()
    }

    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        let steps = self.duration / self.period;
        if !(self.period > 0.0 && self.duration > 0.0) || (steps - steps.round()).abs() > 1e-6 {
            return Err(Error::Config("duration must be a positive multiple of period".into()));
        }
        if !(0.0..=1.0).contains(&self.val_fraction) {
            return Err(Error::Config("val_fraction must lie in [0, 1]".into()));
        }
        if self.waypoints_min < 2 || self.waypoints_max < self.waypoints_min {
            return Err(Error::Config("waypoint range must satisfy 2 <= min <= max".into()));
        }
        if self.k_waypoints_min < 2 || self.k_waypoints_max < self.k_waypoints_min {
            return Err(Error::Config("stiffness waypoint range must satisfy 2 <= min <= max".into()));
        }
        if !(self.force_lo > 0.0 && self.force_lo <= self.force_hi && self.force_hi < self.bounds.f_max) {
            return Err(Error::Config("force range must lie inside (0, f_max)".into()));
        }
        if !(self.k_lo >= self.bounds.k_min && self.k_lo <= self.k_hi && self.k_hi <= self.bounds.k_max) {
            return Err(Error::Config("stiffness range must lie inside [k_min, k_max]".into()));
        }
        if self.drift_lo > self.drift_hi || self.drift_tau_lo <= 0.0 || self.drift_tau_hi < self.drift_tau_lo {
            return Err(Error::Config("invalid drift ranges".into()));
        }
        if self.grid_t < 2 || self.grid_f < 2 {
            return Err(Error::Config("grids need at least two nodes".into()));
        }
        Ok(())
    }

    pub fn to_kv(&self) -> KvFile {
        let mut kv = KvFile::new();
        kv.set("seed", self.seed);
        kv.set("n_traces", self.n_traces);
        kv.set("val_fraction", self.val_fraction);
        kv.set("duration", self.duration);
        kv.set("period", self.period);
        kv.set("waypoints_min", self.waypoints_min);
        kv.set("waypoints_max", self.waypoints_max);
        kv.set("force_lo", self.force_lo);
        kv.set("force_hi", self.force_hi);
        kv.set("k_lo", self.k_lo);
        kv.set("k_hi", self.k_hi);
        kv.set("k_waypoints_min", self.k_waypoints_min);
        kv.set("k_waypoints_max", self.k_waypoints_max);
        kv.set("drift_lo", self.drift_lo);
        kv.set("drift_hi", self.drift_hi);
        kv.set("drift_tau_lo", self.drift_tau_lo);
        kv.set("drift_tau_hi", self.drift_tau_hi);
        kv.set("grid_t", self.grid_t);
        kv.set("grid_f", self.grid_f);
        self.bounds.to_kv(&mut kv, "bounds.");
        kv
    }

    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let d = Self::default();
        let cfg = Self {
            seed: kv.parse_or("seed", d.seed)?,
            n_traces: kv.parse_or("n_traces", d.n_traces)?,
            val_fraction: kv.parse_or("val_fraction", d.val_fraction)?,
            duration: kv.parse_or("duration", d.duration)?,
            period: kv.parse_or("period", d.period)?,
            waypoints_min: kv.parse_or("waypoints_min", d.waypoints_min)?,
            waypoints_max: kv.parse_or("waypoints_max", d.waypoints_max)?,
            force_lo: kv.parse_or("force_lo", d.force_lo)?,
            force_hi: kv.parse_or("force_hi", d.force_hi)?,
            k_lo: kv.parse_or("k_lo", d.k_lo)?,
            k_hi: kv.parse_or("k_hi", d.k_hi)?,
            k_waypoints_min: kv.parse_or("k_waypoints_min", d.k_waypoints_min)?,
            k_waypoints_max: kv.parse_or("k_waypoints_max", d.k_waypoints_max)?,
            drift_lo: kv.parse_or("drift_lo", d.drift_lo)?,
            drift_hi: kv.parse_or("drift_hi", d.drift_hi)?,
            drift_tau_lo: kv.parse_or("drift_tau_lo", d.drift_tau_lo)?,
            drift_tau_hi: kv.parse_or("drift_tau_hi", d.drift_tau_hi)?,
            grid_t: kv.parse_or("grid_t", d.grid_t)?,
            grid_f: kv.parse_or("grid_f", d.grid_f)?,
            bounds: ModelBounds::from_kv(&kv.section("bounds"))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// CRC32 of the canonical config text, as 8 hex digits.
    pub fn hash(&self) -> String {
        format!("{:08x}", crc32fast::hash(self.to_kv().to_text().as_bytes()))
    }
}
