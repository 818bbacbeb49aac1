use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::kv::KvFile;

/// Settings of the sliding-window least-squares estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsmConfig {
    /// Number of samples in the fit window.
    pub window: usize,
    /// Minimum per-step force increase (N) for the estimate to update.
    pub rate_threshold: f64,
    pub floor: f64,
    pub ceiling: f64,
    /// Output before the first update, N/mm.
    pub initial: f64,
}

impl Default for LsmConfig {
    fn default() -> Self {
        Self {
            window: 20,
            rate_threshold: 0.02,
            floor: 0.01,
            ceiling: 16.0,
            initial: 1.0,
        }
    }
}

impl LsmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(Error::Config("LSM window must hold at least two samples".into()));
        }
        if !(self.floor > 0.0 && self.floor <= self.initial && self.initial <= self.ceiling) {
            return Err(Error::Config("LSM needs 0 < floor <= initial <= ceiling".into()));
        }
        Ok(())
    }

    pub fn to_kv(&self, kv: &mut KvFile, prefix: &str) {
        kv.set(format!("{prefix}window"), self.window);
        kv.set(format!("{prefix}rate_threshold"), self.rate_threshold);
        kv.set(format!("{prefix}floor"), self.floor);
        kv.set(format!("{prefix}ceiling"), self.ceiling);
        kv.set(format!("{prefix}initial"), self.initial);
    }

    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let d = Self::default();
        let c = Self {
            window: kv.parse_or("window", d.window)?,
            rate_threshold: kv.parse_or("rate_threshold", d.rate_threshold)?,
            floor: kv.parse_or("floor", d.floor)?,
            ceiling: kv.parse_or("ceiling", d.ceiling)?,
            initial: kv.parse_or("initial", d.initial)?,
        };
        c.validate()?;
        Ok(c)
    }
}

/// Running state of the least-squares estimator for one trace.
#[derive(Debug, Clone)]
pub struct LsmState {
    cfg: LsmConfig,
    window: VecDeque<(f64, f64)>,
    held: f64,
}

impl LsmState {
    pub fn new(cfg: LsmConfig) -> Self {
        Self {
            window: VecDeque::with_capacity(cfg.window),
            held: cfg.initial,
            cfg,
        }
    }

    pub fn config(&self) -> &LsmConfig {
        &self.cfg
    }

    pub fn held(&self) -> f64 {
        self.held
    }

    /// Whether the window has been filled since contact.
    pub fn warmed_up(&self) -> bool {
        self.window.len() == self.cfg.window
    }

    /// Feeds one `(F, x)` sample and returns the stiffness estimate in N/mm.
    ///
    /// The estimate only moves when the window is full and the force rose by
    /// at least `rate_threshold` since the previous sample; otherwise the
    /// previous value is returned.
    pub fn update(&mut self, force: f64, x: f64) -> f64 {
        let previous = self.window.back().map(|&(f, _)| f);
        if self.window.len() == self.cfg.window {
            self.window.pop_front();
        }
        self.window.push_back((force, x));
        let Some(prev) = previous else {
            return self.held;
        };
        if !self.warmed_up() || !(force - prev >= self.cfg.rate_threshold) {
            return self.held;
        }
        if let Some(slope) = self.slope() {
            self.held = slope.clamp(self.cfg.floor, self.cfg.ceiling);
        }
        self.held
    }

    /// Least-squares slope of F against x over the window.
    fn slope(&self) -> Option<f64> {
        let n = self.window.len() as f64;
        let (sx, sf) = self
            .window
            .iter()
            .fold((0.0, 0.0), |(a, b), &(f, x)| (a + x, b + f));
        let (mx, mf) = (sx / n, sf / n);
        let (mut sxx, mut sxf) = (0.0, 0.0);
        for &(f, x) in &self.window {
            let dx = x - mx;
            sxx += dx * dx;
            sxf += dx * (f - mf);
        }
        let scale = self.window.iter().fold(0.0f64, |m, &(_, x)| m.max(x.abs())).max(1e-12);
        if !(sxx > 1e-24 * scale * scale * n) || !sxf.is_finite() {
            return None;
        }
        Some(sxf / sxx)
    }
}

/// Runs a fresh estimator over a whole trace.
pub fn lsm_series(cfg: LsmConfig, force: &[f64], x: &[f64]) -> Vec<f64> {
    let mut s = LsmState::new(cfg);
    force.iter().zip(x).map(|(&f, &x)| s.update(f, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_gives_unit_slope() {
        let mut s = LsmState::new(LsmConfig {
            window: 3,
            ..LsmConfig::default()
        });
        s.update(1.0, 1.0);
        s.update(2.0, 2.0);
        assert!((s.update(3.0, 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slow_loading_holds_previous_value() {
        let cfg = LsmConfig {
            window: 3,
            ..LsmConfig::default()
        };
        let mut s = LsmState::new(cfg);
        for i in 0..3 {
            s.update(i as f64, i as f64 / 2.0);
        }
        assert!((s.held() - 2.0).abs() < 1e-12);
        // force change below threshold: x moves but the estimate stays
        assert_eq!(s.update(2.01, 1.5), s.held());
        assert!((s.update(2.015, 3.0) - 2.0).abs() < 1e-12);
        // unloading never updates
        assert!((s.update(1.0, 0.1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_spring_converges_after_window_fills() {
        let cfg = LsmConfig::default();
        let force: Vec<f64> = (0..100).map(|i| 0.5 + 0.03 * i as f64).collect();
        let x: Vec<f64> = force.iter().map(|f| f / 2.0).collect();
        let est = lsm_series(cfg, &force, &x);
        assert!(est[..cfg.window - 1].iter().all(|&k| k == cfg.initial));
        for &k in &est[cfg.window - 1..] {
            assert!((k - 2.0).abs() < 1e-6, "{k}");
        }
    }

    #[test]
    fn degenerate_window_keeps_held() {
        let mut s = LsmState::new(LsmConfig {
            window: 3,
            ..LsmConfig::default()
        });
        for i in 0..5 {
            assert_eq!(s.update(i as f64, 1.0), 1.0);
        }
    }

    #[test]
    fn output_is_clamped() {
        let cfg = LsmConfig {
            window: 3,
            ..LsmConfig::default()
        };
        let steep = lsm_series(cfg, &[0.0, 1.0, 2.0], &[0.0, 1e-3, 2e-3]);
        assert_eq!(steep[2], cfg.ceiling);
        let negative = lsm_series(cfg, &[0.0, 1.0, 2.0], &[0.0, -1.0, -2.0]);
        assert_eq!(negative[2], cfg.floor);
    }
}
