use crate::error::{Error, Result};
use crate::kv::KvFile;

/// Numeric bounds of the object-model assumptions.
///
/// Units: stiffness in N/mm, force in N, displacement in mm, velocity in
/// mm/s. Per-step quantities refer to one control period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelBounds {
    pub k_min: f64,
    /// Upper stiffness bound `k_m`.
    pub k_max: f64,
    /// Gripper force limit `F_m`.
    pub f_max: f64,
    pub delta_f: f64,
    pub delta_fd: f64,
    pub delta_c: f64,
    /// Bound on `|C'(t)|`.
    pub cap_delta_c: f64,
    /// Relative stiffness drift per step; must be below 1.
    pub delta_k: f64,
    /// Relative stiffness drift from `t = 0`.
    pub cap_delta_k: f64,
    /// Constant-force drift per step.
    pub delta_kf: f64,
    pub delta_v: f64,
}

impl Default for ModelBounds {
    fn default() -> Self {
        Self {
            k_min: 0.05,
            k_max: 8.0,
            f_max: 12.0,
            delta_f: 0.1,
            delta_fd: 0.1,
            delta_c: 0.05,
            cap_delta_c: 10.0,
            delta_k: 0.01,
            cap_delta_k: 0.5,
            delta_kf: 0.01,
            delta_v: 0.05,
        }
    }
}

impl ModelBounds {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.k_min,
            self.k_max,
            self.f_max,
            self.delta_f,
            self.delta_fd,
            self.delta_c,
            self.cap_delta_c,
            self.delta_k,
            self.cap_delta_k,
            self.delta_kf,
            self.delta_v,
        ];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("model bounds must be finite and positive".into()));
        }
        if self.delta_k >= 1.0 {
            return Err(Error::Config("delta_k must be below 1".into()));
        }
        if self.k_min >= self.k_max {
            return Err(Error::Config("k_min must be below k_max".into()));
        }
        Ok(())
    }

    pub fn to_kv(&self, kv: &mut KvFile, prefix: &str) {
        for (name, v) in self.fields() {
            kv.set(format!("{prefix}{name}"), v);
        }
    }

    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let mut b = Self::default();
        macro_rules! read {
            ($($f:ident),*) => {$(
                b.$f = kv.parse_or(stringify!($f), b.$f)?;
            )*};
        }
        read!(
            k_min, k_max, f_max, delta_f, delta_fd, delta_c, cap_delta_c, delta_k, cap_delta_k,
            delta_kf, delta_v
        );
        b.validate()?;
        Ok(b)
    }

    fn fields(&self) -> [(&'static str, f64); 11] {
        [
            ("k_min", self.k_min),
            ("k_max", self.k_max),
            ("f_max", self.f_max),
            ("delta_f", self.delta_f),
            ("delta_fd", self.delta_fd),
            ("delta_c", self.delta_c),
            ("cap_delta_c", self.cap_delta_c),
            ("delta_k", self.delta_k),
            ("cap_delta_k", self.cap_delta_k),
            ("delta_kf", self.delta_kf),
            ("delta_v", self.delta_v),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ModelBounds::default().validate().unwrap();
    }

    #[test]
    fn delta_k_must_be_below_one() {
        let b = ModelBounds {
            delta_k: 1.0,
            ..ModelBounds::default()
        };
        assert!(b.validate().is_err());
    }

    #[test]
    fn kv_round_trip() {
        let b = ModelBounds {
            delta_v: 0.2,
            ..ModelBounds::default()
        };
        let mut kv = KvFile::new();
        b.to_kv(&mut kv, "");
        assert_eq!(ModelBounds::from_kv(&kv).unwrap(), b);
    }
}
