use crate::error::{Error, Result};
use crate::estimators::{LsmConfig, RecurrentDims};
use crate::kv::KvFile;

/// Hyperparameters of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Truncation length of backpropagation through time, in steps.
    pub bptt: usize,
    /// Seeds weight initialization and the per-epoch shuffle.
    pub seed: u64,
    /// Maximum global gradient norm.
    pub grad_clip: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub dims: RecurrentDims,
    pub lsm: LsmConfig,
    /// Whether validation also skips the slope estimator's warm-up steps.
    /// Training always skips them.
    pub val_skip_warmup: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 40,
            batch_size: 24,
            learning_rate: 3e-3,
            bptt: 200,
            seed: 0,
            grad_clip: 1.0,
            patience: 8,
            dims: RecurrentDims::default(),
            lsm: LsmConfig::default(),
            val_skip_warmup: true,
        }
    }
}

impl TrainConfig {
    /// Full-scale hyperparameters: 5 × 512 network,
    /// 300 epochs at learning rate 1e-4.
    pub fn reference_scale() -> Self {
        Self {
            epochs: 300,
            learning_rate: 1e-4,
            patience: 300,
            dims: RecurrentDims {
                layers: 5,
                hidden: 512,
                ..RecurrentDims::default()
            },
            ..Self::default()
        }
    }

    /// Steps excluded from the training loss.
    pub fn warmup(&self) -> usize {
        self.lsm.window
    }

    pub fn val_skip(&self) -> usize {
        if self.val_skip_warmup {
            self.warmup()
        } else {
            0
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.bptt == 0 {
            return Err(Error::Config("batch_size and bptt must be positive".into()));
        }
        if !(self.learning_rate >= 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Config("learning_rate must be finite and non-negative".into()));
        }
        if !(self.grad_clip > 0.0) {
            return Err(Error::Config("grad_clip must be positive".into()));
        }
        self.dims.validate()?;
        self.lsm.validate()
    }

    pub fn to_kv(&self) -> KvFile {
        let mut kv = KvFile::new();
        kv.set("epochs", self.epochs);
        kv.set("batch_size", self.batch_size);
        kv.set("learning_rate", self.learning_rate);
        kv.set("bptt", self.bptt);
        kv.set("seed", self.seed);
        kv.set("grad_clip", self.grad_clip);
        kv.set("patience", self.patience);
        kv.set("layers", self.dims.layers);
        kv.set("hidden", self.dims.hidden);
        kv.set("g_max", self.dims.g_max);
        kv.set("val_skip_warmup", self.val_skip_warmup);
        self.lsm.to_kv(&mut kv, "lsm.");
        kv
    }

    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        let d = Self::default();
        let cfg = Self {
            epochs: kv.parse_or("epochs", d.epochs)?,
            batch_size: kv.parse_or("batch_size", d.batch_size)?,
            learning_rate: kv.parse_or("learning_rate", d.learning_rate)?,
            bptt: kv.parse_or("bptt", d.bptt)?,
            seed: kv.parse_or("seed", d.seed)?,
            grad_clip: kv.parse_or("grad_clip", d.grad_clip)?,
            patience: kv.parse_or("patience", d.patience)?,
            dims: RecurrentDims {
                layers: kv.parse_or("layers", d.dims.layers)?,
                hidden: kv.parse_or("hidden", d.dims.hidden)?,
                g_max: kv.parse_or("g_max", d.dims.g_max)?,
                ..d.dims
            },
            lsm: LsmConfig::from_kv(&kv.section("lsm"))?,
            val_skip_warmup: kv.parse_or("val_skip_warmup", d.val_skip_warmup)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn hash(&self) -> String {
        format!("{:08x}", crc32fast::hash(self.to_kv().to_text().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_round_trip() {
        let mut c = TrainConfig::default();
        c.dims.hidden = 7;
        c.lsm.window = 12;
        c.val_skip_warmup = false;
        let back = TrainConfig::from_kv(&c.to_kv()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }
}
