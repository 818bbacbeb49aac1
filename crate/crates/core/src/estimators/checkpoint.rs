//! Binary checkpoint files.
//!
//! One text header line (`gfl-ckpt v1` followed by space-separated
//! `key=value` fields) and then every parameter as an 8-byte little-endian
//! float, in the order of [`RecurrentParams::values`].

use std::path::Path;

use super::lsm::LsmConfig;
use super::recurrent::{RecurrentDims, RecurrentParams};
use crate::error::{Error, Result};
use crate::kv::write_atomic;

pub const MAGIC: &str = "gfl-ckpt v1";

/// Trained estimator: network weights plus the slope estimator settings
/// they were trained against.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: RecurrentParams,
    pub lsm: LsmConfig,
    /// Hash of the training configuration that produced the weights.
    pub config_hash: String,
}

impl Checkpoint {
    pub fn header(&self) -> String {
        let d = self.params.dims();
        format!(
            "{MAGIC} layers={} hidden={} inputs={} g_max={} params={} lsm_window={} \
             lsm_rate_threshold={} lsm_floor={} lsm_ceiling={} lsm_initial={} config_hash={}",
            d.layers,
            d.hidden,
            d.inputs,
            d.g_max,
            d.param_count(),
            self.lsm.window,
            self.lsm.rate_threshold,
            self.lsm.floor,
            self.lsm.ceiling,
            self.lsm.initial,
            self.config_hash
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header().into_bytes();
        out.push(b'\n');
        for v in self.params.values() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let bad = |msg: String| Error::format(path, msg);
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("missing header line".into()))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8".into()))?;
        let fields = header
            .strip_prefix(MAGIC)
            .ok_or_else(|| bad(format!("expected `{MAGIC}` header")))?;
        let mut kv = std::collections::HashMap::new();
        for tok in fields.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| bad(format!("bad header field `{tok}`")))?;
            kv.insert(k, v);
        }
        fn field<T: std::str::FromStr>(
            kv: &std::collections::HashMap<&str, &str>,
            key: &str,
        ) -> std::result::Result<T, String> {
            let raw = kv.get(key).ok_or_else(|| format!("header lacks `{key}`"))?;
            raw.parse().map_err(|_| format!("bad `{key}` value `{raw}`"))
        }
        let dims = RecurrentDims {
            layers: field(&kv, "layers").map_err(bad)?,
            hidden: field(&kv, "hidden").map_err(bad)?,
            inputs: field(&kv, "inputs").map_err(bad)?,
            g_max: field(&kv, "g_max").map_err(bad)?,
        };
        let lsm = LsmConfig {
            window: field(&kv, "lsm_window").map_err(bad)?,
            rate_threshold: field(&kv, "lsm_rate_threshold").map_err(bad)?,
            floor: field(&kv, "lsm_floor").map_err(bad)?,
            ceiling: field(&kv, "lsm_ceiling").map_err(bad)?,
            initial: field(&kv, "lsm_initial").map_err(bad)?,
        };
        let n: usize = field(&kv, "params").map_err(bad)?;
        let config_hash: String = field(&kv, "config_hash").map_err(bad)?;
        dims.validate()?;
        if n != dims.param_count() {
            return Err(Error::Dimension(format!(
                "{}: header declares {n} parameters but dims need {}",
                path.display(),
                dims.param_count()
            )));
        }
        let body = &bytes[nl + 1..];
        if body.len() != 8 * n {
            return Err(bad(format!("expected {} weight bytes, found {}", 8 * n, body.len())));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            params: RecurrentParams::from_values(dims, values)?,
            lsm,
            config_hash,
        })
    }
}

pub fn write_checkpoint(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    write_atomic(path, &ckpt.to_bytes())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes, path)
}
