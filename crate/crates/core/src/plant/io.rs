//! Plant description files.
//!
//! A plant file is a `key = value` file with comma-separated arrays:
//! `grid_t`, `grid_f`, `k` (row-major over time then force), `drift_t` and
//! `drift`. Values are written in shortest round-trip form, so reading a
//! written file reproduces the plant exactly.

use std::path::Path;

use super::{DriftCurve, Plant, StiffnessField};
use crate::error::{Error, Result};
use crate::kv::KvFile;

pub const HEADER: &str = "gfl-plant v1";

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn split(kv: &KvFile, key: &str, path: &Path) -> Result<Vec<f64>> {
    let raw = kv
        .get(key)
        .ok_or_else(|| Error::format(path, format!("missing `{key}`")))?;
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::format(path, format!("bad number `{s}` in `{key}`")))
        })
        .collect()
}

pub fn to_kv(plant: &Plant) -> KvFile {
    let mut kv = KvFile::new();
    kv.set("format", HEADER);
    kv.set("grid_t", join(plant.field.grid_t()));
    kv.set("grid_f", join(plant.field.grid_f()));
    kv.set("k", join(plant.field.values()));
    kv.set("drift_t", join(plant.drift.times()));
    kv.set("drift", join(plant.drift.values()));
    kv
}

pub fn write(plant: &Plant, path: &Path) -> Result<()> {
    to_kv(plant).write(path)
}

pub fn read(path: &Path) -> Result<Plant> {
    let kv = KvFile::read(path)?;
    if kv.get("format") != Some(HEADER) {
        return Err(Error::format(path, format!("expected `format = {HEADER}`")));
    }
    let field = StiffnessField::new(
        split(&kv, "grid_t", path)?,
        split(&kv, "grid_f", path)?,
        split(&kv, "k", path)?,
    )?;
    let drift = DriftCurve::new(split(&kv, "drift_t", path)?, split(&kv, "drift", path)?)?;
    Plant::new(field, drift)
}
