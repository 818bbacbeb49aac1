//! On-disk datasets: one CSV per trace plus a `manifest.txt`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{synthesize_trace, trace_rng, GenConfig, GraspTrace, Provenance};
use crate::error::{Error, Result};
use crate::kv::KvFile;

pub const MANIFEST: &str = "manifest.txt";
pub const FORMAT: &str = "gfl-dataset v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
}

impl Split {
    fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSummary {
    pub manifest: PathBuf,
    pub files: Vec<(PathBuf, Split, u32)>,
}

fn trace_name(i: usize) -> String {
    format!("traces/trace_{i:05}.csv")
}

/// Writes `cfg.n_traces` traces and the manifest under `out`.
///
/// Output bytes depend only on the config: every trace draws from its own
/// random stream, and files are named by index.
pub fn generate_dataset(cfg: &GenConfig, out: &Path) -> Result<DatasetSummary> {
    cfg.validate()?;
    let traces_dir = out.join("traces");
    std::fs::create_dir_all(&traces_dir).map_err(|e| Error::io(&traces_dir, e))?;
    let hash = cfg.hash();
    let n_train = cfg.n_train();

    let results: Vec<Result<(PathBuf, Split, u32)>> = (0..cfg.n_traces)
        .into_par_iter()
        .map(|i| {
            let mut rng = trace_rng(cfg.seed, i as u64);
            let sampled = synthesize_trace(cfg, &mut rng)?;
            let bytes = sampled.trace.to_csv().into_bytes();
            let rel = PathBuf::from(trace_name(i));
            let path = out.join(&rel);
            std::fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
            let split = if i < n_train { Split::Train } else { Split::Val };
            Ok((rel, split, crc32fast::hash(&bytes)))
        })
        .collect();
    let files = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut kv = KvFile::new();
    kv.set("format", FORMAT);
    kv.set("config_hash", &hash);
    kv.set(
        "scale",
        format!(
            "{} train + {} val (reference scale is 8000 + 2000)",
            n_train,
            cfg.n_val()
        ),
    );
    for (k, v) in cfg.to_kv().entries() {
        kv.set(format!("gen.{k}"), v);
    }
    kv.set("n_train", n_train);
    kv.set("n_val", cfg.n_val());
    for (i, (rel, split, crc)) in files.iter().enumerate() {
        kv.set(
            format!("trace.{i:05}"),
            format!("{},{},{crc:08x}", rel.display(), split.as_str()),
        );
    }
    let manifest = out.join(MANIFEST);
    kv.write(&manifest)?;
    Ok(DatasetSummary { manifest, files })
}

/// A loaded dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub config: GenConfig,
    pub config_hash: String,
    pub train: Vec<GraspTrace>,
    pub val: Vec<GraspTrace>,
}

impl Dataset {
    /// Loads and checksum-verifies a dataset written by [`generate_dataset`].
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest_path = dir.join(MANIFEST);
        let kv = KvFile::read(&manifest_path)?;
        if kv.get("format") != Some(FORMAT) {
            return Err(Error::format(&manifest_path, format!("expected `format = {FORMAT}`")));
        }
        let config = GenConfig::from_kv(&kv.section("gen"))?;
        let config_hash = kv.get("config_hash").unwrap_or_default().to_string();
        let entries: Vec<(usize, String)> = kv
            .entries()
            .filter_map(|(k, v)| {
                k.strip_prefix("trace.")
                    .and_then(|i| i.parse().ok())
                    .map(|i| (i, v.to_string()))
            })
            .collect();
        let loaded: Vec<Result<(Split, GraspTrace)>> = entries
            .par_iter()
            .map(|(index, value)| {
                let mut parts = value.split(',');
                let (rel, split, crc) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(r), Some(s), Some(c)) => (r, s, c),
                    _ => return Err(Error::format(&manifest_path, format!("bad trace entry `{value}`"))),
                };
                let split = match split {
                    "train" => Split::Train,
                    "val" => Split::Val,
                    other => return Err(Error::format(&manifest_path, format!("unknown split `{other}`"))),
                };
                let path = dir.join(rel);
                let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                let actual = format!("{:08x}", crc32fast::hash(&bytes));
                if actual != crc {
                    return Err(Error::format(&path, format!("checksum {actual} != manifest {crc}")));
                }
                let text = String::from_utf8(bytes).map_err(|_| Error::format(&path, "not UTF-8"))?;
                let trace = GraspTrace::from_csv(&text, &path)?.with_provenance(Provenance {
                    seed: config.seed,
                    index: *index as u64,
                    config_hash: config_hash.clone(),
                });
                Ok((split, trace))
            })
            .collect();
        let mut train = Vec::new();
        let mut val = Vec::new();
        for item in loaded {
            match item? {
                (Split::Train, t) => train.push(t),
                (Split::Val, t) => val.push(t),
            }
        }
        Ok(Self {
            config,
            config_hash,
            train,
            val,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> GenConfig {
        GenConfig {
            n_traces: 5,
            duration: 2.0,
            ..GenConfig::default()
        }
    }

    #[test]
    fn empty_dataset_writes_manifest_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = GenConfig {
            n_traces: 0,
            ..small()
        };
        let s = generate_dataset(&cfg, dir.path()).unwrap();
        assert!(s.files.is_empty());
        assert!(s.manifest.exists());
        let ds = Dataset::load(dir.path()).unwrap();
        assert!(ds.train.is_empty() && ds.val.is_empty());
    }

    #[test]
    fn same_seed_gives_identical_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        generate_dataset(&small(), a.path()).unwrap();
        generate_dataset(&small(), b.path()).unwrap();
        for name in ["manifest.txt", "traces/trace_00000.csv", "traces/trace_00004.csv"] {
            assert_eq!(
                std::fs::read(a.path().join(name)).unwrap(),
                std::fs::read(b.path().join(name)).unwrap(),
                "{name}"
            );
        }
    }

    #[test]
    fn load_splits_and_verifies_checksums() {
        let dir = tempfile::tempdir().unwrap();
        generate_dataset(&small(), dir.path()).unwrap();
        let ds = Dataset::load(dir.path()).unwrap();
        assert_eq!((ds.train.len(), ds.val.len()), (4, 1));
        assert_eq!(ds.train[0].len(), 201);
        assert_eq!(ds.val[0].provenance.as_ref().unwrap().index, 4);

        std::fs::write(dir.path().join("traces/trace_00001.csv"), "t,F,x,k_true\n0,1,1,1\n").unwrap();
        assert!(matches!(Dataset::load(dir.path()), Err(Error::Format { .. })));
    }
}
