//! Line-oriented `key = value` text files.
//!
//! Used for dataset manifests, run summaries, and experiment configs. Keys
//! keep their insertion order so that writing is deterministic. Blank lines
//! and lines starting with `#` are ignored on read.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvFile {
    entries: Vec<(String, String)>,
}

impl KvFile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key`, replacing an existing value in place.
    pub fn set(&mut self, key: impl Into<String>, value: impl Display) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Parses the value for `key`, if present.
    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::Config(format!("cannot parse `{key} = {raw}`"))),
        }
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose key starts with `prefix.`, with the prefix stripped.
    pub fn section(&self, prefix: &str) -> KvFile {
        let lead = format!("{prefix}.");
        KvFile {
            entries: self
                .entries
                .iter()
                .filter_map(|(k, v)| k.strip_prefix(&lead).map(|k| (k.to_string(), v.clone())))
                .collect(),
        }
    }

    pub fn parse_str(text: &str) -> std::result::Result<Self, String> {
        let mut kv = KvFile::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(format!("line {}: empty key", lineno + 1));
            }
            kv.set(k, v.trim());
        }
        Ok(kv)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text).map_err(|msg| Error::format(path, msg))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_text().as_bytes())
    }
}

/// Writes through a sibling temporary file and renames it into place, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_ignores_comments_and_trims() {
        let kv = KvFile::parse_str("# hi\n a = 1 \n\nb=two words\n").unwrap();
        assert_eq!(kv.get("a"), Some("1"));
        assert_eq!(kv.get("b"), Some("two words"));
        assert_eq!(kv.len(), 2);
    }

    #[test]
    fn set_replaces_in_place() {
        let mut kv = KvFile::new();
        kv.set("x", 1);
        kv.set("y", 2);
        kv.set("x", 3);
        assert_eq!(kv.to_text(), "x = 3\ny = 2\n");
    }

    #[test]
    fn section_strips_prefix() {
        let kv = KvFile::parse_str("gen.seed = 4\ntrain.epochs = 2\ngen.n_traces = 9").unwrap();
        let gen = kv.section("gen");
        assert_eq!(gen.parse::<u64>("seed").unwrap(), Some(4));
        assert_eq!(gen.parse::<usize>("n_traces").unwrap(), Some(9));
        assert!(gen.get("epochs").is_none());
    }

    #[test]
    fn bad_line_is_rejected() {
        assert!(KvFile::parse_str("novalue\n").is_err());
        let kv = KvFile::parse_str("a = x").unwrap();
        assert!(kv.parse::<f64>("a").is_err());
    }
}
