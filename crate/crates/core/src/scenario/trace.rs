use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const TRACE_HEADER: &str = "t,F,x,k_true";

/// Where a trace came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub seed: u64,
    pub index: u64,
    pub config_hash: String,
}

/// Aligned samples of one grasping process at period `period`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspTrace {
    pub period: f64,
    pub t: Vec<f64>,
    /// N.
    pub force: Vec<f64>,
    /// mm.
    pub x: Vec<f64>,
    /// N/mm.
    pub k_true: Vec<f64>,
    pub provenance: Option<Provenance>,
}

impl GraspTrace {
    pub fn new(period: f64, t: Vec<f64>, force: Vec<f64>, x: Vec<f64>, k_true: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if force.len() != n || x.len() != n || k_true.len() != n {
            return Err(Error::Dimension(format!(
                "trace series lengths differ: t {n}, F {}, x {}, k {}",
                force.len(),
                x.len(),
                k_true.len()
            )));
        }
        Ok(Self {
            period,
            t,
            force,
            x,
            k_true,
            provenance: None,
        })
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = Some(p);
        self
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 48 + 16);
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                format_sig9(self.t[i]),
                format_sig9(self.force[i]),
                format_sig9(self.x[i]),
                format_sig9(self.k_true[i])
            );
        }
        out
    }

    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(TRACE_HEADER) {
            return Err(Error::format(path, format!("expected header `{TRACE_HEADER}`")));
        }
        let (mut t, mut force, mut x, mut k) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut cols = line.split(',').map(|c| c.trim().parse::<f64>());
            let mut next = || -> Result<f64> {
                cols.next()
                    .and_then(|c| c.ok())
                    .ok_or_else(|| Error::format(path, format!("bad row {}", n + 2)))
            };
            t.push(next()?);
            force.push(next()?);
            x.push(next()?);
            k.push(next()?);
        }
        let period = if t.len() >= 2 { t[1] - t[0] } else { 0.0 };
        Self::new(period, t, force, x, k)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, path)
    }
}

/// Formats like C's `%.9g`: nine significant digits, trailing zeros removed,
/// scientific notation only for exponents below -4 or above 8.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
