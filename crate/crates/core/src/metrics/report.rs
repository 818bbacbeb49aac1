use std::path::{Path, PathBuf};

use super::svg::render_run;
use super::{summarize, PerformanceSummary, SlidingRmseSeries};
use crate::control::ClosedLoopResult;
use crate::error::{Error, Result};
use crate::kv::{write_atomic, KvFile};

pub const TABLE_FILE: &str = "report.csv";
pub const TABLE_HEADER: &str = "scenario,estimator,asymptotic_error_N,probing_time_s,diverged";

/// A finished run with its metrics.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub summary: PerformanceSummary,
    pub result: ClosedLoopResult,
    pub series: SlidingRmseSeries,
}

impl RunRecord {
    pub fn new(result: ClosedLoopResult, window: f64, scenario: &str, estimator: &str) -> Result<Self> {
        let (summary, series) = summarize(&result, window, scenario, estimator)?;
        Ok(Self {
            summary,
            result,
            series,
        })
    }

    pub fn stem(&self) -> String {
        format!("{}_{}", self.summary.scenario, self.summary.estimator)
    }
}

/// Loads every run in `dir`: each `<name>.summary` file names its scenario,
/// estimator, metric window and result CSV.
pub fn load_runs(dir: &Path) -> Result<Vec<RunRecord>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut summaries: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "summary"))
        .collect();
    summaries.sort();
    let mut runs = Vec::with_capacity(summaries.len());
    for path in summaries {
        let kv = KvFile::read(&path)?;
        let field = |k: &str| {
            kv.get(k)
                .map(str::to_string)
                .ok_or_else(|| Error::format(&path, format!("missing `{k}`")))
        };
        let csv_path = dir.join(field("csv")?);
        let text = std::fs::read_to_string(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        let mut result = ClosedLoopResult::from_csv(&text, &csv_path)?;
        result.diverged = kv.parse_or("diverged", false)?;
        if let Some(p) = kv.parse::<f64>("period")? {
            result.period = p;
        }
        let window: f64 = kv
            .parse("window")?
            .ok_or_else(|| Error::format(&path, "missing `window`"))?;
        runs.push(RunRecord::new(result, window, &field("scenario")?, &field("estimator")?)?);
    }
    Ok(runs)
}

fn table(runs: &[RunRecord]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in runs {
        let s = &r.summary;
        out.push_str(&format!(
            "{},{},{:.6},{:.2},{}\n",
            s.scenario, s.estimator, s.asymptotic_error, s.probing_time.time, s.diverged
        ));
    }
    out
}

/// Writes the comparison table and one plot per run into `out`. Nothing is
/// written unless every plot renders.
pub fn compare_runs(runs: &[RunRecord], out: &Path) -> Result<Vec<PathBuf>> {
    if runs.is_empty() {
        return Err(Error::Dimension("no runs to compare".into()));
    }
    let plots = runs
        .iter()
        .map(|r| Ok((out.join(format!("{}.svg", r.stem())), render_run(&r.stem(), &r.result, &r.series)?)))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let table_path = out.join(TABLE_FILE);
    write_atomic(&table_path, table(runs).as_bytes())?;
    let mut written = vec![table_path];
    for (path, svg) in plots {
        write_atomic(&path, svg.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
