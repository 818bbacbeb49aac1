//! Force-tracking performance metrics and comparison reports.

mod report;
mod svg;

pub use report::{compare_runs, load_runs, RunRecord, TABLE_FILE, TABLE_HEADER};
pub use svg::render_run;

use crate::control::ClosedLoopResult;
use crate::error::{Error, Result};

/// RMSE of the tracking error over the trailing window at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SlidingRmseSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Window length, s.
    pub window: f64,
    /// Window length in samples.
    pub window_samples: usize,
}

impl SlidingRmseSeries {
    /// Mean of the series: one number for a whole run.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len().max(1) as f64
    }
}

/// Sliding RMSE of `errors` sampled every `dt` seconds. Each value covers
/// the `window / dt` most recent samples, or all samples so far early on.
pub fn sliding_rmse_of(errors: &[f64], dt: f64, window: f64) -> Result<SlidingRmseSeries> {
    if errors.is_empty() {
        return Err(Error::Dimension("empty error series".into()));
    }
    if !(dt > 0.0 && window > 0.0) {
        return Err(Error::Config("sample spacing and window must be positive".into()));
    }
    let w = ((window / dt).round() as usize).max(1);
    let values = (0..errors.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(w);
            let span = &errors[lo..=i];
            (span.iter().map(|e| e * e).sum::<f64>() / span.len() as f64).sqrt()
        })
        .collect();
    Ok(SlidingRmseSeries {
        times: (0..errors.len()).map(|i| i as f64 * dt).collect(),
        values,
        window,
        window_samples: w,
    })
}

pub fn sliding_rmse(result: &ClosedLoopResult, window: f64) -> Result<SlidingRmseSeries> {
    let mut s = sliding_rmse_of(&result.e, result.period, window)?;
    s.times.clone_from(&result.t);
    Ok(s)
}

/// Mean of the series over its final window. Requires at least three
/// windows of data.
pub fn asymptotic_error(series: &SlidingRmseSeries) -> Result<f64> {
    let w = series.window_samples;
    if series.values.len() < 3 * w {
        return Err(Error::Domain(format!(
            "asymptote needs at least {} samples, run has {}",
            3 * w,
            series.values.len()
        )));
    }
    Ok(final_window_mean(series))
}

fn final_window_mean(series: &SlidingRmseSeries) -> f64 {
    let n = series.values.len();
    let tail = &series.values[n.saturating_sub(series.window_samples)..];
    let Some(&first) = tail.first() else {
        return 0.0;
    };
    // mean of deviations from the first value: exact for a constant tail
    first + tail.iter().map(|v| v - first).sum::<f64>() / tail.len() as f64
}

/// Settling time of the sliding RMSE onto its asymptote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbingTime {
    /// Seconds; the run duration when the series never settles.
    pub time: f64,
    pub settled: bool,
}

/// Band factor: the series counts as settled inside `[a/1.7, 1.7·a]`.
pub const BAND: f64 = 1.7;

/// First time after which the series stays inside the band around
/// `asymptote` for the rest of the run.
pub fn probing_time(series: &SlidingRmseSeries, asymptote: f64) -> ProbingTime {
    let (lo, hi) = (asymptote / BAND, asymptote * BAND);
    let inside = |v: f64| asymptote >= 0.0 && v >= lo && v <= hi;
    let end = series.times.last().copied().unwrap_or(0.0);
    let mut first = series.values.len();
    for (i, &v) in series.values.iter().enumerate().rev() {
        if !inside(v) {
            break;
        }
        first = i;
    }
    if first == series.values.len() {
        ProbingTime {
            time: end,
            settled: false,
        }
    } else {
        ProbingTime {
            time: series.times[first],
            settled: true,
        }
    }
}

/// Metrics of one closed-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceSummary {
    pub scenario: String,
    pub estimator: String,
    /// N.
    pub asymptotic_error: f64,
    pub probing_time: ProbingTime,
    pub diverged: bool,
    /// Mean sliding RMSE over the whole run, N.
    pub mean_sliding_rmse: f64,
}

/// Computes the metrics of a run with sliding window `window` seconds.
/// Diverged runs report the mean over whatever final window they have.
pub fn summarize(
    result: &ClosedLoopResult,
    window: f64,
    scenario: &str,
    estimator: &str,
) -> Result<(PerformanceSummary, SlidingRmseSeries)> {
    let series = sliding_rmse(result, window)?;
    let asymptote = if result.diverged {
        final_window_mean(&series)
    } else {
        asymptotic_error(&series)?
    };
    let summary = PerformanceSummary {
        scenario: scenario.to_string(),
        estimator: estimator.to_string(),
        asymptotic_error: asymptote,
        probing_time: probing_time(&series, asymptote),
        diverged: result.diverged,
        mean_sliding_rmse: series.mean(),
    };
    Ok((summary, series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_and_alternating_errors() {
        let zero = sliding_rmse_of(&[0.0; 50], 0.1, 1.0).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
        let half = sliding_rmse_of(&[0.5; 50], 0.1, 1.0).unwrap();
        assert!(half.values[9..].iter().all(|&v| (v - 0.5).abs() < 1e-15));
        let alt: Vec<f64> = (0..50).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(sliding_rmse_of(&alt, 0.1, 1.0).unwrap().values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(sliding_rmse_of(&[], 0.1, 1.0).is_err());
    }

    fn series(values: Vec<f64>, dt: f64, window: f64) -> SlidingRmseSeries {
        SlidingRmseSeries {
            times: (0..values.len()).map(|i| i as f64 * dt).collect(),
            window_samples: (window / dt).round() as usize,
            values,
            window,
        }
    }

    #[test]
    fn asymptote_of_constant_and_decaying_series() {
        assert_eq!(asymptotic_error(&series(vec![0.3; 300], 0.1, 10.0)).unwrap(), 0.3);
        let decaying: Vec<f64> = (0..400).map(|i| 0.2 + (-(i as f64) * 0.1).exp()).collect();
        let a = asymptotic_error(&series(decaying, 0.1, 10.0)).unwrap();
        assert!((a - 0.2).abs() < 0.01);
        assert!(asymptotic_error(&series(vec![0.3; 299], 0.1, 10.0)).is_err());
    }

    #[test]
    fn probing_time_examples() {
        let flat = series(vec![0.4; 100], 0.1, 1.0);
        assert_eq!(probing_time(&flat, 0.4), ProbingTime { time: 0.0, settled: true });
        let mut v = vec![5.0; 30];
        v.extend(vec![1.0; 70]);
        let p = probing_time(&series(v, 0.1, 1.0), 1.0);
        assert!(p.settled && (p.time - 3.0).abs() < 1e-12);
        let never = probing_time(&series(vec![5.0; 100], 0.1, 1.0), 1.0);
        assert!(!never.settled);
        assert!((never.time - 9.9).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn offset_invariance(errors in prop::collection::vec(-2.0f64..2.0, 1..200), offset in -5.0f64..5.0) {
            // the error depends on F_d − F only, so a shared offset changes nothing
            let f: Vec<f64> = errors.iter().map(|e| 3.0 - e).collect();
            let fd = vec![3.0; errors.len()];
            let shifted: Vec<f64> = fd.iter().zip(&f).map(|(d, f)| (d + offset) - (f + offset)).collect();
            let a = sliding_rmse_of(&errors, 0.01, 0.5).unwrap();
            let b = sliding_rmse_of(&shifted, 0.01, 0.5).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn shrinking_early_errors_never_delays_probing(
            errors in prop::collection::vec(-1.0f64..1.0, 60..240),
            factor in 0.0f64..1.0,
            cut_frac in 0.0f64..1.0,
        ) {
            let dt = 0.1;
            let window = 1.0;
            let base = sliding_rmse_of(&errors, dt, window).unwrap();
            let a = final_window_mean(&base);
            let p0 = probing_time(&base, a);
            // changes before t* − window leave every value from t* on untouched
            let w = base.window_samples;
            let t_star = (p0.time / dt).round() as usize;
            let limit = (t_star + 1).saturating_sub(w);
            let cut = (cut_frac * limit as f64) as usize;
            let mut shrunk = errors.clone();
            for e in &mut shrunk[..cut] {
                *e *= factor;
            }
            let p1 = probing_time(&sliding_rmse_of(&shrunk, dt, window).unwrap(), a);
            prop_assert!(p1.time <= p0.time + 1e-12);
        }
    }
}
