use std::fmt::Write;

use super::SlidingRmseSeries;
use crate::control::ClosedLoopResult;
use crate::error::{Error, Result};

const WIDTH: f64 = 800.0;
const PANEL: f64 = 220.0;
const MARGIN: f64 = 50.0;
const MAX_POINTS: usize = 1500;

struct Panel {
    top: f64,
    t0: f64,
    t1: f64,
    y0: f64,
    y1: f64,
}

impl Panel {
    fn new(top: f64, t: &[f64], series: &[&[f64]]) -> Self {
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in series {
            for &v in s.iter() {
                y0 = y0.min(v);
                y1 = y1.max(v);
            }
        }
        if y1 - y0 < 1e-12 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let t0 = t[0];
        let t1 = if t[t.len() - 1] > t0 { t[t.len() - 1] } else { t0 + 1.0 };
        Self { top, t0, t1, y0, y1 }
    }

    fn px(&self, t: f64) -> f64 {
        MARGIN + (t - self.t0) / (self.t1 - self.t0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        self.top + PANEL - (y - self.y0) / (self.y1 - self.y0) * PANEL
    }

    fn polyline(&self, out: &mut String, t: &[f64], y: &[f64], color: &str) {
        let stride = t.len().div_ceil(MAX_POINTS).max(1);
        out.push_str("<polyline fill=\"none\" stroke-width=\"1\" stroke=\"");
        out.push_str(color);
        out.push_str("\" points=\"");
        let mut idx: Vec<usize> = (0..t.len()).step_by(stride).collect();
        if idx.last() != Some(&(t.len() - 1)) {
            idx.push(t.len() - 1);
        }
        for (n, i) in idx.into_iter().enumerate() {
            if n > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:.2},{:.2}", self.px(t[i]), self.py(y[i]));
        }
        out.push_str("\"/>\n");
    }

    fn frame(&self, out: &mut String, title: &str) {
        let _ = writeln!(
            out,
            "<rect x=\"{MARGIN}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{PANEL}\" fill=\"none\" stroke=\"#888\"/>",
            self.top,
            WIDTH - 2.0 * MARGIN
        );
        let _ = writeln!(
            out,
            "<text x=\"{MARGIN}\" y=\"{:.2}\" font-size=\"12\">{title}</text>",
            self.top - 6.0
        );
        let _ = writeln!(
            out,
            "<text x=\"4\" y=\"{:.2}\" font-size=\"10\">{:.3}</text>\n<text x=\"4\" y=\"{:.2}\" font-size=\"10\">{:.3}</text>",
            self.top + 10.0,
            self.y1,
            self.top + PANEL,
            self.y0
        );
    }
}

/// Two-panel line plot: force against target, and sliding RMSE.
pub fn render_run(title: &str, result: &ClosedLoopResult, series: &SlidingRmseSeries) -> Result<String> {
    if result.is_empty() || series.values.is_empty() {
        return Err(Error::Dimension(format!("nothing to plot for {title}")));
    }
    let h = 2.0 * PANEL + 3.0 * MARGIN;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{h}\" viewBox=\"0 0 {WIDTH} {h}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let force = Panel::new(MARGIN, &result.t, &[&result.force, &result.f_d]);
    force.frame(&mut out, &format!("{title}: force (black) and target (red), N"));
    force.polyline(&mut out, &result.t, &result.f_d, "#c00");
    force.polyline(&mut out, &result.t, &result.force, "#000");
    let rmse = Panel::new(2.0 * MARGIN + PANEL, &series.times, &[&series.values]);
    rmse.frame(&mut out, "sliding RMSE, N");
    rmse.polyline(&mut out, &series.times, &series.values, "#06c");
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" text-anchor=\"end\">t = {:.1} s</text>",
        WIDTH - MARGIN,
        h - 10.0,
        rmse.t1
    );
    out.push_str("</svg>\n");
    Ok(out)
}
