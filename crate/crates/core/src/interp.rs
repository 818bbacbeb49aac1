//! Shape-preserving piecewise cubic interpolation (Fritsch–Carlson).

/// Monotone cubic Hermite interpolant through `(xs[i], ys[i])`.
///
/// Between two knots the curve never leaves the interval spanned by their
/// values, so sampled waypoints bound the whole curve.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Panics if fewer than two knots are given or `xs` is not strictly increasing.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert!(xs.len() >= 2 && xs.len() == ys.len(), "need at least two knots");
        assert!(xs.windows(2).all(|w| w[1] > w[0]), "knots must increase");
        let n = xs.len();
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]))
            .collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = secant[0];
        slopes[n - 1] = secant[n - 2];
        for i in 1..n - 1 {
            slopes[i] = if secant[i - 1] * secant[i] <= 0.0 {
                0.0
            } else {
                // weighted harmonic mean keeps the interpolant monotone
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w0 = 2.0 * h1 + h0;
                let w1 = h1 + 2.0 * h0;
                (w0 + w1) / (w0 / secant[i - 1] + w1 / secant[i])
            };
        }
        // endpoint slopes: clip to keep the first/last segment monotone
        for (end, inner) in [(0usize, 0usize), (n - 1, n - 2)] {
            let d = secant[inner];
            if slopes[end] * d <= 0.0 {
                slopes[end] = 0.0;
            } else if slopes[end].abs() > 3.0 * d.abs() {
                slopes[end] = 3.0 * d;
            }
        }
        Self { xs, ys, slopes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        // h00 = 1 - h01; written this way flat segments reproduce their level exactly
        self.ys[i]
            + h01 * (self.ys[i + 1] - self.ys[i])
            + h * (h10 * self.slopes[i] + h11 * self.slopes[i + 1])
    }
}
