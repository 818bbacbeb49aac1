use crate::error::{Error, Result};

/// Relative slack when checking a query against the grid extent.
const RANGE_SLACK: f64 = 1e-9;

/// Generalized stiffness `k_t(F)` on a rectilinear grid, bilinear between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessField {
    grid_t: Vec<f64>,
    grid_f: Vec<f64>,
    /// Row-major: `values[i * grid_f.len() + j]` is `k(grid_t[i], grid_f[j])`.
    values: Vec<f64>,
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Domain(format!("{name} needs at least two nodes")));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("{name} must be finite and strictly increasing")));
    }
    Ok(())
}

/// Locates `v` in `grid`, returning the cell index and the fractional offset.
fn locate(grid: &[f64], v: f64, what: &str) -> Result<(usize, f64)> {
    let lo = grid[0];
    let hi = grid[grid.len() - 1];
    let slack = RANGE_SLACK * (hi - lo).abs().max(1.0);
    if !v.is_finite() || v < lo - slack || v > hi + slack {
        return Err(Error::Domain(format!("{what} = {v} outside [{lo}, {hi}]")));
    }
    let v = v.clamp(lo, hi);
    let i = match grid.partition_point(|&g| g <= v) {
        0 => 0,
        p => (p - 1).min(grid.len() - 2),
    };
    Ok((i, (v - grid[i]) / (grid[i + 1] - grid[i])))
}

impl StiffnessField {
    pub fn new(grid_t: Vec<f64>, grid_f: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid("grid_t", &grid_t)?;
        check_grid("grid_f", &grid_f)?;
        if grid_f[0] != 0.0 {
            return Err(Error::Domain("grid_f must start at 0 N".into()));
        }
        if values.len() != grid_t.len() * grid_f.len() {
            return Err(Error::Dimension(format!(
                "{} values for a {}x{} grid",
                values.len(),
                grid_t.len(),
                grid_f.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain("stiffness values must be finite and non-negative".into()));
        }
        Ok(Self {
            grid_t,
            grid_f,
            values,
        })
    }

    pub fn from_fn(
        grid_t: Vec<f64>,
        grid_f: Vec<f64>,
        mut k: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self> {
        let values = grid_t
            .iter()
            .flat_map(|&t| grid_f.iter().map(move |&f| (t, f)))
            .map(|(t, f)| k(t, f))
            .collect();
        Self::new(grid_t, grid_f, values)
    }

    /// Same stiffness everywhere on `[0, t_end] x [0, f_max]`.
    pub fn constant(k: f64, t_end: f64, f_max: f64) -> Result<Self> {
        Self::new(vec![0.0, t_end], vec![0.0, f_max], vec![k; 4])
    }

    pub fn grid_t(&self) -> &[f64] {
        &self.grid_t
    }

    pub fn grid_f(&self) -> &[f64] {
        &self.grid_f
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid_f.len() + j]
    }

    pub fn f_max(&self) -> f64 {
        self.grid_f[self.grid_f.len() - 1]
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.grid_t[0], self.grid_t[self.grid_t.len() - 1])
    }

    pub fn stiffness_at(&self, t: f64, force: f64) -> Result<f64> {
        let (i, a) = locate(&self.grid_t, t, "t")?;
        let (j, b) = locate(&self.grid_f, force, "F")?;
        let k00 = self.node(i, j);
        let k01 = self.node(i, j + 1);
        let k10 = self.node(i + 1, j);
        let k11 = self.node(i + 1, j + 1);
        let lo = k00 + b * (k01 - k00);
        let hi = k10 + b * (k11 - k10);
        Ok(lo + a * (hi - lo))
    }

    /// The piecewise-linear force profile of the field at time `t`.
    pub fn slice_at(&self, t: f64) -> Result<ForceSlice<'_>> {
        let (i, a) = locate(&self.grid_t, t, "t")?;
        let n = self.grid_f.len();
        let row0 = &self.values[i * n..(i + 1) * n];
        let row1 = &self.values[(i + 1) * n..(i + 2) * n];
        let k: Vec<f64> = row0
            .iter()
            .zip(row1)
            .map(|(&k0, &k1)| k0 + a * (k1 - k0))
            .collect();
        if k.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain(format!("non-positive stiffness at t = {t}")));
        }
        let mut cumulative = Vec::with_capacity(n);
        cumulative.push(0.0);
        for j in 0..n - 1 {
            let c = cumulative[j] + cell_integral(self.grid_f[j + 1] - self.grid_f[j], k[j], k[j + 1]);
            cumulative.push(c);
        }
        Ok(ForceSlice {
            grid_f: &self.grid_f,
            k,
            cumulative,
        })
    }
}

/// `∫₀^u dF / (k0 + s F)` with `s = (k1 - k0) / width`, for `0 <= u <= width`.
fn partial_integral(u: f64, width: f64, k0: f64, k1: f64) -> f64 {
    let r = (k1 - k0) * u / (width * k0);
    u / k0 * ln1p_over(r)
}

fn cell_integral(width: f64, k0: f64, k1: f64) -> f64 {
    partial_integral(width, width, k0, k1)
}

/// `ln(1 + r) / r`, continuous at `r = 0`.
fn ln1p_over(r: f64) -> f64 {
    if r.abs() < 1e-12 {
        1.0 - 0.5 * r
    } else {
        r.ln_1p() / r
    }
}

/// `(e^z - 1) / z`, continuous at `z = 0`.
fn expm1_over(z: f64) -> f64 {
    if z.abs() < 1e-12 {
        1.0 + 0.5 * z
    } else {
        z.exp_m1() / z
    }
}

/// Stiffness as a function of force at one instant.
///
/// Within each force cell the stiffness is linear, so the compliance integral
/// has the closed form `ln(k(F) / k0) / s` and is evaluated exactly per cell.
#[derive(Debug, Clone)]
pub struct ForceSlice<'a> {
    grid_f: &'a [f64],
    k: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ForceSlice<'_> {
    pub fn stiffness(&self) -> &[f64] {
        &self.k
    }

    /// `∫₀^{F_max} dF / k`.
    pub fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    /// `∫₀^F dF / k` in mm.
    pub fn compliance_integral(&self, force: f64) -> Result<f64> {
        let (j, b) = locate(self.grid_f, force, "F")?;
        let width = self.grid_f[j + 1] - self.grid_f[j];
        Ok(self.cumulative[j] + partial_integral(b * width, width, self.k[j], self.k[j + 1]))
    }

    /// Inverse of [`ForceSlice::compliance_integral`] for `0 <= y <= total()`.
    pub fn force_for_integral(&self, y: f64) -> f64 {
        let y = y.clamp(0.0, self.total());
        let j = match self.cumulative.partition_point(|&c| c <= y) {
            0 => 0,
            p => (p - 1).min(self.grid_f.len() - 2),
        };
        let width = self.grid_f[j + 1] - self.grid_f[j];
        let k0 = self.k[j];
        let slope = (self.k[j + 1] - k0) / width;
        let rest = y - self.cumulative[j];
        // ln(1 + s u / k0) / s = rest  =>  u = k0 (e^{s rest} - 1) / s
        let u = k0 * rest * expm1_over(slope * rest);
        (self.grid_f[j] + u.clamp(0.0, width)).min(self.grid_f[j + 1])
    }
}
