use crate::error::{Error, Result};

/// State of the adaptive PI force controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    /// Proportional gain, 1/s.
    pub k_p: f64,
    /// Integral gain, 1/s (acts on the summed error).
    pub k_i: f64,
    /// Latest force error `F_d − F`, N.
    pub e: f64,
    /// Accumulated error, N.
    pub s: f64,
    /// Stiffness estimate used for the latest command, N/mm.
    pub k_hat: f64,
    /// Latest commanded velocity, mm/s.
    pub v_d: f64,
}

impl ControllerState {
    /// Default tuning for control period `period`: `K_P = 1/T`, `K_I = 1/(2T)`.
    pub fn new(period: f64) -> Self {
        Self::with_gains(1.0 / period, 0.5 / period)
    }

    pub fn with_gains(k_p: f64, k_i: f64) -> Self {
        Self {
            k_p,
            k_i,
            e: 0.0,
            s: 0.0,
            k_hat: 1.0,
            v_d: 0.0,
        }
    }
}

/// Adds `e` to the accumulated error, then returns the commanded velocity
/// `(K_P·e + K_I·s) / k̂` in mm/s.
pub fn pi_command(state: &mut ControllerState, e: f64, k_hat: f64) -> Result<f64> {
    if !(k_hat > 0.0) || !k_hat.is_finite() {
        return Err(Error::Controller(format!("stiffness estimate must be positive, got {k_hat}")));
    }
    state.e = e;
    state.s += e;
    state.k_hat = k_hat;
    state.v_d = (state.k_p * e + state.k_i * state.s) / k_hat;
    Ok(state.v_d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_command() {
        let mut st = ControllerState::new(0.01);
        assert_eq!(st.k_p, 100.0);
        assert_eq!(pi_command(&mut st, 1.0, 2.0).unwrap(), 75.0);
        assert_eq!(st.s, 1.0);
    }

    #[test]
    fn zero_error_gives_zero_command() {
        let mut st = ControllerState::new(0.01);
        assert_eq!(pi_command(&mut st, 0.0, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn command_scales_inversely_with_estimate() {
        for &(e, s, k) in &[(0.3, 1.2, 0.7), (-2.0, 0.5, 5.0), (1e-3, -4.0, 0.05)] {
            let mut a = ControllerState::new(0.01);
            a.s = s;
            let mut b = a;
            let va = pi_command(&mut a, e, k).unwrap();
            let vb = pi_command(&mut b, e, 2.0 * k).unwrap();
            assert_eq!(va, 2.0 * vb);
        }
    }

    #[test]
    fn non_positive_estimate_is_a_fault() {
        let mut st = ControllerState::new(0.01);
        assert!(matches!(pi_command(&mut st, 1.0, 0.0), Err(Error::Controller(_))));
        assert_eq!(st.s, 0.0);
    }
}
