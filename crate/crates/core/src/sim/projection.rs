use crate::error::{Error, Result};
use crate::model::{SystemParams, SystemState};

const MAX_ITERATIONS: usize = 25;

/// Pulls a near-constraint state back onto `h = 0` and `h' = 0`.
///
/// Positions move along the minimum-norm Gauss-Newton direction in `(p, l)`.
/// For velocities, the coordinate with the larger constraint gradient is
/// treated as dependent and solved from `h' = 0`; the other is kept.
pub fn project_to_constraint(params: &SystemParams, state: &SystemState) -> Result<SystemState> {
    let r = params.latch_radius;
    let tol = 1e-12 * r.max(1.0).powi(2);
    let SystemState { mut p, mut p_dot, mut l, mut l_dot } = *state;

    let h0 = params.holonomic_h(p, l);
    if !h0.is_finite() || h0.abs() >= 0.1 * r * r {
        return Err(Error::InvalidState(format!("state too far from the constraint to project (h = {h0})")));
    }

    let mut h = h0;
    let mut iterations = 0;
    while h.abs() > tol {
        if iterations == MAX_ITERATIONS {
            return Err(Error::ProjectionFailure { iterations, residual: h.abs() });
        }
        let gp = -2.0 * (r - p);
        let gl = 2.0 * l;
        let norm2 = gp * gp + gl * gl;
        if norm2 == 0.0 {
            return Err(Error::ProjectionFailure { iterations, residual: h.abs() });
        }
        p -= gp * h / norm2;
        l -= gl * h / norm2;
        h = params.holonomic_h(p, l);
        iterations += 1;
    }

    let dp = r - p;
    let h_dot = 2.0 * l * l_dot - 2.0 * dp * p_dot;
    let vel_scale = (l * l_dot).abs() + (dp * p_dot).abs();
    if h_dot.abs() > 1e-14 * vel_scale.max(f64::MIN_POSITIVE) {
        if l.abs() >= dp.abs() {
            l_dot = dp * p_dot / l;
        } else {
            p_dot = l * l_dot / dp;
        }
    }

    Ok(SystemState { p, p_dot, l, l_dot })
}
