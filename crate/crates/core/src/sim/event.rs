use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemState;
use crate::sim::integrator::{DenseOutput, IntegratorConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    /// Contact force reached zero from above.
    UnlatchTauZero,
    /// Projectile reached the tangency point `p = R`.
    TakeoffTangency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    pub state: SystemState,
}

/// A time interval together with a way to reconstruct the state inside it.
pub trait Interpolant {
    fn t_start(&self) -> f64;
    fn t_end(&self) -> f64;
    fn state_at(&self, t: f64) -> SystemState;
}

impl Interpolant for DenseOutput {
    fn t_start(&self) -> f64 {
        DenseOutput::t_start(self)
    }

    fn t_end(&self) -> f64 {
        DenseOutput::t_end(self)
    }

    fn state_at(&self, t: f64) -> SystemState {
        DenseOutput::state_at(self, t)
    }
}

/// Straight-line interpolation between two bracketing states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearBracket {
    pub t_lo: f64,
    pub state_lo: SystemState,
    pub t_hi: f64,
    pub state_hi: SystemState,
}

impl Interpolant for LinearBracket {
    fn t_start(&self) -> f64 {
        self.t_lo
    }

    fn t_end(&self) -> f64 {
        self.t_hi
    }

    fn state_at(&self, t: f64) -> SystemState {
        let span = self.t_hi - self.t_lo;
        let s = if span > 0.0 { (t - self.t_lo) / span } else { 0.0 };
        let a = self.state_lo.to_array();
        let b = self.state_hi.to_array();
        SystemState::from_array(std::array::from_fn(|i| a[i] + s * (b[i] - a[i])))
    }
}

/// Bisects the bracket until the crossing of `event_fn` is pinned to within
/// `config.event_time_tol`, and returns the event on the far side of the crossing.
pub fn locate_event<I, G>(bracket: &I, kind: EventKind, event_fn: G, config: &IntegratorConfig) -> Result<Event>
where
    I: Interpolant,
    G: Fn(&SystemState) -> Result<f64>,
{
    let mut t_lo = bracket.t_start();
    let mut t_hi = bracket.t_end();
    let f_lo = event_fn(&bracket.state_at(t_lo))?;
    let f_hi = event_fn(&bracket.state_at(t_hi))?;
    if f_lo == 0.0 {
        return Ok(Event { t: t_lo, kind, state: bracket.state_at(t_lo) });
    }
    if f_hi != 0.0 && f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::NoSignChange { t_lo, t_hi, f_lo, f_hi });
    }
    let side = f_lo.signum();
    while t_hi - t_lo > config.event_time_tol {
        let mid = 0.5 * (t_lo + t_hi);
        if mid <= t_lo || mid >= t_hi {
            break;
        }
        let f_mid = event_fn(&bracket.state_at(mid))?;
        if f_mid != 0.0 && f_mid.signum() == side {
            t_lo = mid;
        } else {
            t_hi = mid;
        }
    }
    Ok(Event { t: t_hi, kind, state: bracket.state_at(t_hi) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bracket() -> LinearBracket {
        LinearBracket {
            t_lo: 1.0,
            state_lo: SystemState::new(4.0, 1.0, 0.0, 0.0),
            t_hi: 1.5,
            state_hi: SystemState::new(6.0, 1.0, 0.0, 0.0),
        }
    }

    #[test]
    fn tau_like_sign_change() {
        // "tau" falls linearly from +1 to -1 across the bracket
        let config = IntegratorConfig::default();
        let b = bracket();
        let tau = |s: &SystemState| Ok(5.0 - s.p);
        let event = locate_event(&b, EventKind::UnlatchTauZero, tau, &config).unwrap();
        assert!((event.t - 1.25).abs() <= config.event_time_tol);
        assert!(tau(&event.state).unwrap().abs() <= 4.0 * config.event_time_tol * 4.0);
        assert!(tau(&event.state).unwrap() <= 0.0);
    }

    #[test]
    fn tangency_crossing() {
        let config = IntegratorConfig::default();
        let event = locate_event(&bracket(), EventKind::TakeoffTangency, |s| Ok(5.0 - s.p), &config).unwrap();
        assert!((event.state.p - 5.0).abs() <= 1e-9);
        assert_eq!(event.kind, EventKind::TakeoffTangency);
    }

    #[test]
    fn same_sign_is_rejected() {
        let config = IntegratorConfig::default();
        let err = locate_event(&bracket(), EventKind::UnlatchTauZero, |s| Ok(10.0 - s.p), &config).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }
}
