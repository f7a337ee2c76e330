//! Forward simulation of the switched latched/unlatched dynamics.
//!
//! A run starts latched when the initial state lies on the contact constraint
//! with positive contact force. It switches to the unlatched mode at the first
//! zero of the contact force or when the projectile reaches the tangency point
//! `p = R`, whichever comes first, and never relatches. An unlatched run ends
//! when the projectile passes the spring's natural length moving outward.

mod event;
mod integrator;
mod projection;

pub use event::{locate_event, Event, EventKind, Interpolant, LinearBracket};
pub use integrator::{integrate_step, DenseOutput, IntegratorConfig, StepOutcome};
pub use projection::project_to_constraint;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mode, SystemParams, SystemState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: SystemState,
    pub mode: Mode,
    /// Contact force; zero at every unlatched sample.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    EndTime,
    /// The projectile passed `p0` outward while unlatched.
    LeftSpring,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory always holds the initial sample")
    }

    pub fn latched_samples(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.mode == Mode::Latched)
    }

    pub fn unlatched_samples(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.mode == Mode::Unlatched)
    }

    pub fn mode_transitions(&self) -> usize {
        self.samples.windows(2).filter(|w| w[0].mode != w[1].mode).count()
    }
}

fn contact_event_fn(params: &SystemParams, f_l: f64) -> impl Fn(&SystemState) -> Result<f64> + '_ {
    move |s| params.contact_force(s, f_l)
}

/// Integrates the hybrid system from `x0` until `t_end`.
pub fn simulate(
    params: &SystemParams,
    x0: SystemState,
    f_l: f64,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    params.validate()?;
    config.validate()?;
    if !x0.is_finite() {
        return Err(Error::InvalidState(format!("non-finite initial state {x0:?}")));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be finite and >= 0, got {t_end}")));
    }
    if !f_l.is_finite() {
        return Err(Error::InvalidArgument(format!("latch force must be finite, got {f_l}")));
    }

    let r = params.latch_radius;
    let p0 = params.natural_length;
    let h_tol = params.default_h_tol();

    let mut mode =
        if x0.p < r && params.mode_of(&x0, f_l, h_tol) == Mode::Latched { Mode::Latched } else { Mode::Unlatched };
    let tau_of = |s: &SystemState, mode: Mode| -> Result<f64> {
        match mode {
            Mode::Latched => params.contact_force(s, f_l),
            Mode::Unlatched => Ok(0.0),
        }
    };

    let mut samples = vec![Sample { t: 0.0, state: x0, mode, tau: tau_of(&x0, mode)? }];
    let mut events = Vec::new();
    let mut termination = Termination::EndTime;
    let mut t = 0.0;
    let mut state = x0;
    let mut dt = 0.1 * config.max_step;
    let mut steps = 0usize;

    while t < t_end {
        steps += 1;
        if steps > config.max_steps {
            return Err(Error::StepBudget(config.max_steps));
        }
        let remaining = t_end - t;
        let step = integrate_step(params, &state, f_l, mode, dt.min(remaining), config).map_err(|e| match e {
            Error::StepUnderflow { dt, error, .. } => Error::StepUnderflow { t, dt, error },
            other => other,
        })?;
        let dense = step.dense.with_origin(t);
        let mut t_new = t + step.dt_used;
        if remaining - step.dt_used <= 1e-15 * t_end.max(1.0) {
            t_new = t_end;
        }
        let raw = step.state;
        dt = step.next_dt;

        match mode {
            Mode::Latched => {
                let tau_raw = params.contact_force(&raw, f_l).unwrap_or(f64::NEG_INFINITY);
                let tau_crossed = tau_raw <= 0.0;
                let tangency_crossed = raw.p >= r;
                if tau_crossed || tangency_crossed {
                    let event = first_switch(params, f_l, &dense, tau_crossed, tangency_crossed, config)?;
                    // previous sample had tau > 0 and p < R, so the crossing lies strictly after it
                    let event = if event.t > t { event } else { Event { t: t_new, state: raw, ..event } };
                    let (t_e, s_e) = (event.t, event.state);
                    events.push(event);
                    samples.push(Sample { t: t_e, state: s_e, mode: Mode::Unlatched, tau: 0.0 });
                    mode = Mode::Unlatched;
                    state = s_e;
                    t = t_e;
                    continue;
                }
                let next = if config.constraint_projection { project_to_constraint(params, &raw)? } else { raw };
                let tau = params.contact_force(&next, f_l)?;
                if tau <= 0.0 || next.p >= r {
                    let kind = if next.p >= r { EventKind::TakeoffTangency } else { EventKind::UnlatchTauZero };
                    events.push(Event { t: t_new, kind, state: next });
                    samples.push(Sample { t: t_new, state: next, mode: Mode::Unlatched, tau: 0.0 });
                    mode = Mode::Unlatched;
                } else {
                    samples.push(Sample { t: t_new, state: next, mode, tau });
                }
                state = next;
                t = t_new;
            }
            Mode::Unlatched => {
                if state.p < p0 && raw.p >= p0 {
                    let exit = locate_event(&dense, EventKind::TakeoffTangency, |s| Ok(p0 - s.p), config)?;
                    samples.push(Sample { t: exit.t, state: exit.state, mode, tau: 0.0 });
                    termination = Termination::LeftSpring;
                    break;
                }
                samples.push(Sample { t: t_new, state: raw, mode, tau: 0.0 });
                state = raw;
                t = t_new;
            }
        }
    }

    Ok(Trajectory { samples, events, termination })
}

/// Locates whichever switching condition fires first inside one latched step.
/// A tie within the event tolerance resolves to tangency.
fn first_switch(
    params: &SystemParams,
    f_l: f64,
    dense: &DenseOutput,
    tau_crossed: bool,
    tangency_crossed: bool,
    config: &IntegratorConfig,
) -> Result<Event> {
    let r = params.latch_radius;
    let tangency = if tangency_crossed {
        Some(locate_event(dense, EventKind::TakeoffTangency, |s| Ok(r - s.p), config)?)
    } else {
        None
    };
    let unlatch = if tau_crossed {
        let tau_fn = contact_event_fn(params, f_l);
        let guarded = |s: &SystemState| Ok(tau_fn(s).unwrap_or(f64::NEG_INFINITY));
        Some(locate_event(dense, EventKind::UnlatchTauZero, guarded, config)?)
    } else {
        None
    };
    Ok(match (unlatch, tangency) {
        (Some(u), Some(g)) => {
            if u.t < g.t - config.event_time_tol {
                u
            } else {
                g
            }
        }
        (Some(u), None) => u,
        (None, Some(g)) => g,
        (None, None) => unreachable!("called only when a switching condition fired"),
    })
}
