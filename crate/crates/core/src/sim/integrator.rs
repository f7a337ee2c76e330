//! Dormand-Prince 5(4) stepping with the standard fourth-order continuous extension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Mode, SystemParams, SystemState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub event_time_tol: f64,
    /// Pull latched states back onto `h = 0, h' = 0` after every accepted step.
    pub constraint_projection: bool,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 1e-2,
            event_time_tol: 1e-10,
            constraint_projection: true,
            max_steps: 5_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("event_time_tol", self.event_time_tol),
        ];
        for (name, value) in named {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidArgument(format!("{name} must be finite and > 0, got {value}")));
            }
        }
        if self.event_time_tol >= self.max_step {
            return Err(Error::InvalidArgument(format!(
                "event_time_tol ({}) must be smaller than max_step ({})",
                self.event_time_tol, self.max_step
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn min_step(&self) -> f64 {
        self.max_step * 1e-12
    }

    /// Same configuration with both tolerances scaled by `factor`.
    pub fn scaled_tolerances(mut self, factor: f64) -> Self {
        self.rel_tol *= factor;
        self.abs_tol *= factor;
        self
    }
}

// Stage nodes are not needed: both mode fields are autonomous.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order solution minus embedded fourth-order solution
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type Vec4 = [f64; 4];

fn axpy(y: &Vec4, terms: &[(f64, &Vec4)]) -> Vec4 {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..4 {
            out[i] += coef * k[i];
        }
    }
    out
}

fn max_norm(v: &Vec4) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Continuous extension of one accepted step, valid on `[t_start, t_start + h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseOutput {
    t_start: f64,
    h: f64,
    coeffs: [Vec4; 5],
}

impl DenseOutput {
    /// The same interpolant re-anchored so the step begins at `t_start`.
    pub fn with_origin(mut self, t_start: f64) -> Self {
        self.t_start = t_start;
        self
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.h
    }

    pub fn state_at(&self, t: f64) -> SystemState {
        let theta = if self.h > 0.0 { (t - self.t_start) / self.h } else { 0.0 };
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
        SystemState::from_array(out)
    }
}

/// Result of one accepted adaptive step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: SystemState,
    pub dt_used: f64,
    pub error_estimate: f64,
    /// Step size proposed for the next step.
    pub next_dt: f64,
    /// Interpolant over `[0, dt_used]`; re-anchor with [`DenseOutput::with_origin`].
    pub dense: DenseOutput,
}

struct Trial {
    y_new: Vec4,
    error: f64,
    dense: DenseOutput,
}

fn dopri_trial<F>(rhs: &F, y: &Vec4, h: f64) -> Result<Trial>
where
    F: Fn(&Vec4) -> Result<Vec4>,
{
    let k1 = rhs(y)?;
    let k2 = rhs(&axpy(y, &[(h * A21, &k1)]))?;
    let k3 = rhs(&axpy(y, &[(h * A31, &k1), (h * A32, &k2)]))?;
    let k4 = rhs(&axpy(y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]))?;
    let k5 = rhs(&axpy(y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]))?;
    let k6 = rhs(&axpy(y, &[(h * A61, &k1), (h * A62, &k2), (h * A63, &k3), (h * A64, &k4), (h * A65, &k5)]))?;
    let y_new = axpy(y, &[(h * A71, &k1), (h * A73, &k3), (h * A74, &k4), (h * A75, &k5), (h * A76, &k6)]);
    let k7 = rhs(&y_new)?;

    let mut err = [0.0; 4];
    let mut r5 = [0.0; 4];
    for i in 0..4 {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    let mut r2 = [0.0; 4];
    let mut r3 = [0.0; 4];
    let mut r4 = [0.0; 4];
    for i in 0..4 {
        let diff = y_new[i] - y[i];
        let bspl = h * k1[i] - diff;
        r2[i] = diff;
        r3[i] = bspl;
        r4[i] = diff - h * k7[i] - bspl;
    }
    Ok(Trial { y_new, error: max_norm(&err), dense: DenseOutput { t_start: 0.0, h, coeffs: [*y, r2, r3, r4, r5] } })
}

/// Adaptive step of an autonomous right-hand side.
pub(crate) fn adaptive_step<F>(rhs: &F, y: &Vec4, dt_suggestion: f64, config: &IntegratorConfig) -> Result<StepOutcome>
where
    F: Fn(&Vec4) -> Result<Vec4>,
{
    let min_step = config.min_step();
    let mut h = dt_suggestion.min(config.max_step);
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt_suggestion}")));
    }
    loop {
        let trial = dopri_trial(rhs, y, h)?;
        let scale = max_norm(y).max(max_norm(&trial.y_new));
        let tol = (config.rel_tol * scale).max(config.abs_tol);
        let finite = trial.y_new.iter().all(|v| v.is_finite()) && trial.error.is_finite();
        if finite && trial.error <= tol {
            let factor = if trial.error == 0.0 { 5.0 } else { (0.9 * (tol / trial.error).powf(0.2)).clamp(0.2, 5.0) };
            return Ok(StepOutcome {
                state: SystemState::from_array(trial.y_new),
                dt_used: h,
                error_estimate: trial.error,
                next_dt: (h * factor).min(config.max_step),
                dense: trial.dense,
            });
        }
        let factor = if finite { (0.9 * (tol / trial.error).powf(0.2)).clamp(0.1, 0.5) } else { 0.1 };
        let next = h * factor;
        if next < min_step {
            return Err(Error::StepUnderflow { t: f64::NAN, dt: next, error: trial.error });
        }
        h = next;
    }
}

/// One adaptive step of the mode's vector field, starting from `state`.
///
/// The step actually taken may be shorter than `dt_suggestion`; its local
/// error estimate satisfies `err <= max(rel_tol * |y|_inf, abs_tol)`.
pub fn integrate_step(
    params: &SystemParams,
    state: &SystemState,
    f_l: f64,
    mode: Mode,
    dt_suggestion: f64,
    config: &IntegratorConfig,
) -> Result<StepOutcome> {
    let rhs =
        |x: &Vec4| -> Result<Vec4> { Ok(params.vector_field(&SystemState::from_array(*x), f_l, mode)?.to_array()) };
    adaptive_step(&rhs, &state.to_array(), dt_suggestion, config)
}
