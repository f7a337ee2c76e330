//! Tracing the moving saddle as the latch force varies, and the design check
//! for a saddle-node disappearance at `(p*, F_L) = (0, 0)`.

use serde::{Deserialize, Serialize};

use crate::equilibria::{balance_sides, quartic_coefficients, quartic_force_derivative};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::model::{SystemParams, SystemState};
use crate::stability::analyze_state;

/// Relative size below which a nominal-equation denominator counts as singular.
pub const SINGULAR_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NominalFormula {
    /// `-(dD/dF_L) / (dD/dp)` from the quartic the solver uses.
    ImplicitDiff,
    /// The closed-form `Lambda / (Sigma + Pi)`, evaluated as printed.
    Printed,
}

/// Printed numerator `Lambda = -M^2 (p - R)^2 F_L`.
fn printed_lambda(params: &SystemParams, p: f64, f_l: f64) -> f64 {
    let big_m = params.latch_mass;
    let d = p - params.latch_radius;
    -big_m * big_m * d * d * f_l
}

/// Printed `(Sigma + Pi, |Sigma| + |terms of Pi|)`.
fn printed_denominator(params: &SystemParams, p: f64, f_l: f64) -> (f64, f64) {
    let m = params.projectile_mass;
    let big_m = params.latch_mass;
    let r = params.latch_radius;
    let k = params.stiffness;
    let p0 = params.natural_length;
    let sigma = f_l * f_l * big_m * big_m * (p - r);
    let terms =
        [2.0 * k.powi(4) * p.powi(3), k * k * p * (p0 * p0 - 3.0 * p * (p0 + r)), (4.0 * r - p0) * p0 * r * k * k];
    let pi = m * m * terms.iter().sum::<f64>();
    let scale = sigma.abs() + m * m * terms.iter().map(|t| t.abs()).sum::<f64>();
    (sigma + pi, scale)
}

/// Slope `dp*/dF_L` of the equilibrium locus at `(p, f_l)`.
pub fn nominal_rhs(params: &SystemParams, p: f64, f_l: f64, formula: NominalFormula) -> Result<f64> {
    match formula {
        NominalFormula::ImplicitDiff => {
            let q = quartic_coefficients(params, f_l);
            let dp = q.derivative(p);
            if !(dp.abs() > SINGULAR_TOL * q.derivative_scale(p)) {
                return Err(Error::SingularDenominator { p, f_l, value: dp });
            }
            let df = quartic_force_derivative(params, f_l).eval(p);
            Ok(-df / dp)
        }
        NominalFormula::Printed => {
            let (den, scale) = printed_denominator(params, p, f_l);
            if !(den.abs() > SINGULAR_TOL * scale) {
                return Err(Error::SingularDenominator { p, f_l, value: den });
            }
            Ok(printed_lambda(params, p, f_l) / den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionU {
    /// Printed `Sigma + Pi`.
    pub sigma_plus_pi: f64,
    /// `Sigma + Pi < 0`.
    pub in_u: bool,
    /// `dD/dp`, the denominator the implicit-differentiation slope actually uses.
    pub implicit_denominator: f64,
}

pub fn in_region_u(params: &SystemParams, p: f64, f_l: f64) -> RegionU {
    let (sigma_plus_pi, _) = printed_denominator(params, p, f_l);
    RegionU {
        sigma_plus_pi,
        in_u: sigma_plus_pi < 0.0,
        implicit_denominator: quartic_coefficients(params, f_l).derivative(p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSettings {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Newton stopping threshold on the correction `|dp|`.
    pub corrector_tol: f64,
    pub max_corrector_iter: usize,
    /// Largest Newton polish of the starting point that is accepted.
    pub start_tol: f64,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        ContinuationSettings {
            initial_step: 0.05,
            min_step: 1e-9,
            max_step: 0.5,
            corrector_tol: 1e-10,
            max_corrector_iter: 12,
            start_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathTerminal {
    ReachedZeroForce,
    /// Reached a requested end force below zero.
    ReachedTarget,
    DenominatorSingular,
    LeftDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub f_l: f64,
    pub p_star: f64,
    pub in_s: bool,
    /// `dp*/dF_L` at the sample (NaN where the slope is singular).
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPath {
    pub samples: Vec<PathSample>,
    pub terminal: PathTerminal,
}

struct Corrected {
    p: f64,
    iterations: usize,
}

fn newton_on_locus(params: &SystemParams, f_l: f64, guess: f64, settings: &ContinuationSettings) -> Option<Corrected> {
    let q = quartic_coefficients(params, f_l);
    let mut p = guess;
    for iteration in 1..=settings.max_corrector_iter {
        let d = q.derivative(p);
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let delta = q.eval(p) / d;
        p -= delta;
        if !p.is_finite() {
            return None;
        }
        if delta.abs() <= settings.corrector_tol {
            return Some(Corrected { p, iterations: iteration });
        }
    }
    None
}

fn path_sample(params: &SystemParams, p: f64, f_l: f64) -> PathSample {
    let in_s = SystemState::at_rest_on_manifold(params, p)
        .and_then(|s| analyze_state(params, &s, f_l))
        .map(|r| r.in_s())
        .unwrap_or(false);
    let slope = nominal_rhs(params, p, f_l, NominalFormula::ImplicitDiff).unwrap_or(f64::NAN);
    PathSample { f_l, p_star: p, in_s, slope }
}

/// Predictor-corrector continuation of the equilibrium locus `D(p*; F_L) = 0`
/// from `(start_p, start_f_l)` up to `f_l_end <= 0`.
///
/// The start is polished onto the locus by Newton first; a polish larger than
/// `settings.start_tol` or a point that fails the unsquared balance is rejected.
pub fn trace_path(
    params: &SystemParams,
    start_p: f64,
    start_f_l: f64,
    f_l_end: f64,
    settings: &ContinuationSettings,
) -> Result<ContinuationPath> {
    let r = params.latch_radius;
    if !(f_l_end <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "continuation cannot extend past F_L = 0 (requested end {f_l_end})"
        )));
    }
    if !(start_f_l <= f_l_end) {
        return Err(Error::InvalidArgument(format!("start force {start_f_l} must not exceed the end force {f_l_end}")));
    }
    if !(0.0..r).contains(&start_p) {
        return Err(Error::InvalidStart(format!("p* = {start_p} outside [0, R)")));
    }

    let start = newton_on_locus(params, start_f_l, start_p, settings)
        .ok_or_else(|| Error::InvalidStart(format!("Newton polish failed from p* = {start_p}")))?;
    if (start.p - start_p).abs() > settings.start_tol {
        return Err(Error::InvalidStart(format!(
            "({start_p}, {start_f_l}) is {} away from the equilibrium locus",
            (start.p - start_p).abs()
        )));
    }
    let mut p = if start.p.abs() <= settings.corrector_tol { 0.0 } else { start.p };
    if start_f_l < 0.0 {
        let l = params.latch_from_projectile(p.clamp(0.0, r))?;
        let (lhs, rhs) = balance_sides(params, p, l, start_f_l);
        if lhs.signum() != rhs.signum() || p <= 0.0 {
            return Err(Error::InvalidStart(format!("p* = {p} solves the squared balance only (sides {lhs}, {rhs})")));
        }
    }

    let mut f_l = start_f_l;
    let mut samples = vec![path_sample(params, p, f_l)];
    let mut step = settings.initial_step.min(settings.max_step);
    let snap = 1e-12 * f_l_end.abs().max(1.0);

    let terminal = loop {
        if f_l_end - f_l <= snap {
            break if f_l_end == 0.0 { PathTerminal::ReachedZeroForce } else { PathTerminal::ReachedTarget };
        }
        let slope = match nominal_rhs(params, p, f_l, NominalFormula::ImplicitDiff) {
            Ok(v) => v,
            Err(Error::SingularDenominator { .. }) => break PathTerminal::DenominatorSingular,
            Err(e) => return Err(e),
        };
        let mut s = step.min(f_l_end - f_l);
        let (next_f, corrected) = loop {
            let target = if f_l_end - (f_l + s) <= snap { f_l_end } else { f_l + s };
            let guess = p + (target - f_l) * slope;
            match newton_on_locus(params, target, guess, settings) {
                Some(c) if (c.p - guess).abs() <= 0.05 * r => break (target, c),
                _ => {
                    s *= 0.5;
                    if s < settings.min_step {
                        return Err(Error::CorrectorDivergence { f_l, step: s });
                    }
                }
            }
        };
        let mut p_next = corrected.p;
        if p_next < 0.0 && p_next.abs() <= 1e3 * settings.corrector_tol {
            p_next = 0.0;
        }
        if !(0.0..r).contains(&p_next) {
            break PathTerminal::LeftDomain;
        }
        p = p_next;
        f_l = next_f;
        samples.push(path_sample(params, p, f_l));
        step = if corrected.iterations <= 3 {
            (s * 1.5).min(settings.max_step)
        } else if corrected.iterations >= 6 {
            (s * 0.5).max(settings.min_step)
        } else {
            s
        };
    };

    Ok(ContinuationPath { samples, terminal })
}

/// `n` evenly spaced nodes from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub p: f64,
    pub f_l: f64,
    pub h1: f64,
    pub h2: f64,
    pub in_s: bool,
    pub in_u: bool,
}

/// Raster over `p_grid x f_l_grid`, row-major with `p` as the outer index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub n_p: usize,
    pub n_f_l: usize,
    pub cells: Vec<RegionCell>,
}

impl RegionMap {
    pub fn cell(&self, i_p: usize, j_f_l: usize) -> &RegionCell {
        &self.cells[i_p * self.n_f_l + j_f_l]
    }
}

/// Saddle-condition map over zero-velocity states on the constraint. Nodes
/// need not be equilibria.
pub fn saddle_region_map(params: &SystemParams, p_grid: &[f64], f_l_grid: &[f64], executor: Executor) -> RegionMap {
    let n_f_l = f_l_grid.len();
    let cells = executor.map_indexed(p_grid.len() * n_f_l, |idx| {
        let p = p_grid[idx / n_f_l];
        let f_l = f_l_grid[idx % n_f_l];
        let report = SystemState::at_rest_on_manifold(params, p).and_then(|s| analyze_state(params, &s, f_l));
        let (h1, h2, in_s) = match report {
            Ok(r) => (r.h1, r.h2, r.in_s()),
            Err(_) => (f64::NAN, f64::NAN, false),
        };
        RegionCell { p, f_l, h1, h2, in_s, in_u: in_region_u(params, p, f_l).in_u }
    });
    RegionMap { n_p: p_grid.len(), n_f_l, cells }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuiverCell {
    pub p: f64,
    pub f_l: f64,
    /// NaN where the slope is singular.
    pub dp_dfl: f64,
}

/// Nominal-equation slope field, row-major with `p` as the outer index.
pub fn quiver_field(
    params: &SystemParams,
    p_grid: &[f64],
    f_l_grid: &[f64],
    formula: NominalFormula,
    executor: Executor,
) -> Vec<QuiverCell> {
    let n_f_l = f_l_grid.len();
    executor.map_indexed(p_grid.len() * n_f_l, |idx| {
        let p = p_grid[idx / n_f_l];
        let f_l = f_l_grid[idx % n_f_l];
        QuiverCell { p, f_l, dp_dfl: nominal_rhs(params, p, f_l, formula).unwrap_or(f64::NAN) }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    /// `R < p0 < 4R`.
    pub p0_window_ok: bool,
    pub p0_bound: f64,
    /// `p0` exceeds `p0_bound`.
    pub p0_bound_ok: bool,
    /// Closed-form `h1` at `(0, 0)`.
    pub h1_at_origin: f64,
    /// `h1` of the finite-difference Jacobian at the origin with `F_L = 0`.
    pub h1_fd_at_origin: f64,
    /// Printed `Sigma + Pi` at `(0, 0)`.
    pub sigma_plus_pi_at_origin: f64,
    pub feasible: bool,
}

/// Closed-form `h1` at `(p*, F_L) = (0, 0)`, evaluated as printed.
pub fn printed_h1_at_origin(params: &SystemParams) -> f64 {
    let m = params.projectile_mass;
    let big_m = params.latch_mass;
    let r = params.latch_radius;
    let k = params.stiffness;
    let p0 = params.natural_length;
    let mass_sum2 = (m + big_m) * (m + big_m);
    let lead = k * k * p0 * (m + big_m * r) / (m * mass_sum2 * r * r);
    let correction = 1.0 + big_m * (2.0 * (1.0 - big_m * r * r) * p0 - r) / (m * mass_sum2 * r.powi(3));
    lead * correction
}

/// Checks whether a saddle sits at `(0, 0)` so the saddle-node disappearance
/// occurs there.
pub fn design_feasibility(params: &SystemParams) -> Result<DesignReport> {
    let m = params.projectile_mass;
    let big_m = params.latch_mass;
    let r = params.latch_radius;
    let p0 = params.natural_length;
    let singular = big_m * r * r - 1.0;
    if singular.abs() <= 1e-12 * (big_m * r * r).max(1.0) {
        return Err(Error::SingularBound);
    }
    let p0_bound = (m * (m + big_m).powi(2) * r * r - r) / (2.0 * big_m * singular);
    let p0_window_ok = r < p0 && p0 < 4.0 * r;
    let p0_bound_ok = p0 > p0_bound;
    let h1_at_origin = printed_h1_at_origin(params);
    let h1_fd_at_origin = analyze_state(params, &SystemState::default(), 0.0)?.h1;
    Ok(DesignReport {
        p0_window_ok,
        p0_bound,
        p0_bound_ok,
        h1_at_origin,
        h1_fd_at_origin,
        sigma_plus_pi_at_origin: in_region_u(params, 0.0, 0.0).sigma_plus_pi,
        feasible: p0_window_ok && p0_bound_ok && h1_at_origin < 0.0,
    })
}
