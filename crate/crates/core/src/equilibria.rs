//! Latched-mode fixed points.
//!
//! At rest on the constraint the projectile and latch rows balance when
//! `F_s l c_s = (p - R) F_L c_l`, with `(c_s, c_l) = (1/M, 1/m)` for the printed
//! contact force and `(1, 1)` for the constraint-consistent one. Squaring the
//! balance and substituting `l^2 = 2Rp - p^2` gives a quartic `D(p)` whose roots
//! are candidates only; every candidate is re-checked against the unsquared
//! balance, which rejects the spurious root in `(R, 2R)`.

use serde::{Deserialize, Serialize};

use crate::model::{Mode, ModelVariant, SystemParams, SystemState};

/// Number of sign-scan cells used to bracket quartic roots.
pub const BRACKET_GRID: usize = 1024;
/// Default absolute bisection width for [`roots_in_interval`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

/// Coefficients of `D(p) = quartic p^4 + cubic p^3 + quadratic p^2 + linear p + constant`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticD {
    pub quartic: f64,
    pub cubic: f64,
    pub quadratic: f64,
    pub linear: f64,
    pub constant: f64,
}

impl QuarticD {
    pub fn coefficients(&self) -> [f64; 5] {
        [self.quartic, self.cubic, self.quadratic, self.linear, self.constant]
    }

    pub fn eval(&self, p: f64) -> f64 {
        (((self.quartic * p + self.cubic) * p + self.quadratic) * p + self.linear) * p + self.constant
    }

    pub fn derivative(&self, p: f64) -> f64 {
        ((4.0 * self.quartic * p + 3.0 * self.cubic) * p + 2.0 * self.quadratic) * p + self.linear
    }

    /// Sum of the magnitudes of the derivative's terms; a scale for singularity tests.
    pub fn derivative_scale(&self, p: f64) -> f64 {
        (4.0 * self.quartic * p.powi(3)).abs()
            + (3.0 * self.cubic * p * p).abs()
            + (2.0 * self.quadratic * p).abs()
            + self.linear.abs()
    }
}

/// Weights `(spring^2 weight, latch-force^2 weight)` the variant puts on the squared balance.
fn squared_weights(params: &SystemParams) -> (f64, f64) {
    match params.variant {
        ModelVariant::AsPrinted => {
            (1.0 / (params.latch_mass * params.latch_mass), 1.0 / (params.projectile_mass * params.projectile_mass))
        }
        ModelVariant::ConstraintConsistent => (1.0, 1.0),
    }
}

/// Equilibrium quartic for latch force `f_l` under the params' model variant.
pub fn quartic_coefficients(params: &SystemParams, f_l: f64) -> QuarticD {
    let (ws, wl) = squared_weights(params);
    let k = params.stiffness;
    let r = params.latch_radius;
    let p0 = params.natural_length;
    let a = k * k * ws;
    let b = f_l * f_l * wl;
    QuarticD {
        quartic: -a,
        cubic: 2.0 * r * a + 2.0 * a * p0,
        quadratic: -(b + a * p0 * p0 + 4.0 * r * a * p0),
        linear: 2.0 * b * r + 2.0 * r * a * p0 * p0,
        constant: -b * r * r,
    }
}

/// Partial derivative of `D` with respect to the latch force, as a polynomial in `p`.
pub fn quartic_force_derivative(params: &SystemParams, f_l: f64) -> QuarticD {
    let (_, wl) = squared_weights(params);
    let r = params.latch_radius;
    let db = 2.0 * f_l * wl;
    QuarticD { quartic: 0.0, cubic: 0.0, quadratic: -db, linear: 2.0 * db * r, constant: -db * r * r }
}

pub fn eval_quartic(q: &QuarticD, p: f64) -> f64 {
    q.eval(p)
}

pub fn eval_quartic_derivative(q: &QuarticD, p: f64) -> f64 {
    q.derivative(p)
}

/// Real roots of `q` in the open interval `(lo, hi)`, ascending.
///
/// Roots are bracketed by a sign scan over [`BRACKET_GRID`] cells and bisected
/// until the bracket is no wider than `tol`; `tol = 0` bisects until the
/// bracket cannot be split in floating point. Even-multiplicity roots that do
/// not change sign are not reported.
pub fn roots_in_interval(q: &QuarticD, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    if !(lo < hi) || tol < 0.0 {
        return roots;
    }
    let n = BRACKET_GRID;
    let node = |j: usize| if j == n { hi } else { lo + (hi - lo) * (j as f64) / (n as f64) };
    let mut x_prev = lo;
    let mut f_prev = q.eval(lo);
    for j in 1..=n {
        let x = node(j);
        let f = q.eval(x);
        if f == 0.0 {
            if j < n {
                roots.push(x);
            }
        } else if f_prev != 0.0 && f_prev.signum() != f.signum() {
            roots.push(bisect(q, x_prev, f_prev, x, tol));
        }
        x_prev = x;
        f_prev = f;
    }
    roots
}

fn bisect(q: &QuarticD, mut a: f64, f_a: f64, mut b: f64, tol: f64) -> f64 {
    let side = f_a.signum();
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let f_mid = q.eval(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == side {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// The two sides `(F_s l c_s, (p - R) F_L c_l)` of the unsquared balance.
pub fn balance_sides(params: &SystemParams, p: f64, l: f64, f_l: f64) -> (f64, f64) {
    let (spring_weight, latch_weight) = match params.variant {
        ModelVariant::AsPrinted => (1.0 / params.latch_mass, 1.0 / params.projectile_mass),
        ModelVariant::ConstraintConsistent => (1.0, 1.0),
    };
    (params.spring_force(p) * l * spring_weight, (p - params.latch_radius) * f_l * latch_weight)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accepted,
    /// Root of the squared balance only: the unsquared sides have opposite signs.
    SignMismatch,
    /// Satisfies the balance but lies outside `[0, R)`, where contact cannot hold.
    OutsideLatchedRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub p: f64,
    pub verdict: Verdict,
}

/// Every quartic root in `(0, R)` and `(R, 2R)`, with its validation verdict.
pub fn equilibrium_candidates(params: &SystemParams, f_l: f64) -> Vec<Candidate> {
    let q = quartic_coefficients(params, f_l);
    let r = params.latch_radius;
    let mut roots = roots_in_interval(&q, 0.0, r, 0.0);
    roots.extend(roots_in_interval(&q, r, 2.0 * r, 0.0));
    roots
        .into_iter()
        .map(|p| {
            let l = params.latch_from_projectile(p.clamp(0.0, 2.0 * r)).unwrap_or(0.0);
            let (lhs, rhs) = balance_sides(params, p, l, f_l);
            let same_sign = lhs.signum() == rhs.signum() && (lhs - rhs).abs() <= 1e-6 * lhs.abs().max(rhs.abs());
            let verdict = if !same_sign {
                Verdict::SignMismatch
            } else if !(0.0..r).contains(&p) {
                Verdict::OutsideLatchedRange
            } else {
                Verdict::Accepted
            };
            Candidate { p, verdict }
        })
        .collect()
}

/// A latched (or, for [`unlatched_fixed_point`], unlatched) rest point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub p_star: f64,
    /// `None` when the latch position is free (unlatched rest point).
    pub l_star: Option<f64>,
    pub f_l_star: f64,
    pub mode: Mode,
    /// The stationary point at the origin.
    pub origin: bool,
    /// Vector field of `mode` evaluated at the rest state. Under the printed
    /// contact force the latch row does not vanish at interior points.
    pub residual: SystemState,
}

impl FixedPoint {
    pub fn rest_state(&self) -> SystemState {
        SystemState::new(self.p_star, 0.0, self.l_star.unwrap_or(0.0), 0.0)
    }

    /// Which of the four vector-field rows vanish within `tol`.
    pub fn vanishing_rows(&self, tol: f64) -> [bool; 4] {
        self.residual.to_array().map(|v| v.abs() <= tol)
    }

    pub fn is_full_equilibrium(&self, tol: f64) -> bool {
        self.vanishing_rows(tol).iter().all(|&ok| ok)
    }

    /// Human-readable validity annotation listing the vanishing rows.
    pub fn validity_note(&self, tol: f64) -> String {
        let rows = self.vanishing_rows(tol);
        if rows.iter().all(|&ok| ok) {
            return "all rows vanish".to_string();
        }
        let names = ["p'", "p''", "l'", "l''"];
        let failing: Vec<String> = rows
            .iter()
            .zip(names)
            .zip(self.residual.to_array())
            .filter(|((ok, _), _)| !**ok)
            .map(|((_, name), value)| format!("{name} = {value:e}"))
            .collect();
        format!("nonzero rows: {}", failing.join(", "))
    }
}

fn latched_point(params: &SystemParams, p: f64, l: f64, f_l: f64, origin: bool) -> FixedPoint {
    let state = SystemState::new(p, 0.0, l, 0.0);
    let residual = params.vector_field(&state, f_l, Mode::Latched).unwrap_or(SystemState::new(
        f64::NAN,
        f64::NAN,
        f64::NAN,
        f64::NAN,
    ));
    FixedPoint {
        p_star: p,
        l_star: Some(l),
        f_l_star: f_l,
        mode: params.mode_of(&state, f_l, params.default_h_tol()),
        origin,
        residual,
    }
}

/// Latched fixed points for latch force `f_l`.
///
/// Empty for `f_l > 0`; only the origin for `f_l = 0`; for `f_l < 0` the origin
/// (flagged, with its nonzero latch row recorded in `residual`) followed by the
/// single interior point.
pub fn fixed_points(params: &SystemParams, f_l: f64) -> Vec<FixedPoint> {
    if f_l > 0.0 || f_l.is_nan() {
        return Vec::new();
    }
    let mut points = vec![latched_point(params, 0.0, 0.0, f_l, true)];
    if f_l < 0.0 {
        points.extend(equilibrium_candidates(params, f_l).into_iter().filter(|c| c.verdict == Verdict::Accepted).map(
            |c| {
                let l = params.latch_from_projectile(c.p).expect("accepted candidates lie in [0, R)");
                latched_point(params, c.p, l, f_l, false)
            },
        ));
    }
    points
}

/// The fixed point that moves with the latch force: the interior point for
/// `f_l < 0`, the origin at `f_l = 0`, none for `f_l > 0`.
pub fn moving_fixed_point(params: &SystemParams, f_l: f64) -> Option<FixedPoint> {
    let points = fixed_points(params, f_l);
    if f_l == 0.0 {
        points.into_iter().next()
    } else {
        points.into_iter().find(|fp| !fp.origin)
    }
}

/// Rest point of the unlatched mode: spring at natural length, no latch force,
/// latch position free.
pub fn unlatched_fixed_point(params: &SystemParams) -> FixedPoint {
    let state = SystemState::new(params.natural_length, 0.0, 0.0, 0.0);
    let residual =
        params.vector_field(&state, 0.0, Mode::Unlatched).expect("unlatched field has no singular configurations");
    FixedPoint {
        p_star: params.natural_length,
        l_star: None,
        f_l_star: 0.0,
        mode: Mode::Unlatched,
        origin: false,
        residual,
    }
}
