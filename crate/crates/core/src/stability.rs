//! Linearization of the closed-loop latched field and saddle classification.
//!
//! With the contact force substituted as a function of the state, the latched
//! Jacobian at a zero-velocity state has the sparsity
//!
//! ```text
//! | 0 1 0 0 |
//! | A 0 B 0 |
//! | 0 0 0 1 |
//! | G 0 D 0 |
//! ```
//!
//! because the contact force is quadratic in the velocities. Its characteristic
//! polynomial is then the biquadratic `lambda^4 - h2 lambda^2 + h1` with
//! `h1 = A D - B G` and `h2 = A + D`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::FixedPoint;
use crate::error::{Error, Result};
use crate::model::{Mode, SystemParams, SystemState};

/// Dense 4x4 Jacobian, row-major over `(p, p', l, l')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jacobian(pub [[f64; 4]; 4]);

impl Jacobian {
    /// The sparse template with the given entries.
    pub fn from_entries(a: f64, b: f64, gamma: f64, delta: f64) -> Self {
        Jacobian([[0.0, 1.0, 0.0, 0.0], [a, 0.0, b, 0.0], [0.0, 0.0, 0.0, 1.0], [gamma, 0.0, delta, 0.0]])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Coefficients `[1, c3, c2, c1, c0]` of `det(lambda I - J)`, by Faddeev-LeVerrier.
    pub fn characteristic_polynomial(&self) -> [f64; 5] {
        let a = self.0;
        let mul = |x: &[[f64; 4]; 4], y: &[[f64; 4]; 4]| {
            let mut out = [[0.0; 4]; 4];
            for i in 0..4 {
                for j in 0..4 {
                    out[i][j] = (0..4).map(|k| x[i][k] * y[k][j]).sum();
                }
            }
            out
        };
        let mut coeffs = [1.0, 0.0, 0.0, 0.0, 0.0];
        let mut m = [[0.0; 4]; 4];
        for k in 1..=4 {
            // M_k = A M_{k-1} + c_{k-1} I
            let mut next = mul(&a, &m);
            for (i, row) in next.iter_mut().enumerate() {
                row[i] += coeffs[k - 1];
            }
            m = next;
            let am = mul(&a, &m);
            let trace: f64 = (0..4).map(|i| am[i][i]).sum();
            coeffs[k] = -trace / k as f64;
        }
        coeffs
    }
}

/// Default finite-difference step for coordinate value `x`: `eps^(1/3) max(1, |x|)`.
pub fn default_fd_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Central-difference Jacobian of the closed-loop latched field at `state`.
///
/// `fd_step = None` uses [`default_fd_step`] per coordinate; `Some(h)` uses `h`
/// for every coordinate. Rows 1 and 3 are the exact kinematic rows.
pub fn jacobian_at(params: &SystemParams, state: &SystemState, f_l: f64, fd_step: Option<f64>) -> Result<Jacobian> {
    if let Some(h) = fd_step {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!("fd_step must be finite and > 0, got {h}")));
        }
    }
    let x = state.to_array();
    let mut jac = [[0.0; 4]; 4];
    for j in 0..4 {
        let h = fd_step.unwrap_or_else(|| default_fd_step(x[j]));
        let mut plus = x;
        let mut minus = x;
        plus[j] += h;
        minus[j] -= h;
        let width = plus[j] - minus[j];
        let f_plus = params.vector_field(&SystemState::from_array(plus), f_l, Mode::Latched)?.to_array();
        let f_minus = params.vector_field(&SystemState::from_array(minus), f_l, Mode::Latched)?.to_array();
        for i in 0..4 {
            jac[i][j] = (f_plus[i] - f_minus[i]) / width;
        }
    }
    jac[0] = [0.0, 1.0, 0.0, 0.0];
    jac[2] = [0.0, 0.0, 0.0, 1.0];
    Ok(Jacobian(jac))
}

/// Jacobian at a latched fixed point's rest state.
pub fn jacobian_fd(params: &SystemParams, fp: &FixedPoint, fd_step: Option<f64>) -> Result<Jacobian> {
    jacobian_at(params, &fp.rest_state(), fp.f_l_star, fd_step)
}

/// Relative tolerance on the velocity columns of rows 2 and 4.
pub const STRUCTURE_TOL: f64 = 1e-6;

/// Reads `(A, B, Gamma, Delta)` after checking the sparsity template.
pub fn extract_abgd(jac: &Jacobian) -> Result<(f64, f64, f64, f64)> {
    let j = &jac.0;
    let template_rows = [(0usize, [0.0, 1.0, 0.0, 0.0]), (2usize, [0.0, 0.0, 0.0, 1.0])];
    for (row, expected) in template_rows {
        for col in 0..4 {
            if j[row][col] != expected[col] {
                return Err(Error::StructureViolation { row: row + 1, col: col + 1, value: j[row][col] });
            }
        }
    }
    let tol = STRUCTURE_TOL * jac.max_abs().max(1.0);
    for row in [1, 3] {
        for col in [1, 3] {
            if !(j[row][col].abs() <= tol) {
                return Err(Error::StructureViolation { row: row + 1, col: col + 1, value: j[row][col] });
            }
        }
    }
    Ok((j[1][0], j[1][2], j[3][0], j[3][2]))
}

/// `(h1, h2) = (A Delta - B Gamma, A + Delta)`.
pub fn characteristic_invariants(a: f64, b: f64, gamma: f64, delta: f64) -> (f64, f64) {
    (a * delta - b * gamma, a + delta)
}

/// Roots of `lambda^4 - h2 lambda^2 + h1`, as `[+sqrt(mu1), -sqrt(mu1), +sqrt(mu2), -sqrt(mu2)]`.
pub fn eigenvalues_biquadratic(h1: f64, h2: f64) -> [Complex64; 4] {
    let disc = Complex64::new(h2 * h2 - 4.0 * h1, 0.0).sqrt();
    let h2c = Complex64::new(h2, 0.0);
    // larger-magnitude root first, the other from the product mu1 mu2 = h1
    let mu1 = if h2 >= 0.0 { (h2c + disc) * 0.5 } else { (h2c - disc) * 0.5 };
    let mu2 = if mu1.norm() > 0.0 { Complex64::new(h1, 0.0) / mu1 } else { h2c - mu1 };
    let l1 = mu1.sqrt();
    let l2 = mu2.sqrt();
    [l1, -l1, l2, -l2]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Saddle,
    NonSaddle,
    /// Both invariants within tolerance of zero; undecidable numerically.
    Marginal,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Saddle => "saddle",
            Classification::NonSaddle => "non_saddle",
            Classification::Marginal => "marginal",
        }
    }
}

/// Default classification tolerance `1e-9 max(1, |h1|, |h2|)`.
pub fn default_eps(h1: f64, h2: f64) -> f64 {
    1e-9 * 1.0_f64.max(h1.abs()).max(h2.abs())
}

/// Saddle iff `h1 < 0`, or `h1 >= 0` and `h2 > 0`, each up to `eps`.
pub fn classify(h1: f64, h2: f64, eps: f64) -> Classification {
    if h1 < -eps || (h1 >= -eps && h2 > eps) {
        Classification::Saddle
    } else if h1.abs() <= eps && h2.abs() <= eps {
        Classification::Marginal
    } else {
        Classification::NonSaddle
    }
}

/// True when the spectrum holds a real pair `+a, -a` with `a > tol`.
pub fn has_real_opposite_pair(eigenvalues: &[Complex64; 4], tol: f64) -> bool {
    eigenvalues.iter().any(|l| l.re > tol && l.im.abs() <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub delta: f64,
    pub h1: f64,
    pub h2: f64,
    pub eigenvalues: [Complex64; 4],
    pub classification: Classification,
}

impl StabilityReport {
    pub fn in_s(&self) -> bool {
        self.classification == Classification::Saddle
    }
}

/// Linearizes at `state` (which need not be an equilibrium) and classifies.
pub fn analyze_state(params: &SystemParams, state: &SystemState, f_l: f64) -> Result<StabilityReport> {
    let jac = jacobian_at(params, state, f_l, None)?;
    let (a, b, gamma, delta) = extract_abgd(&jac)?;
    let (h1, h2) = characteristic_invariants(a, b, gamma, delta);
    Ok(StabilityReport {
        a,
        b,
        gamma,
        delta,
        h1,
        h2,
        eigenvalues: eigenvalues_biquadratic(h1, h2),
        classification: classify(h1, h2, default_eps(h1, h2)),
    })
}

pub fn analyze(params: &SystemParams, fp: &FixedPoint) -> Result<StabilityReport> {
    analyze_state(params, &fp.rest_state(), fp.f_l_star)
}

/// The closed-form Jacobian entries, evaluated as printed.
///
/// The printed `A` and `Delta` have unbalanced parentheses. This reads `A`'s
/// trailing `p^2`, `p^3` terms as part of the second fraction's numerator and
/// `Delta` as a single fraction over `S^2`, with `S = l^2 m + M (p - R)^2`.
/// Only meant for comparison against [`jacobian_fd`].
pub fn closed_form_abgd(params: &SystemParams, p: f64, l: f64, f_l: f64) -> (f64, f64, f64, f64) {
    let m = params.projectile_mass;
    let big_m = params.latch_mass;
    let r = params.latch_radius;
    let k = params.stiffness;
    let p0 = params.natural_length;
    let d = p - r;
    let s = l * l * m + big_m * d * d;
    let s2 = s * s;

    let a = -(1.0 / (m * m))
        * (k * m
            + big_m * (f_l * l + 2.0 * k * p0 * p - k * (3.0 * p * p + 4.0 * p * r - 2.0 * p0 * r + r * r)) / s
            + 2.0
                * big_m
                * big_m
                * d
                * (r * (-f_l * l + k * p0 * r)
                    + p * (f_l * l + k * (2.0 * p0 - r) * r)
                    + p * p * (k * (p0 - 2.0 * r))
                    - p * p * p * k)
                / s2);
    let b = f_l * big_m * (l * l * m - big_m * d * d) * d / (m * s2);
    let delta =
        (f_l * l * (m - 2.0 * l * l * m - 2.0 * big_m * d * d) + k * (p0 - p) * (-l * l * m + big_m * d * d) * d) / s2;
    let gamma = l
        * (2.0 * f_l * l * m * big_m * d
            + k * (2.0 * m * big_m * (p0 - p) + m * big_m * (2.0 * p - p0 - r)) * d * d
            + k * l * l * m * m * (2.0 * p - p0 - r))
        / s2;
    (a, b, gamma, delta)
}

/// Closed-form entries next to the finite-difference ones, with relative deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormComparison {
    pub closed_form: [f64; 4],
    pub finite_difference: [f64; 4],
    pub relative_deviation: [f64; 4],
}

pub fn compare_closed_form(params: &SystemParams, fp: &FixedPoint) -> Result<ClosedFormComparison> {
    let (a, b, g, d) = extract_abgd(&jacobian_fd(params, fp, None)?)?;
    let l = fp.l_star.unwrap_or(0.0);
    let (ca, cb, cg, cd) = closed_form_abgd(params, fp.p_star, l, fp.f_l_star);
    let closed_form = [ca, cb, cg, cd];
    let finite_difference = [a, b, g, d];
    let relative_deviation =
        std::array::from_fn(|i| (closed_form[i] - finite_difference[i]).abs() / finite_difference[i].abs().max(1e-300));
    Ok(ClosedFormComparison { closed_form, finite_difference, relative_deviation })
}
