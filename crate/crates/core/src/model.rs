//! Physical parameterization and the two-mode vector field of the contact latch.
//!
//! Coordinates: `p` is the projectile position along the spring axis, `l` the
//! latch position. While in contact the pair is bound by the rounded-latch
//! constraint `h(p, l) = l^2 + (R - p)^2 - R^2 = 0` and the contact force is the
//! Lagrange multiplier that keeps `h` stationary. All quantities are raw model
//! units; no unit conversion is performed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which denominator the latch-force term of the contact force uses.
///
/// `AsPrinted` divides the latch-force term by the projectile mass `m`, which
/// reproduces the reference fixed-point values. `ConstraintConsistent` divides
/// by the latch mass `M`, which is what differentiating the constraint twice
/// gives; only this variant keeps `h'' = 0` along the latched flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    #[default]
    AsPrinted,
    ConstraintConsistent,
}

impl ModelVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelVariant::AsPrinted => "printed",
            ModelVariant::ConstraintConsistent => "derived",
        }
    }
}

impl std::str::FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" | "as_printed" => Ok(ModelVariant::AsPrinted),
            "derived" | "constraint_consistent" => Ok(ModelVariant::ConstraintConsistent),
            other => Err(Error::InvalidArgument(format!(
                "unknown model variant `{other}` (expected `printed` or `derived`)"
            ))),
        }
    }
}

/// Physical identity of one latch/spring/projectile instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Projectile mass `m`.
    pub projectile_mass: f64,
    /// Latch mass `M`.
    pub latch_mass: f64,
    /// Latch radius `R`.
    pub latch_radius: f64,
    /// Spring stiffness `k`.
    pub stiffness: f64,
    /// Spring natural length `p0`; must exceed the latch radius.
    pub natural_length: f64,
    pub variant: ModelVariant,
}

impl Default for SystemParams {
    /// m = 1, M = 5, R = 5, k = 1, p0 = 10 with the printed contact force.
    fn default() -> Self {
        SystemParams {
            projectile_mass: 1.0,
            latch_mass: 5.0,
            latch_radius: 5.0,
            stiffness: 1.0,
            natural_length: 10.0,
            variant: ModelVariant::AsPrinted,
        }
    }
}

impl SystemParams {
    pub fn new(m: f64, big_m: f64, r: f64, k: f64, p0: f64, variant: ModelVariant) -> Result<Self> {
        let params = SystemParams {
            projectile_mass: m,
            latch_mass: big_m,
            latch_radius: r,
            stiffness: k,
            natural_length: p0,
            variant,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_variant(mut self, variant: ModelVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive =
            [("m", self.projectile_mass), ("M", self.latch_mass), ("R", self.latch_radius), ("k", self.stiffness)];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {value}")));
            }
        }
        if !(self.natural_length.is_finite() && self.natural_length > self.latch_radius) {
            return Err(Error::InvalidParams(format!(
                "p0 must exceed the latch radius R (p0 = {}, R = {})",
                self.natural_length, self.latch_radius
            )));
        }
        Ok(())
    }

    /// Denominator of the latch-force term of the contact force.
    fn latch_term_mass(&self) -> f64 {
        match self.variant {
            ModelVariant::AsPrinted => self.projectile_mass,
            ModelVariant::ConstraintConsistent => self.latch_mass,
        }
    }

    /// Default latched-manifold membership tolerance, `1e-9 R^2`.
    pub fn default_h_tol(&self) -> f64 {
        1e-9 * self.latch_radius * self.latch_radius
    }

    /// Hookean spring force `-k (p - p0)`.
    pub fn spring_force(&self, p: f64) -> f64 {
        -self.stiffness * (p - self.natural_length)
    }

    /// Holonomic contact constraint `l^2 + (R - p)^2 - R^2`.
    pub fn holonomic_h(&self, p: f64, l: f64) -> f64 {
        let r = self.latch_radius;
        l * l + (r - p) * (r - p) - r * r
    }

    /// Time derivative of the constraint, `2 l l' - 2 (R - p) p'`.
    pub fn holonomic_h_dot(&self, state: &SystemState) -> f64 {
        2.0 * state.l * state.l_dot - 2.0 * (self.latch_radius - state.p) * state.p_dot
    }

    /// Non-negative latch position that satisfies the constraint for `p`.
    pub fn latch_from_projectile(&self, p: f64) -> Result<f64> {
        let r = self.latch_radius;
        if !(0.0..=2.0 * r).contains(&p) {
            return Err(Error::Domain { p, max: 2.0 * r });
        }
        // R^2 - (R - p)^2 factored to avoid cancellation near p = 0
        Ok((p * (2.0 * r - p)).max(0.0).sqrt())
    }

    /// Effective inverse mass `W = (R - p)^2 / m + l^2 / M` seen by the contact force.
    pub fn contact_inverse_mass(&self, p: f64, l: f64) -> f64 {
        let d = self.latch_radius - p;
        d * d / self.projectile_mass + l * l / self.latch_mass
    }

    /// Contact force `tau` that holds the constraint, for latch force `f_l`.
    pub fn contact_force(&self, state: &SystemState, f_l: f64) -> Result<f64> {
        let SystemState { p, p_dot, l, l_dot } = *state;
        let w = self.contact_inverse_mass(p, l);
        if !(w > 0.0) {
            return Err(Error::SingularConfiguration { w, p, l });
        }
        let spring = self.spring_force(p);
        let numerator = -(p_dot * p_dot + l_dot * l_dot) + (self.latch_radius - p) * spring / self.projectile_mass
            - l * f_l / self.latch_term_mass();
        Ok(numerator / w)
    }

    /// Latched iff the constraint holds within `h_tol` and the contact force is strictly positive.
    pub fn mode_of(&self, state: &SystemState, f_l: f64, h_tol: f64) -> Mode {
        if self.holonomic_h(state.p, state.l).abs() > h_tol {
            return Mode::Unlatched;
        }
        match self.contact_force(state, f_l) {
            Ok(tau) if tau > 0.0 => Mode::Latched,
            _ => Mode::Unlatched,
        }
    }

    /// Switched vector field. In `Latched` the contact force is substituted
    /// unconditionally (closed loop); in `Unlatched` it is zero.
    pub fn vector_field(&self, state: &SystemState, f_l: f64, mode: Mode) -> Result<SystemState> {
        let lambda = match mode {
            Mode::Latched => self.contact_force(state, f_l)?,
            Mode::Unlatched => 0.0,
        };
        Ok(self.field_with_contact(state, f_l, lambda))
    }

    pub(crate) fn field_with_contact(&self, state: &SystemState, f_l: f64, lambda: f64) -> SystemState {
        let r = self.latch_radius;
        SystemState {
            p: state.p_dot,
            p_dot: (self.spring_force(state.p) + (state.p - r) * lambda) / self.projectile_mass,
            l: state.l_dot,
            l_dot: (f_l + state.l * lambda) / self.latch_mass,
        }
    }

    /// `1/2 m p'^2 + 1/2 M l'^2 + 1/2 k (p - p0)^2 - F_L l`.
    pub fn mechanical_energy(&self, state: &SystemState, f_l: f64) -> f64 {
        self.projectile_energy(state) + self.latch_energy(state, f_l)
    }

    /// Projectile-and-spring part of the energy; conserved on its own while unlatched.
    pub fn projectile_energy(&self, state: &SystemState) -> f64 {
        let stretch = state.p - self.natural_length;
        0.5 * self.projectile_mass * state.p_dot * state.p_dot + 0.5 * self.stiffness * stretch * stretch
    }

    /// Latch part of the energy; conserved on its own while unlatched.
    pub fn latch_energy(&self, state: &SystemState, f_l: f64) -> f64 {
        0.5 * self.latch_mass * state.l_dot * state.l_dot - f_l * state.l
    }
}

/// One point `(p, p', l, l')` of the four-dimensional state space.
///
/// Also used for state derivatives, where the fields hold `(p', p'', l', l'')`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SystemState {
    pub p: f64,
    pub p_dot: f64,
    pub l: f64,
    pub l_dot: f64,
}

impl SystemState {
    pub const fn new(p: f64, p_dot: f64, l: f64, l_dot: f64) -> Self {
        SystemState { p, p_dot, l, l_dot }
    }

    /// Zero-velocity state on the constraint at projectile position `p`.
    pub fn at_rest_on_manifold(params: &SystemParams, p: f64) -> Result<Self> {
        Ok(SystemState::new(p, 0.0, params.latch_from_projectile(p)?, 0.0))
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.p, self.p_dot, self.l, self.l_dot]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        SystemState::new(x[0], x[1], x[2], x[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Latched,
    Unlatched,
}

impl Mode {
    /// Single-letter code used in trajectory files.
    pub fn code(self) -> &'static str {
        match self {
            Mode::Latched => "L",
            Mode::Unlatched => "U",
        }
    }
}
