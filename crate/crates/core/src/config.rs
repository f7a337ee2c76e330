//! Run configuration: a flat TOML document whose omitted keys take defaults.
//!
//! ```toml
//! m = 1.0
//! M = 5.0
//! R = 5.0
//! k = 1.0
//! p0 = 10.0
//! variant = "printed"     # or "derived"
//! fl_range = "-15:0:0.5"  # or fl = -15.0
//! grid = "41x31"
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bifurcation::NominalFormula;
use crate::error::{Error, Result};
use crate::model::{ModelVariant, SystemParams, SystemState};
use crate::sim::IntegratorConfig;

/// Document form, one field per accepted key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub k: f64,
    pub p0: f64,
    pub variant: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fl: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fl_range: Option<String>,
    pub grid: String,
    pub output_dir: String,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub event_time_tol: f64,
    pub constraint_projection: bool,
    pub max_steps: usize,
    /// Simulation horizon for `simulate` and `phase-portrait`.
    pub t_end: f64,
    /// Initial state `[p, p_dot, l, l_dot]` for `simulate`.
    pub x0: [f64; 4],
    /// Starting `p*` for `trace`; defaults to the computed fixed point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace_start_p: Option<f64>,
    /// Half-width of the initial velocity range for `phase-portrait`.
    pub velocity_range: f64,
    /// Fraction of a grid cell by which `phase-portrait` jitters initial conditions.
    pub jitter: f64,
    /// Slope formula for `quiver`: "implicit" or "printed".
    pub nominal_formula: String,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let params = SystemParams::default();
        let integ = IntegratorConfig::default();
        ConfigFile {
            m: params.projectile_mass,
            big_m: params.latch_mass,
            r: params.latch_radius,
            k: params.stiffness,
            p0: params.natural_length,
            variant: ModelVariant::AsPrinted.as_str().to_string(),
            fl: None,
            fl_range: None,
            grid: "41x31".to_string(),
            output_dir: "out".to_string(),
            seed: 0,
            rel_tol: integ.rel_tol,
            abs_tol: integ.abs_tol,
            max_step: integ.max_step,
            event_time_tol: integ.event_time_tol,
            constraint_projection: integ.constraint_projection,
            max_steps: integ.max_steps,
            t_end: 10.0,
            x0: [1.0, 0.0, 3.0, 0.0],
            trace_start_p: None,
            velocity_range: 2.0,
            jitter: 0.0,
            nominal_formula: "implicit".to_string(),
        }
    }
}

/// Latch force: one value, or an inclusive `start:stop:step` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ForceSpec {
    Single(f64),
    Range { start: f64, stop: f64, step: f64 },
}

impl ForceSpec {
    pub const DEFAULT_FORCE: f64 = -15.0;

    pub fn parse_range(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!("fl_range `{text}` must have the form start:stop:step")));
        }
        let mut nums = [0.0; 3];
        for (slot, part) in nums.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("fl_range `{text}`: `{part}` is not a number")))?;
        }
        let [start, stop, step] = nums;
        let spec = ForceSpec::Range { start, stop, step };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ForceSpec::Single(f) if !f.is_finite() => Err(Error::Config(format!("fl must be finite, got {f}"))),
            ForceSpec::Single(_) => Ok(()),
            ForceSpec::Range { start, stop, step } => {
                if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
                    return Err(Error::Config("fl_range entries must be finite".into()));
                }
                if !(step > 0.0) {
                    return Err(Error::Config(format!("fl_range step must be > 0, got {step}")));
                }
                if !(stop >= start) {
                    return Err(Error::Config(format!("fl_range is empty: stop {stop} < start {start}")));
                }
                Ok(())
            }
        }
    }

    /// Sweep values; the stop value is included when it lies on the step grid.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            ForceSpec::Single(f) => vec![f],
            ForceSpec::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n)
                    .map(|i| {
                        let v = start + step * i as f64;
                        if (v - stop).abs() <= 1e-9 * step {
                            stop
                        } else {
                            v
                        }
                    })
                    .collect()
            }
        }
    }

    pub fn first(&self) -> f64 {
        match *self {
            ForceSpec::Single(f) => f,
            ForceSpec::Range { start, .. } => start,
        }
    }

    /// Force span used for rasters: the range itself, or the interval between
    /// a single value and zero.
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            ForceSpec::Range { start, stop, .. } => (start, stop),
            ForceSpec::Single(f) if f < 0.0 => (f, 0.0),
            ForceSpec::Single(f) if f > 0.0 => (0.0, f),
            ForceSpec::Single(_) => (Self::DEFAULT_FORCE, 0.0),
        }
    }
}

pub fn parse_grid(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("grid `{text}` must have the form NxM with N, M >= 2"));
    let (a, b) = text.trim().split_once(['x', 'X']).ok_or_else(bad)?;
    let n: usize = a.trim().parse().map_err(|_| bad())?;
    let m: usize = b.trim().parse().map_err(|_| bad())?;
    if n < 2 || m < 2 {
        return Err(bad());
    }
    Ok((n, m))
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub integrator: IntegratorConfig,
    pub force: ForceSpec,
    /// `(n_p, n_FL)` for rasters; `(n_p, n_v)` for the phase portrait.
    pub grid: (usize, usize),
    pub output_dir: PathBuf,
    pub seed: u64,
    pub t_end: f64,
    pub x0: SystemState,
    pub trace_start_p: Option<f64>,
    pub velocity_range: f64,
    pub jitter: f64,
    pub nominal_formula: NominalFormula,
    /// The document after overrides, echoed into the manifest.
    pub echo: ConfigFile,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn into_run_config(self) -> Result<RunConfig> {
        let variant: ModelVariant = self.variant.parse().map_err(|e: Error| Error::Config(e.to_string()))?;
        let params = SystemParams::new(self.m, self.big_m, self.r, self.k, self.p0, variant)
            .map_err(|e| Error::Config(e.to_string()))?;
        let integrator = IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            event_time_tol: self.event_time_tol,
            constraint_projection: self.constraint_projection,
            max_steps: self.max_steps,
        };
        integrator.validate().map_err(|e| Error::Config(e.to_string()))?;
        let force = match (self.fl, &self.fl_range) {
            (Some(_), Some(_)) => return Err(Error::Config("set either fl or fl_range, not both".into())),
            (Some(f), None) => ForceSpec::Single(f),
            (None, Some(range)) => ForceSpec::parse_range(range)?,
            (None, None) => ForceSpec::Single(ForceSpec::DEFAULT_FORCE),
        };
        force.validate()?;
        let grid = parse_grid(&self.grid)?;
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::Config(format!("t_end must be finite and >= 0, got {}", self.t_end)));
        }
        let x0 = SystemState::from_array(self.x0);
        if !x0.is_finite() {
            return Err(Error::Config("x0 entries must be finite".into()));
        }
        if let Some(p) = self.trace_start_p {
            if !(p.is_finite() && (0.0..params.latch_radius).contains(&p)) {
                return Err(Error::Config(format!("trace_start_p must lie in [0, R), got {p}")));
            }
        }
        if !(self.velocity_range.is_finite() && self.velocity_range > 0.0) {
            return Err(Error::Config(format!("velocity_range must be > 0, got {}", self.velocity_range)));
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return Err(Error::Config(format!("jitter must lie in [0, 1], got {}", self.jitter)));
        }
        let nominal_formula = match self.nominal_formula.as_str() {
            "implicit" => NominalFormula::ImplicitDiff,
            "printed" => NominalFormula::Printed,
            other => return Err(Error::Config(format!("nominal_formula `{other}` must be `implicit` or `printed`"))),
        };
        Ok(RunConfig {
            params,
            integrator,
            force,
            grid,
            output_dir: PathBuf::from(&self.output_dir),
            seed: self.seed,
            t_end: self.t_end,
            x0,
            trace_start_p: self.trace_start_p,
            velocity_range: self.velocity_range,
            jitter: self.jitter,
            nominal_formula,
            echo: self,
        })
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    ConfigFile::parse(text)?.into_run_config()
}
