//! Simulation and bifurcation analysis for contact-latch spring-actuated systems.
//!
//! - [`model`]: parameters, constraint, contact force and the switched vector field
//! - [`sim`]: adaptive integration of the hybrid dynamics with event-located unlatching
//! - [`equilibria`]: latched fixed points from the equilibrium quartic
//! - [`stability`]: finite-difference linearization and saddle classification
//! - [`bifurcation`]: continuation of the moving saddle, region maps, design check
//! - [`config`], [`output`], [`commands`]: the `lamsa` command-line front end

// `!(x > 0.0)` style guards are used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod commands;
pub mod config;
pub mod equilibria;
pub mod error;
pub mod exec;
pub mod model;
pub mod output;
pub mod sim;
pub mod stability;

pub use error::{Error, Result};
pub use exec::Executor;
pub use model::{Mode, ModelVariant, SystemParams, SystemState};
