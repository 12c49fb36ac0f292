//! Vibrating-string systems and a characteristics oracle for uniform strings.
//!
//! All strings share the interval `[a, b]`. The state of string `j` is
//! `(x_{2j+1}, x_{2j+2})` with `H_j = diag(1/ρ_j, T_j)`; velocities and forces
//! are read off as `v = x_1`, `F(b) = T x_2(b)`, `F(a) = −T x_2(a)`.

mod dalembert;
mod preset;
mod profile;
mod strings;

use thiserror::Error;

use crate::model::ModelError;

pub use dalembert::{reflection_coefficient, DAlembert};
pub use preset::{Preset, PresetParams};
pub use profile::{Profile, StringParams};
pub use strings::{
    fixed_fixed_string, four_string_coupling, four_string_network, matched_damping, single_damped_string, single_string,
    two_string_coupling, two_string_network, End, EndCondition,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelsError {
    #[error("{what} must be positive, got {value} at zeta = {at}")]
    NonPositive { what: &'static str, at: f64, value: f64 },
    #[error("{what} profile does not tile the interval")]
    BadProfile { what: &'static str },
    #[error("densities differ at the junction at zeta = {at} ({first} vs {second}); the coupling would not be lossless")]
    DensityMismatch { at: f64, first: f64, second: f64 },
    #[error("{0}")]
    Unsupported(&'static str),
    #[error("preset {preset} expects {expected} values for {what}, got {found}")]
    ParameterCount { preset: &'static str, what: &'static str, expected: usize, found: usize },
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
