//! Total energy, the local energy window functionals and their monotonicity laws.
//!
//! Everything here reads a [`DensityField`], the nodal energy density of a run,
//! and integrates it with the trapezoid rule in time and space. Window ends
//! that fall between samples are handled by integrating the linear
//! interpolant exactly, so every functional is continuous in its parameters.

mod bounds;
mod density;
mod export;
mod history;
mod monotone;
mod windows;

use thiserror::Error;

pub use bounds::{bound_ratios, ensemble_bounds, BoundRatios, EnsembleBounds};
pub use density::{DensityField, DensityRecorder};
pub use export::{write_f_csv, write_g_csv};
pub use history::{EnergyHistory, HistoryRecorder};
pub use monotone::{
    check_f_monotone, check_g_monotone, monotonicity_tolerance, Direction, MonotonicityReport,
    DEFAULT_TOLERANCE_CONSTANT,
};
pub use windows::{
    boundary_energy_integral, f_window, g_tilde_window, g_window, total_energy, Endpoint, WindowSpec,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("time window [{from}, {to}] exceeds the horizon {horizon}")]
    OutsideHorizon { from: f64, to: f64, horizon: f64 },
    #[error("t = {t} is outside the admissible range [0, {end}]")]
    OutsideWindow { t: f64, end: f64 },
    #[error("t = {t} is not a multiple of the time step {dt}")]
    OffGrid { t: f64, dt: f64 },
    #[error("zeta = {zeta} lies outside [{a}, {b}]")]
    OutsideInterval { zeta: f64, a: f64, b: f64 },
    #[error("snapshot {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("row length {found} does not match {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no data")]
    Empty,
    #[error("i/o: {0}")]
    Io(String),
}
