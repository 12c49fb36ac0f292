//! Summation-by-parts semidiscretization with projected boundary conditions
//! and implicit midpoint time stepping.

mod export;
mod grid;
mod initial;
mod integrator;
mod operator;

use thiserror::Error;

use crate::model::ModelError;

pub use export::{write_energy_csv, write_trajectory_csv};
pub use grid::Grid;
pub use initial::{bump, bump_state, from_fn, project_initial, sample_member, SAMPLER_MODES};
pub use integrator::{
    integrate, simulate, simulate_with, step_count, step_midpoint, MidpointStepper, Observer, Trajectory,
    INTEGRATOR_NAME,
};
pub use operator::{boundary_subspace, build_semidiscrete, NodeMetric, SemidiscreteOperator, MIN_CELLS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizationError {
    #[error("invalid grid: [{a}, {b}] with {cells} cells")]
    InvalidGrid { a: f64, b: f64, cells: usize },
    #[error("at least {min} cells are required, got {cells}")]
    TooFewCells { cells: usize, min: usize },
    #[error("boundary constraints are rank deficient (singular value ratio {margin:e})")]
    RankDeficient { margin: f64 },
    #[error("time step must be positive and not exceed the horizon, got {0}")]
    InvalidStep(f64),
    #[error("horizon must be positive, got {0}")]
    InvalidHorizon(f64),
    #[error("midpoint matrix is singular (pivot column {column})")]
    Singular { column: usize },
    #[error("state length {found} does not match {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("integration produced a non-finite state")]
    NonFinite,
    #[error(transparent)]
    Model(#[from] ModelError),
}
