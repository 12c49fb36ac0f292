//! Port-Hamiltonian system description, validation and structural constants.

mod constants;
mod hamiltonian;
mod system;
mod validation;

use thiserror::Error;

pub use constants::{structural_constants, StructuralConstants, DEFAULT_SAFETY};
pub use hamiltonian::{HamiltonianField, MatrixFn, PolynomialPiece, RepresentationTag};
pub use system::{
    boundary_form_matrix, boundary_form_value, effort_flow_to_endpoint, endpoint_to_effort_flow, trace_map,
    trace_map_inverse, BoundaryForm, BoundarySpec, PHSystem,
};
pub use validation::{
    sample_grid, validate_system, BoundaryDiagnostics, Check, CheckResult, ValidationReport, Witness, DEFAULT_SAMPLES,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },
    #[error("{what}: expected shape {expected:?}, found {found:?}")]
    DimensionMismatch { what: &'static str, expected: (usize, usize), found: (usize, usize) },
    #[error("vector length {found} does not match dimension {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("representation has no pieces")]
    EmptyRepresentation,
    #[error("pieces are not contiguous at {at}")]
    NonContiguousPieces { at: f64 },
    #[error("{what} is not invertible")]
    NotInvertible { what: &'static str },
    #[error("H is not positive definite at zeta = {zeta} (smallest eigenvalue {eigenvalue})")]
    Coercivity { zeta: f64, eigenvalue: f64 },
    #[error("at least 2 samples are required, got {0}")]
    InvalidSamples(usize),
    #[error("safety factor must be finite and >= 1, got {0}")]
    InvalidSafety(f64),
}
