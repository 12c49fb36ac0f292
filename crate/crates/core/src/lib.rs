//! Simulation and stability analysis for linear first-order port-Hamiltonian
//! systems on a bounded interval.

pub mod config;
pub mod discretization;
pub mod energy;
pub mod linalg;
pub mod model;
pub mod models;
pub mod stability;
