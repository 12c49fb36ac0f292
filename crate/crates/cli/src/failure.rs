use std::fmt;
use std::io;
use std::path::Path;

use ph_stability::config::ConfigError;
use ph_stability::discretization::DiscretizationError;
use ph_stability::energy::EnergyError;
use ph_stability::model::ModelError;
use ph_stability::stability::StabilityError;

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_WINDOW: i32 = 65;
pub const EXIT_INTEGRATOR: i32 = 70;
pub const EXIT_IO: i32 = 74;

/// An error together with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    pub fn io(path: &Path, err: io::Error) -> Self {
        Self::new(EXIT_IO, format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<DiscretizationError> for Failure {
    fn from(e: DiscretizationError) -> Self {
        let code = match e {
            DiscretizationError::Singular { .. } | DiscretizationError::NonFinite | DiscretizationError::RankDeficient { .. } => {
                EXIT_INTEGRATOR
            }
            _ => EXIT_USAGE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<EnergyError> for Failure {
    fn from(e: EnergyError) -> Self {
        let code = match e {
            EnergyError::InvalidWindow(_) | EnergyError::OutsideHorizon { .. } => EXIT_WINDOW,
            EnergyError::Io(_) => EXIT_IO,
            _ => EXIT_INTEGRATOR,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<StabilityError> for Failure {
    fn from(e: StabilityError) -> Self {
        match e {
            StabilityError::InvalidWindow(_) => Failure::new(EXIT_WINDOW, e.to_string()),
            StabilityError::Discretization(d) => d.into(),
            StabilityError::Energy(d) => d.into(),
            _ => Failure::usage(e.to_string()),
        }
    }
}
