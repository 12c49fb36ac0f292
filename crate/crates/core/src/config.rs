//! TOML system descriptions.
//!
//! A file either names a preset:
//!
//! ```toml
//! preset = "two-string"
//! [params]
//! rho = [1.0, 1.0]
//! tension = [1.0, 1.0]
//! sigma = [1.0]
//! interval = [0.0, 1.0]
//! ```
//!
//! or spells the system out, matrices as row-major lists:
//!
//! ```toml
//! n = 2
//! interval = [0.0, 1.0]
//! P1 = [0.0, 1.0, 1.0, 0.0]
//! P0 = [0.0, 0.0, 0.0, 0.0]
//!
//! [hamiltonian]
//! kind = "constant"
//! matrix = [1.0, 0.0, 0.0, 1.0]
//!
//! [boundary]
//! form = "endpoint"              # acts on ((Hx)(b); (Hx)(a)), or "effort-flow"
//! matrix = [1.0, 0.0, 0.0, 0.0,
//!           0.0, 0.0, 1.0, 0.0]
//! ```
//!
//! `hamiltonian.kind` may also be `"segments"` with `[[hamiltonian.segments]]`
//! tables `{ start, end, matrix }`, or `"polynomial"` with
//! `[[hamiltonian.pieces]]` tables `{ start, end, coefficients }` where
//! `coefficients[k]` multiplies `(ζ − start)^k`. Unknown keys are rejected.

use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

use crate::model::{BoundaryForm, BoundarySpec, HamiltonianField, ModelError, PHSystem, PolynomialPiece};
use crate::models::{ModelsError, Preset, PresetParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("malformed config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Models(#[from] ModelsError),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub start: f64,
    pub end: f64,
    pub matrix: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceConfig {
    pub start: f64,
    pub end: f64,
    pub coefficients: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HamiltonianConfig {
    Constant { matrix: Vec<f64> },
    Segments { segments: Vec<SegmentConfig> },
    Polynomial { pieces: Vec<PieceConfig> },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    pub form: BoundaryForm,
    pub matrix: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSystem {
    pub n: usize,
    pub interval: [f64; 2],
    #[serde(rename = "P1")]
    pub p1: Vec<f64>,
    #[serde(rename = "P0", default)]
    pub p0: Option<Vec<f64>>,
    pub hamiltonian: HamiltonianConfig,
    pub boundary: BoundaryConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetSystem {
    pub preset: Preset,
    #[serde(default)]
    pub params: PresetParams,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SystemConfig {
    Preset(PresetSystem),
    Explicit(ExplicitSystem),
}

fn matrix(what: &str, values: &[f64], rows: usize, cols: usize) -> Result<DMatrix<f64>, ConfigError> {
    if values.len() != rows * cols {
        return Err(ConfigError::Invalid(format!("{what} needs {rows}x{cols} = {} entries, got {}", rows * cols, values.len())));
    }
    Ok(DMatrix::from_row_slice(rows, cols, values))
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        // parse to a value first: the untagged enum would otherwise hide
        // the specific unknown key behind a generic message
        let value: toml::Table = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let parsed = if value.contains_key("preset") {
            value.try_into::<PresetSystem>().map(SystemConfig::Preset)
        } else {
            value.try_into::<ExplicitSystem>().map(SystemConfig::Explicit)
        };
        parsed.map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Preset name, if the config names one.
    pub fn label(&self) -> Option<String> {
        match self {
            SystemConfig::Preset(p) => Some(p.preset.to_string()),
            SystemConfig::Explicit(_) => None,
        }
    }

    pub fn build(&self) -> Result<PHSystem, ConfigError> {
        match self {
            SystemConfig::Preset(p) => Ok(p.preset.build(&p.params)?),
            SystemConfig::Explicit(e) => e.build(),
        }
    }
}

impl ExplicitSystem {
    pub fn build(&self) -> Result<PHSystem, ConfigError> {
        let n = self.n;
        if n == 0 {
            return Err(ConfigError::Invalid("n must be positive".into()));
        }
        let [a, b] = self.interval;
        let p1 = matrix("P1", &self.p1, n, n)?;
        let p0 = match &self.p0 {
            Some(v) => matrix("P0", v, n, n)?,
            None => DMatrix::zeros(n, n),
        };
        let h = match &self.hamiltonian {
            HamiltonianConfig::Constant { matrix: m } => HamiltonianField::constant(matrix("H", m, n, n)?, a, b)?,
            HamiltonianConfig::Segments { segments } => HamiltonianField::segments(
                segments
                    .iter()
                    .map(|s| Ok((s.start, s.end, matrix("H segment", &s.matrix, n, n)?)))
                    .collect::<Result<_, ConfigError>>()?,
            )?,
            HamiltonianConfig::Polynomial { pieces } => HamiltonianField::piecewise_polynomial(
                pieces
                    .iter()
                    .map(|p| {
                        let coefficients = p
                            .coefficients
                            .iter()
                            .map(|c| matrix("H coefficient", c, n, n))
                            .collect::<Result<_, _>>()?;
                        Ok(PolynomialPiece { start: p.start, end: p.end, coefficients })
                    })
                    .collect::<Result<_, ConfigError>>()?,
            )?,
        };
        let (ha, hb) = h.interval();
        if (ha - a).abs() > 1e-12 * (b - a) || (hb - b).abs() > 1e-12 * (b - a) {
            return Err(ConfigError::Invalid(format!("hamiltonian covers [{ha}, {hb}], interval is [{a}, {b}]")));
        }
        let w = matrix("boundary matrix", &self.boundary.matrix, n, 2 * n)?;
        let boundary = BoundarySpec { form: self.boundary.form, matrix: w };
        Ok(PHSystem::new(p1, p0, h, boundary)?)
    }
}
