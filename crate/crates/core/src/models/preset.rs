use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    fixed_fixed_string, four_string_network, matched_damping, single_damped_string, two_string_network, End, ModelsError,
    StringParams,
};
use crate::model::PHSystem;

/// Named systems addressable from configuration files and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// String fixed at `a`, damper at `b`.
    SingleDamped,
    TwoString,
    FourString,
    /// Conservative string with both ends fixed.
    FixedFixed,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::SingleDamped, Preset::TwoString, Preset::FourString, Preset::FixedFixed];

    pub fn name(self) -> &'static str {
        match self {
            Preset::SingleDamped => "single-damped",
            Preset::TwoString => "two-string",
            Preset::FourString => "four-string",
            Preset::FixedFixed => "fixed-fixed",
        }
    }

    pub fn strings(self) -> usize {
        match self {
            Preset::SingleDamped | Preset::FixedFixed => 1,
            Preset::TwoString => 2,
            Preset::FourString => 4,
        }
    }

    pub fn dampers(self) -> usize {
        match self {
            Preset::FixedFixed => 0,
            Preset::SingleDamped | Preset::TwoString => 1,
            Preset::FourString => 2,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = ModelsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| ModelsError::UnknownPreset(s.to_string()))
    }
}

/// Uniform string parameters for a preset. Empty lists take defaults
/// (`ρ = T = 1`; matched damping for `single-damped`, `σ = 1` otherwise);
/// a single value is broadcast to every string or damper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetParams {
    #[serde(default)]
    pub rho: Vec<f64>,
    #[serde(default)]
    pub tension: Vec<f64>,
    #[serde(default)]
    pub sigma: Vec<f64>,
    #[serde(default = "unit_interval")]
    pub interval: [f64; 2],
}

fn unit_interval() -> [f64; 2] {
    [0.0, 1.0]
}

impl Default for PresetParams {
    fn default() -> Self {
        Self { rho: Vec::new(), tension: Vec::new(), sigma: Vec::new(), interval: unit_interval() }
    }
}

fn expand(preset: Preset, what: &'static str, values: &[f64], count: usize, default: f64) -> Result<Vec<f64>, ModelsError> {
    match values.len() {
        0 => Ok(vec![default; count]),
        1 => Ok(vec![values[0]; count]),
        k if k == count => Ok(values.to_vec()),
        k => Err(ModelsError::ParameterCount { preset: preset.name(), what, expected: count, found: k }),
    }
}

impl Preset {
    pub fn build(self, params: &PresetParams) -> Result<PHSystem, ModelsError> {
        let [a, b] = params.interval;
        let k = self.strings();
        let rho = expand(self, "rho", &params.rho, k, 1.0)?;
        let tension = expand(self, "tension", &params.tension, k, 1.0)?;
        let strings: Vec<StringParams> = rho.iter().zip(&tension).map(|(&r, &t)| StringParams::uniform(r, t)).collect();
        let sigma = match self {
            Preset::FixedFixed if params.sigma.is_empty() => Vec::new(),
            Preset::FixedFixed => {
                return Err(ModelsError::ParameterCount {
                    preset: self.name(),
                    what: "sigma",
                    expected: 0,
                    found: params.sigma.len(),
                })
            }
            Preset::SingleDamped => expand(self, "sigma", &params.sigma, 1, matched_damping(rho[0], tension[0]))?,
            _ => expand(self, "sigma", &params.sigma, self.dampers(), 1.0)?,
        };
        match self {
            Preset::SingleDamped => single_damped_string(&strings[0], a, b, End::A, sigma[0]),
            Preset::FixedFixed => fixed_fixed_string(&strings[0], a, b),
            Preset::TwoString => two_string_network(&strings[0], &strings[1], a, b, sigma[0]),
            Preset::FourString => {
                let four: [StringParams; 4] = strings.try_into().expect("four strings");
                four_string_network(&four, a, b, sigma[0], sigma[1])
            }
        }
    }
}
