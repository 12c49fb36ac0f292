use serde::{Deserialize, Serialize};

use super::ModelsError;

/// A positive coefficient profile on `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Profile {
    Constant { value: f64 },
    /// `Σ_k c_k (ζ − a)^k`.
    Polynomial { coefficients: Vec<f64> },
    /// Piecewise constant, `(start, end, value)` tiling `[a, b]`.
    Segments { pieces: Vec<(f64, f64, f64)> },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Profile::Constant { value } => Some(*value),
            Profile::Polynomial { coefficients } if coefficients.iter().skip(1).all(|&c| c == 0.0) => {
                Some(coefficients.first().copied().unwrap_or(0.0))
            }
            Profile::Segments { pieces } if pieces.windows(2).all(|w| w[0].2 == w[1].2) => pieces.first().map(|p| p.2),
            _ => None,
        }
    }

    pub fn value(&self, a: f64, zeta: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Polynomial { coefficients } => {
                let s = zeta - a;
                coefficients.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
            Profile::Segments { pieces } => {
                let k = pieces.iter().skip(1).take_while(|p| zeta >= p.0).count();
                pieces[k].2
            }
        }
    }

    pub fn derivative(&self, a: f64, zeta: f64) -> f64 {
        match self {
            Profile::Polynomial { coefficients } => {
                let s = zeta - a;
                coefficients.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * s + c * k as f64)
            }
            _ => 0.0,
        }
    }

    /// Checks positivity on a fine sample of `[a, b]` and that segment
    /// pieces tile the interval.
    pub fn check(&self, what: &'static str, a: f64, b: f64) -> Result<(), ModelsError> {
        if let Profile::Segments { pieces } = self {
            let tol = 1e-12 * (b - a);
            let tiles = !pieces.is_empty()
                && (pieces[0].0 - a).abs() <= tol
                && (pieces[pieces.len() - 1].1 - b).abs() <= tol
                && pieces.windows(2).all(|w| (w[0].1 - w[1].0).abs() <= tol)
                && pieces.iter().all(|p| p.1 > p.0);
            if !tiles {
                return Err(ModelsError::BadProfile { what });
            }
        }
        if let Profile::Polynomial { coefficients } = self {
            if coefficients.is_empty() {
                return Err(ModelsError::BadProfile { what });
            }
        }
        let samples = 1025;
        for i in 0..samples {
            let z = a + (b - a) * i as f64 / (samples - 1) as f64;
            let v = self.value(a, z);
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelsError::NonPositive { what, at: z, value: v });
            }
        }
        Ok(())
    }
}

/// Density and tension of one string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StringParams {
    pub rho: Profile,
    pub tension: Profile,
}

impl StringParams {
    pub fn uniform(rho: f64, tension: f64) -> Self {
        Self { rho: Profile::constant(rho), tension: Profile::constant(tension) }
    }

    pub fn check(&self, a: f64, b: f64) -> Result<(), ModelsError> {
        self.rho.check("rho", a, b)?;
        self.tension.check("tension", a, b)
    }

    pub fn rho_at(&self, a: f64, zeta: f64) -> f64 {
        self.rho.value(a, zeta)
    }

    pub fn tension_at(&self, a: f64, zeta: f64) -> f64 {
        self.tension.value(a, zeta)
    }
}
