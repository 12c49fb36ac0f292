use serde::Serialize;

use super::system::PHSystem;
use super::validation::sample_grid;
use super::ModelError;
use crate::linalg::{max_generalized_eigenvalue, sym_eigenvalues, symmetrize};

pub const DEFAULT_SAFETY: f64 = 1.05;

/// Scalars controlling the local energy estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructuralConstants {
    /// Slope of the time windows: `γ H(ζ) ≥ ±P1⁻¹` (a slowness, time per unit length).
    pub gamma_char: f64,
    /// Slope of the space windows: `±H P1 H ≤ γ H` (a speed).
    pub gamma_flux: f64,
    /// Smallest `κ ≥ 0` with `K(ζ) ≤ κ H(ζ)`; not scaled by `safety`.
    pub kappa: f64,
    /// Smallest `κ ≥ 0` with `−K(ζ) ≤ κ H(ζ)`, the growth constant of the
    /// reflected problem that governs the windows anchored at `b`.
    pub kappa_reflected: f64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub safety: f64,
    #[serde(skip)]
    pub grid: Vec<f64>,
}

/// Computes `γ_char`, `γ_flux` and `κ` by per-sample symmetric-definite
/// generalized eigenproblems against `H(ζ)`.
///
/// The `γ`'s are multiplied by `safety` to cover maxima between samples.
pub fn structural_constants(sys: &PHSystem, samples: usize, safety: f64) -> Result<StructuralConstants, ModelError> {
    if samples < 2 {
        return Err(ModelError::InvalidSamples(samples));
    }
    if !(safety >= 1.0 && safety.is_finite()) {
        return Err(ModelError::InvalidSafety(safety));
    }
    let p1 = sys.p1();
    let p1_inv = sys.p1_inv()?;
    let grid = sample_grid(sys, samples);

    let mut gamma_char = f64::NEG_INFINITY;
    let mut gamma_flux = f64::NEG_INFINITY;
    let mut kappa: f64 = 0.0;
    let mut kappa_reflected: f64 = 0.0;
    let mut m = f64::INFINITY;
    let mut big_m = f64::NEG_INFINITY;
    for &z in &grid {
        let h = symmetrize(&sys.hamiltonian().eval(z));
        let ev = sym_eigenvalues(&h);
        let (lo, hi) = (ev[0], *ev.last().expect("n ≥ 1"));
        if lo <= 0.0 {
            return Err(ModelError::Coercivity { zeta: z, eigenvalue: lo });
        }
        m = m.min(lo);
        big_m = big_m.max(hi);
        let gen_max = |x: &nalgebra::DMatrix<f64>| {
            max_generalized_eigenvalue(x, &h).ok_or(ModelError::Coercivity { zeta: z, eigenvalue: lo })
        };
        let flux = &h * p1 * &h;
        for sign in [1.0, -1.0] {
            gamma_char = gamma_char.max(gen_max(&(p1_inv * sign))?);
            gamma_flux = gamma_flux.max(gen_max(&(&flux * sign))?);
        }
        let k = symmetrize(&sys.k_field(z)?);
        kappa = kappa.max(gen_max(&k)?);
        kappa_reflected = kappa_reflected.max(gen_max(&(-k))?);
    }

    Ok(StructuralConstants {
        gamma_char: safety * gamma_char,
        gamma_flux: safety * gamma_flux,
        kappa,
        kappa_reflected,
        m,
        big_m,
        safety,
        grid,
    })
}
