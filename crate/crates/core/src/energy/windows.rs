use serde::{Deserialize, Serialize};

use super::{DensityField, EnergyError};
use crate::discretization::Trajectory;
use crate::model::StructuralConstants;

/// Endpoint of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    A,
    B,
}

impl Endpoint {
    pub const BOTH: [Endpoint; 2] = [Endpoint::A, Endpoint::B];

    pub fn name(self) -> &'static str {
        match self {
            Endpoint::A => "a",
            Endpoint::B => "b",
        }
    }
}

/// Parameters of the local energy windows.
///
/// `sigma`, `tau` and `gamma` shape the time windows of `F`/`F̃`; `alpha`,
/// `beta`, `epsilon` and `gamma_space` the space windows of `G`/`G̃`. The two
/// slopes differ in general: time windows need `γH ≥ ±P1⁻¹`, space windows
/// `γH ≥ ±HP1H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub sigma: f64,
    pub tau: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub gamma_space: f64,
}

impl WindowSpec {
    /// Defaults on `[a, b]` with `L = b − a`: `σ = γL`, `τ = σ + L/2`,
    /// `α = a + L/4`, `β = b − L/4`, `ε = L/5`.
    pub fn auto(consts: &StructuralConstants, a: f64, b: f64) -> Self {
        let len = b - a;
        let sigma = consts.gamma_char * len;
        Self {
            sigma,
            tau: sigma + 0.5 * len,
            gamma: consts.gamma_char,
            alpha: a + 0.25 * len,
            beta: b - 0.25 * len,
            epsilon: 0.2 * len,
            gamma_space: consts.gamma_flux,
        }
    }

    /// Hypotheses of the time windows: `0 < σ < τ`, `γ > 0`, `σ ≥ γ(b − a)`.
    pub fn check_time(&self, a: f64, b: f64) -> Result<(), EnergyError> {
        let bad = |what: &str| Err(EnergyError::InvalidWindow(what.to_string()));
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad("gamma must be positive");
        }
        if !(self.sigma > 0.0 && self.sigma < self.tau && self.tau.is_finite()) {
            return bad("need 0 < sigma < tau");
        }
        if self.sigma < self.gamma * (b - a) * (1.0 - 1e-12) {
            return bad("need sigma >= gamma (b - a)");
        }
        Ok(())
    }

    /// Hypotheses of the space windows: `a < α < β < b`, `0 < ε < (b − a)/2`, `γ > 0`.
    pub fn check_space(&self, a: f64, b: f64) -> Result<(), EnergyError> {
        let bad = |what: &str| Err(EnergyError::InvalidWindow(what.to_string()));
        if !(self.gamma_space > 0.0 && self.gamma_space.is_finite()) {
            return bad("gamma_space must be positive");
        }
        if !(a < self.alpha && self.alpha < self.beta && self.beta < b) {
            return bad("need a < alpha < beta < b");
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5 * (b - a)) {
            return bad("need 0 < epsilon < (b - a)/2");
        }
        Ok(())
    }

    /// Last admissible time of `G`, `(β − α)/(2γ)`.
    pub fn g_end(&self) -> f64 {
        (self.beta - self.alpha) / (2.0 * self.gamma_space)
    }

    /// Last admissible time of `G̃`, `ε/γ`.
    pub fn g_tilde_end(&self) -> f64 {
        self.epsilon / self.gamma_space
    }

    /// Time span `[σ − γ(b − a), τ + γ(b − a)]` covered by all `F` windows.
    pub fn time_span(&self, a: f64, b: f64) -> (f64, f64) {
        (self.sigma - self.gamma * (b - a), self.tau + self.gamma * (b - a))
    }
}

/// `‖x(t_k)‖²_X` of a stored trajectory.
pub fn total_energy(traj: &Trajectory, k: usize) -> Result<f64, EnergyError> {
    let x = traj.snapshot(k).ok_or(EnergyError::IndexOutOfRange { index: k, len: traj.len() })?;
    Ok(traj.metric().energy(x))
}

/// Time window of `F` at `ζ`: it opens by `γ(ζ − a)` on each side of
/// `[σ, τ]`; the reflected window of `F̃` opens by `γ(b − ζ)`.
fn f_bounds(field: &DensityField, zeta: f64, spec: &WindowSpec, flipped: bool) -> (f64, f64) {
    let (a, b) = field.grid().interval();
    let spread = if flipped { spec.gamma * (b - zeta) } else { spec.gamma * (zeta - a) };
    (spec.sigma - spread, spec.tau + spread)
}

/// `F(ζ) = ∫ (xᵀHx)(t, ζ) dt` over `[σ − γ(ζ − a), τ + γ(ζ − a)]`.
///
/// With `flipped`, the window functional of the reflected problem
/// `x̃(t, ζ) = x(t, a + b − ζ)`, read back in the original coordinate:
/// `F̃(ζ) = ∫ (xᵀHx)(t, ζ) dt` over `[σ − γ(b − ζ), τ + γ(b − ζ)]`. So
/// `F(a)` and `F̃(b)` are the boundary integrals over `[σ, τ]`, and `F(b)`,
/// `F̃(a)` the ones over the widest window.
pub fn f_window(field: &DensityField, zeta: f64, spec: &WindowSpec, flipped: bool) -> Result<f64, EnergyError> {
    let (a, b) = field.grid().interval();
    spec.check_time(a, b)?;
    field.check_zeta(zeta)?;
    let (lo, hi) = f_bounds(field, zeta, spec, flipped);
    field.check_time_range(lo, hi)?;
    Ok(field.integrate_time(lo, hi, |k| field.at(k, zeta)))
}

/// `∫_σ^τ (xᵀHx)(t, δ) dt`.
pub fn boundary_energy_integral(field: &DensityField, sigma: f64, tau: f64, endpoint: Endpoint) -> Result<f64, EnergyError> {
    if !(sigma <= tau) {
        return Err(EnergyError::InvalidWindow("need sigma <= tau".into()));
    }
    field.check_time_range(sigma, tau)?;
    let last = field.grid().cells();
    let node = match endpoint {
        Endpoint::A => 0,
        Endpoint::B => last,
    };
    Ok(field.integrate_time(sigma, tau, |k| field.row(k)[node]))
}

/// Snapshot index of time `t`, which must fall on the time grid up to rounding.
fn snapshot_index(field: &DensityField, t: f64) -> Result<usize, EnergyError> {
    let s = t / field.dt();
    let k = s.round();
    if (s - k).abs() > 1e-6 || k < 0.0 || k as usize >= field.len() {
        return Err(EnergyError::OffGrid { t, dt: field.dt() });
    }
    Ok(k as usize)
}

fn check_g_time(t: f64, end: f64) -> Result<(), EnergyError> {
    if !(t >= 0.0 && t <= end * (1.0 + 1e-12)) {
        return Err(EnergyError::OutsideWindow { t, end });
    }
    Ok(())
}

/// `G(t) = ∫_{α+γt}^{β−γt} (xᵀHx)(t, ζ) dζ` for `0 ≤ t ≤ (β − α)/(2γ)`,
/// evaluated at the snapshot at `t`.
pub fn g_window(field: &DensityField, t: f64, spec: &WindowSpec) -> Result<f64, EnergyError> {
    let (a, b) = field.grid().interval();
    spec.check_space(a, b)?;
    check_g_time(t, spec.g_end())?;
    let k = snapshot_index(field, t)?;
    let g = spec.gamma_space * t;
    Ok(field.integrate_space(k, spec.alpha + g, spec.beta - g))
}

/// `G̃(t) = ∫_a^{a+ε−γt} + ∫_{b−ε+γt}^b (xᵀHx)(t, ζ) dζ` for `0 ≤ t ≤ ε/γ`.
pub fn g_tilde_window(field: &DensityField, t: f64, spec: &WindowSpec) -> Result<f64, EnergyError> {
    let (a, b) = field.grid().interval();
    spec.check_space(a, b)?;
    check_g_time(t, spec.g_tilde_end())?;
    let k = snapshot_index(field, t)?;
    let reach = spec.epsilon - spec.gamma_space * t;
    Ok(field.integrate_space(k, a, a + reach) + field.integrate_space(k, b - reach, b))
}
