use serde::Serialize;

use super::{EnergyError, EnergyHistory, Endpoint, WindowSpec};

/// Ratios behind the two-sided boundary estimates for one run, with
/// `S = σ − γ(b − a)` and `T = τ + γ(b − a)`:
/// `c = ‖x(T)‖² / ∫_S^T (xᵀHx)(t, δ) dt` and `d = ∫_σ^τ (xᵀHx)(t, δ) dt / ‖x(S)‖²`.
/// A ratio is `None` when its denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRatios {
    pub endpoint: Endpoint,
    pub c: Option<f64>,
    pub d: Option<f64>,
}

/// Smallest constants valid for every member of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleBounds {
    pub endpoint: Endpoint,
    pub c: Option<f64>,
    pub d: Option<f64>,
    pub members: usize,
    /// Window `[S, T]` of the observation integral.
    pub s: f64,
    pub t: f64,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// `length` is `b − a`.
pub fn bound_ratios(
    history: &EnergyHistory,
    spec: &WindowSpec,
    length: f64,
    endpoint: Endpoint,
) -> Result<BoundRatios, EnergyError> {
    spec.check_time(0.0, length)?;
    let (s, t) = spec.time_span(0.0, length);
    let observed = history.boundary_integral(s, t, endpoint)?;
    let inner = history.boundary_integral(spec.sigma, spec.tau, endpoint)?;
    Ok(BoundRatios {
        endpoint,
        c: ratio(history.energy_at(t)?, observed),
        d: ratio(inner, history.energy_at(s)?),
    })
}

/// Maximum of each ratio over the ensemble; `None` if any member leaves it undefined.
pub fn ensemble_bounds(
    histories: &[EnergyHistory],
    spec: &WindowSpec,
    length: f64,
    endpoint: Endpoint,
) -> Result<EnsembleBounds, EnergyError> {
    if histories.is_empty() {
        return Err(EnergyError::Empty);
    }
    let (s, t) = spec.time_span(0.0, length);
    let mut c = Some(0.0f64);
    let mut d = Some(0.0f64);
    for h in histories {
        let r = bound_ratios(h, spec, length, endpoint)?;
        c = c.zip(r.c).map(|(x, y)| x.max(y));
        d = d.zip(r.d).map(|(x, y)| x.max(y));
    }
    Ok(EnsembleBounds { endpoint, c, d, members: histories.len(), s, t })
}
