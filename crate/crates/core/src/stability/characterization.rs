use serde::{Deserialize, Serialize};

use super::{Evidence, StabilityError};
use crate::energy::{EnergyHistory, Endpoint};

/// `|r| ≤ R_TOL·E(0)` counts as no energy loss.
pub const R_TOL: f64 = 1e-9;
/// `s ≤ S_TOL·E(0)·(τ − σ)` counts as no boundary energy.
pub const S_TOL: f64 = 1e-12;

/// Observation window `[σ, τ]` and final time `T` of the boundary-energy test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterizationWindows {
    pub sigma: f64,
    pub tau: f64,
    pub t_final: f64,
}

impl CharacterizationWindows {
    /// `σ = 2γL + L/10`, `τ = σ + (2γ + 1/2)L`, `T = τ + γL` with `L = b − a`.
    pub fn auto(gamma: f64, length: f64) -> Self {
        let sigma = 2.0 * gamma * length + 0.1 * length;
        let tau = sigma + (2.0 * gamma + 0.5) * length;
        Self { sigma, tau, t_final: tau + gamma * length }
    }

    /// `0 < σ < τ ≤ T` and `τ − σ > 2γL`.
    pub fn check(&self, gamma: f64, length: f64) -> Result<(), StabilityError> {
        let Self { sigma, tau, t_final } = *self;
        if !(sigma > 0.0 && sigma < tau && tau <= t_final && t_final.is_finite()) {
            return Err(StabilityError::InvalidWindow(format!(
                "need 0 < sigma < tau <= T, got sigma = {sigma}, tau = {tau}, T = {t_final}"
            )));
        }
        if !(tau - sigma > 2.0 * gamma * length) {
            return Err(StabilityError::InvalidWindow(format!(
                "need tau - sigma > 2 gamma (b - a) = {}, got {}",
                2.0 * gamma * length,
                tau - sigma
            )));
        }
        Ok(())
    }
}

/// Energy loss `r = ‖x(T)‖² − ‖x₀‖²` and boundary energies `s_δ = ∫_σ^τ (xᵀHx)(t, δ) dt` of one member.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemberEvidence {
    pub member: u64,
    pub e0: f64,
    pub r: f64,
    pub s_a: f64,
    pub s_b: f64,
}

impl MemberEvidence {
    pub fn s(&self, endpoint: Endpoint) -> f64 {
        match endpoint {
            Endpoint::A => self.s_a,
            Endpoint::B => self.s_b,
        }
    }

    /// No measurable energy loss.
    pub fn conserves(&self) -> bool {
        self.r >= -R_TOL * self.e0
    }

    pub fn observed(&self, endpoint: Endpoint, width: f64) -> bool {
        self.s(endpoint) > S_TOL * self.e0 * width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointEvidence {
    pub endpoint: Endpoint,
    pub verdict: Evidence,
    /// `min_i (−r_i / s_i)`, absent when some `s_i` is below threshold.
    pub k: Option<f64>,
}

/// Outcome of rerunning the members without energy loss on a finer grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Refinement {
    pub cells: usize,
    pub dt: f64,
    pub members: Vec<MemberEvidence>,
    pub persists: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterizationReport {
    pub verdict: Evidence,
    pub sigma: f64,
    pub tau: f64,
    pub t_final: f64,
    pub ensemble_size: usize,
    pub seed: u64,
    pub cells: usize,
    pub dt: f64,
    pub endpoints: [EndpointEvidence; 2],
    pub members: Vec<MemberEvidence>,
    pub refinement: Option<Refinement>,
}

impl CharacterizationReport {
    pub fn endpoint(&self, endpoint: Endpoint) -> &EndpointEvidence {
        self.endpoints.iter().find(|e| e.endpoint == endpoint).expect("both endpoints present")
    }
}

pub fn member_evidence(
    member: u64,
    history: &EnergyHistory,
    windows: &CharacterizationWindows,
) -> Result<MemberEvidence, StabilityError> {
    let e0 = history.energies()[0];
    let r = history.energy_at(windows.t_final)? - e0;
    let s_a = history.boundary_integral(windows.sigma, windows.tau, Endpoint::A)?;
    let s_b = history.boundary_integral(windows.sigma, windows.tau, Endpoint::B)?;
    Ok(MemberEvidence { member, e0, r, s_a, s_b })
}

/// Empirical `k` and preliminary verdict at one endpoint. A candidate for
/// `UnstableEvidence` still has to survive refinement.
pub fn endpoint_evidence(members: &[MemberEvidence], endpoint: Endpoint, width: f64) -> EndpointEvidence {
    if members.is_empty() || members.iter().any(|m| !m.observed(endpoint, width)) {
        return EndpointEvidence { endpoint, verdict: Evidence::Inconclusive, k: None };
    }
    let k = members.iter().map(|m| -m.r / m.s(endpoint)).fold(f64::INFINITY, f64::min);
    let verdict = if members.iter().any(MemberEvidence::conserves) {
        Evidence::UnstableEvidence
    } else if k > 0.0 {
        Evidence::StableEvidence
    } else {
        Evidence::Inconclusive
    };
    EndpointEvidence { endpoint, verdict, k: Some(k) }
}

/// Combines the endpoint verdicts: stable if either endpoint is, unstable
/// only if the conserving members keep conserving under refinement.
pub fn combine(endpoints: &[EndpointEvidence; 2], refinement: Option<&Refinement>) -> Evidence {
    if endpoints.iter().any(|e| e.verdict == Evidence::StableEvidence) {
        Evidence::StableEvidence
    } else if endpoints.iter().any(|e| e.verdict == Evidence::UnstableEvidence) {
        match refinement {
            Some(r) if r.persists => Evidence::UnstableEvidence,
            _ => Evidence::Inconclusive,
        }
    } else {
        Evidence::Inconclusive
    }
}

/// Characterization evidence from stored histories, without refinement.
pub fn assess(
    histories: &[EnergyHistory],
    windows: &CharacterizationWindows,
) -> Result<(Vec<MemberEvidence>, [EndpointEvidence; 2]), StabilityError> {
    let members = histories
        .iter()
        .enumerate()
        .map(|(i, h)| member_evidence(i as u64, h, windows))
        .collect::<Result<Vec<_>, _>>()?;
    let width = windows.tau - windows.sigma;
    let endpoints = Endpoint::BOTH.map(|e| endpoint_evidence(&members, e, width));
    Ok((members, endpoints))
}
