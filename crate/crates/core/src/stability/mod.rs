//! Stability evidence: the algebraic dissipation test on boundary traces, the
//! boundary-energy characterization checked on seeded ensembles, decay-rate
//! fits and the short-time test showing that no decay happens before energy
//! can reach the boundary.
//!
//! Ensemble results are evidence, never proof: every verdict carries the
//! ensemble size, seed and grid it was obtained with.

mod characterization;
mod decay;
mod ensemble;
mod short_time;
mod sufficient;

use serde::Serialize;
use thiserror::Error;

use crate::discretization::{build_semidiscrete, step_count, DiscretizationError, MidpointStepper, SemidiscreteOperator};
use crate::energy::{EnergyError, EnergyHistory};
use crate::model::{ModelError, PHSystem, StructuralConstants};

pub use characterization::{
    assess, combine, endpoint_evidence, member_evidence, CharacterizationReport, CharacterizationWindows,
    EndpointEvidence, MemberEvidence, Refinement, R_TOL, S_TOL,
};
pub use decay::{fit_decay, fit_member, DecayEstimate, MemberDecay, DEFAULT_EXTINCTION_FLOOR};
pub use ensemble::{run_histories, Execution};
pub use short_time::{short_time_check, BumpPlacement, ShortTimeReport, MIN_SUPPORT_CELLS, SHORT_TIME_THRESHOLD};
pub use sufficient::{sufficient_condition_check, SufficientVerdict, TraceWitness, K_THRESHOLD};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_CELLS: usize = 256;
pub const DEFAULT_ENSEMBLE: usize = 20;
pub const DEFAULT_DECAY_MEMBERS: usize = 5;
/// Default decay horizon in units of `γ_char (b − a)`, eight traversals.
pub const DECAY_TRAVERSALS: f64 = 16.0;
pub const DEFAULT_SHORT_TIME_CELLS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    StableEvidence,
    UnstableEvidence,
    Inconclusive,
}

impl Evidence {
    /// Process exit code: 0 stable, 2 unstable, 3 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Evidence::StableEvidence => 0,
            Evidence::UnstableEvidence => 2,
            Evidence::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid with {cells} cells is too coarse, the bump support needs at least {needed} cells")]
    Resolution { cells: usize, needed: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Step `h/(2 γ_char M)`: a characteristic crosses half a cell per step.
pub fn auto_dt(h: f64, consts: &StructuralConstants) -> f64 {
    h / (2.0 * consts.gamma_char * consts.big_m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityParams {
    pub cells: usize,
    /// `None` for [`auto_dt`].
    pub dt: Option<f64>,
    pub seed: u64,
    pub ensemble: usize,
    /// Members continued to the decay horizon (the first ones of the ensemble).
    pub decay_members: usize,
    pub windows: Option<CharacterizationWindows>,
    pub decay_horizon: Option<f64>,
    pub extinction_floor: f64,
    /// `None` for `(b − a)/5`.
    pub epsilon: Option<f64>,
    pub short_time_cells: usize,
}

impl Default for StabilityParams {
    fn default() -> Self {
        Self {
            cells: DEFAULT_CELLS,
            dt: None,
            seed: 0,
            ensemble: DEFAULT_ENSEMBLE,
            decay_members: DEFAULT_DECAY_MEMBERS,
            windows: None,
            decay_horizon: None,
            extinction_floor: DEFAULT_EXTINCTION_FLOOR,
            epsilon: None,
            short_time_cells: DEFAULT_SHORT_TIME_CELLS,
        }
    }
}

impl StabilityParams {
    pub fn windows_for(&self, sys: &PHSystem, consts: &StructuralConstants) -> Result<CharacterizationWindows, StabilityError> {
        let len = sys.length();
        let w = self.windows.unwrap_or_else(|| CharacterizationWindows::auto(consts.gamma_char, len));
        w.check(consts.gamma_char, len)?;
        Ok(w)
    }

    pub fn decay_horizon_for(&self, sys: &PHSystem, consts: &StructuralConstants) -> Result<f64, StabilityError> {
        let h = self.decay_horizon.unwrap_or(DECAY_TRAVERSALS * consts.gamma_char * sys.length());
        if !(h > 0.0 && h.is_finite()) {
            return Err(StabilityError::InvalidParameter(format!("decay horizon must be positive, got {h}")));
        }
        Ok(h)
    }

    pub fn epsilon_for(&self, sys: &PHSystem) -> f64 {
        self.epsilon.unwrap_or(0.2 * sys.length())
    }

    fn check(&self) -> Result<(), StabilityError> {
        if self.ensemble == 0 {
            return Err(StabilityError::InvalidParameter("ensemble must have at least one member".into()));
        }
        if !(self.extinction_floor > 0.0 && self.extinction_floor < 1.0) {
            return Err(StabilityError::InvalidParameter("extinction floor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Operator and stepper at `cells`, with `dt` or the automatic step.
pub fn prepare(
    sys: &PHSystem,
    consts: &StructuralConstants,
    cells: usize,
    dt: Option<f64>,
) -> Result<(SemidiscreteOperator, MidpointStepper), StabilityError> {
    let op = build_semidiscrete(sys, cells)?;
    let dt = dt.unwrap_or_else(|| auto_dt(op.grid().h(), consts));
    let stepper = MidpointStepper::new(&op, dt)?;
    Ok((op, stepper))
}

#[allow(clippy::too_many_arguments)]
fn refine(
    sys: &PHSystem,
    consts: &StructuralConstants,
    cells: usize,
    dt: f64,
    seed: u64,
    members: &[u64],
    windows: &CharacterizationWindows,
    exec: Execution,
) -> Result<Refinement, StabilityError> {
    let (op, stepper) = prepare(sys, consts, 2 * cells, Some(0.5 * dt))?;
    let steps = step_count(windows.t_final, stepper.dt());
    let runs: Vec<(u64, usize)> = members.iter().map(|&m| (m, steps)).collect();
    let histories = run_histories(&op, &stepper, seed, &runs, exec)?;
    let evidence = members
        .iter()
        .zip(&histories)
        .map(|(&m, h)| member_evidence(m, h, windows))
        .collect::<Result<Vec<_>, _>>()?;
    let width = windows.tau - windows.sigma;
    let persists = evidence
        .iter()
        .all(|m| m.conserves() && (m.observed(crate::energy::Endpoint::A, width) || m.observed(crate::energy::Endpoint::B, width)));
    Ok(Refinement { cells: 2 * cells, dt: stepper.dt(), members: evidence, persists })
}

/// Characterization evidence from stored histories, refining on a twice finer
/// grid when some member shows no energy loss.
#[allow(clippy::too_many_arguments)]
pub fn characterize_histories(
    sys: &PHSystem,
    consts: &StructuralConstants,
    histories: &[EnergyHistory],
    windows: &CharacterizationWindows,
    seed: u64,
    cells: usize,
    dt: f64,
    exec: Execution,
) -> Result<CharacterizationReport, StabilityError> {
    let (members, endpoints) = assess(histories, windows)?;
    let needs_refinement = endpoints.iter().all(|e| e.verdict != Evidence::StableEvidence)
        && endpoints.iter().any(|e| e.verdict == Evidence::UnstableEvidence);
    let refinement = if needs_refinement {
        let conserving: Vec<u64> = members.iter().filter(|m| m.conserves()).map(|m| m.member).collect();
        Some(refine(sys, consts, cells, dt, seed, &conserving, windows, exec)?)
    } else {
        None
    };
    Ok(CharacterizationReport {
        verdict: combine(&endpoints, refinement.as_ref()),
        sigma: windows.sigma,
        tau: windows.tau,
        t_final: windows.t_final,
        ensemble_size: histories.len(),
        seed,
        cells,
        dt,
        endpoints,
        members,
        refinement,
    })
}

/// Checks `‖x(T)‖² − ‖x₀‖² ≤ −k ∫_σ^τ (xᵀHx)(t, δ) dt` on a seeded ensemble
/// and reports the empirical `k` at both endpoints.
pub fn characterization_check(
    sys: &PHSystem,
    consts: &StructuralConstants,
    params: &StabilityParams,
    exec: Execution,
) -> Result<CharacterizationReport, StabilityError> {
    params.check()?;
    let windows = params.windows_for(sys, consts)?;
    let (op, stepper) = prepare(sys, consts, params.cells, params.dt)?;
    let steps = step_count(windows.t_final, stepper.dt());
    let runs: Vec<(u64, usize)> = (0..params.ensemble as u64).map(|m| (m, steps)).collect();
    let histories = run_histories(&op, &stepper, params.seed, &runs, exec)?;
    characterize_histories(sys, consts, &histories, &windows, params.seed, params.cells, stepper.dt(), exec)
}

/// Fits decay rates of the first `decay_members` ensemble members over the decay horizon.
pub fn decay_rate(
    sys: &PHSystem,
    consts: &StructuralConstants,
    params: &StabilityParams,
    exec: Execution,
) -> Result<DecayEstimate, StabilityError> {
    params.check()?;
    let horizon = params.decay_horizon_for(sys, consts)?;
    let (op, stepper) = prepare(sys, consts, params.cells, params.dt)?;
    let steps = step_count(horizon, stepper.dt());
    let runs: Vec<(u64, usize)> = (0..params.decay_members.max(1) as u64).map(|m| (m, steps)).collect();
    let histories = run_histories(&op, &stepper, params.seed, &runs, exec)?;
    Ok(fit_decay(&histories, params.extinction_floor))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSummary {
    pub label: Option<String>,
    pub n: usize,
    pub interval: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub schema_version: u32,
    pub system: SystemSummary,
    pub constants: StructuralConstants,
    pub verdict: Evidence,
    pub sufficient: [SufficientVerdict; 2],
    pub characterization: CharacterizationReport,
    pub decay: DecayEstimate,
    pub short_time: ShortTimeReport,
}

impl StabilityReport {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }
}

/// Full pipeline. One ensemble run serves both the characterization (all
/// members up to `T`) and the decay fit (the first members continued to the
/// decay horizon).
pub fn stability_report(
    sys: &PHSystem,
    consts: &StructuralConstants,
    params: &StabilityParams,
    label: Option<String>,
    exec: Execution,
) -> Result<StabilityReport, StabilityError> {
    params.check()?;
    let windows = params.windows_for(sys, consts)?;
    let horizon = params.decay_horizon_for(sys, consts)?;
    let (op, stepper) = prepare(sys, consts, params.cells, params.dt)?;
    let dt = stepper.dt();
    let char_steps = step_count(windows.t_final, dt);
    let decay_steps = step_count(horizon, dt).max(char_steps);
    let decay_members = params.decay_members.clamp(1, params.ensemble);
    let runs: Vec<(u64, usize)> = (0..params.ensemble as u64)
        .map(|m| (m, if (m as usize) < decay_members { decay_steps } else { char_steps }))
        .collect();
    let histories = run_histories(&op, &stepper, params.seed, &runs, exec)?;
    let characterization = characterize_histories(sys, consts, &histories, &windows, params.seed, params.cells, dt, exec)?;
    let decay_histories: Vec<EnergyHistory> =
        histories[..decay_members].iter().map(|h| h.truncated(step_count(horizon, dt) + 1)).collect();
    let decay = fit_decay(&decay_histories, params.extinction_floor);

    let (short_op, short_stepper) = prepare(sys, consts, params.cells.max(params.short_time_cells), None)?;
    let short_time =
        short_time_check(&short_op, &short_stepper, params.epsilon_for(sys), consts.gamma_flux, BumpPlacement::Interior)?;

    let (a, b) = sys.interval();
    Ok(StabilityReport {
        schema_version: SCHEMA_VERSION,
        system: SystemSummary { label, n: sys.n(), interval: [a, b] },
        constants: consts.clone(),
        verdict: characterization.verdict,
        sufficient: sufficient_condition_check(sys),
        characterization,
        decay,
        short_time,
    })
}
