use serde::Serialize;

use super::StabilityError;
use crate::discretization::{bump_state, integrate, MidpointStepper, Observer, SemidiscreteOperator};
use crate::energy::Endpoint;

/// Drift allowed for the interior bump.
pub const SHORT_TIME_THRESHOLD: f64 = 1e-6;
/// Fewest cells the interior support must span.
pub const MIN_SUPPORT_CELLS: usize = 8;

/// Where the bump sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "endpoint")]
pub enum BumpPlacement {
    /// Supported in the open middle half `(a + L/4, b − L/4)`.
    Interior,
    /// Centered on an endpoint with radius `L/4`.
    Touching(Endpoint),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortTimeReport {
    pub placement: BumpPlacement,
    pub epsilon: f64,
    pub gamma: f64,
    /// `ε/γ`; the check covers `[0, ε/γ)`.
    pub t_end: f64,
    pub cells: usize,
    pub dt: f64,
    /// `max |‖x(t)‖ − ‖x₀‖| / ‖x₀‖`.
    pub max_drift: f64,
    pub drift_time: f64,
    pub threshold: f64,
    pub pass: bool,
}

struct Drift {
    norm0: f64,
    max: f64,
    at: f64,
    metric: std::sync::Arc<crate::discretization::NodeMetric>,
}

impl Observer for Drift {
    fn observe(&mut self, _k: usize, t: f64, x: &nalgebra::DVector<f64>) {
        let d = (self.metric.energy(x).sqrt() - self.norm0).abs() / self.norm0;
        if d > self.max {
            self.max = d;
            self.at = t;
        }
    }
}

/// Runs a smooth bump for times below `ε/γ` and measures how far the norm moves.
///
/// For the interior bump no energy can reach either end before `ε/γ`, so the
/// norm must stay put even with active dampers.
pub fn short_time_check(
    op: &SemidiscreteOperator,
    stepper: &MidpointStepper,
    epsilon: f64,
    gamma: f64,
    placement: BumpPlacement,
) -> Result<ShortTimeReport, StabilityError> {
    let (a, b) = op.grid().interval();
    let len = b - a;
    if !(epsilon > 0.0 && epsilon < 0.25 * len) {
        return Err(StabilityError::InvalidParameter(format!("epsilon must lie in (0, (b - a)/4), got {epsilon}")));
    }
    if !(gamma > 0.0) {
        return Err(StabilityError::InvalidParameter(format!("gamma must be positive, got {gamma}")));
    }
    let radius = 0.25 * len;
    let support_cells = (2.0 * radius / op.grid().h()).floor() as usize;
    if support_cells < MIN_SUPPORT_CELLS {
        return Err(StabilityError::Resolution { cells: op.grid().cells(), needed: MIN_SUPPORT_CELLS });
    }
    let center = match placement {
        BumpPlacement::Interior => 0.5 * (a + b),
        BumpPlacement::Touching(Endpoint::A) => a,
        BumpPlacement::Touching(Endpoint::B) => b,
    };
    let n = op.n();
    // unequal weights, so the bump is not a single characteristic family
    let weights: Vec<f64> = (1..=n).map(|i| i as f64).collect();
    let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
    let direction: Vec<f64> = weights.iter().map(|w| w / norm).collect();
    let x0 = bump_state(op, center, radius, &direction)?;
    let norm0 = op.energy(&x0).sqrt();
    let dt = stepper.dt();
    let t_end = epsilon / gamma;
    // steps with k·dt < ε/γ
    let steps = ((t_end / dt).ceil() as usize).saturating_sub(1);
    let mut drift = Drift { norm0, max: 0.0, at: 0.0, metric: op.metric().clone() };
    integrate(op, stepper, &x0, steps, &mut drift)?;
    Ok(ShortTimeReport {
        placement,
        epsilon,
        gamma,
        t_end,
        cells: op.grid().cells(),
        dt,
        max_drift: drift.max,
        drift_time: drift.at,
        threshold: SHORT_TIME_THRESHOLD,
        pass: drift.max <= SHORT_TIME_THRESHOLD,
    })
}
