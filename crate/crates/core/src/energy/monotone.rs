use serde::Serialize;

use super::{f_window, g_tilde_window, g_window, DensityField, EnergyError, WindowSpec};

/// Default constant in the tolerance `C·(h + dt)·E(0)`.
pub const DEFAULT_TOLERANCE_CONSTANT: f64 = 10.0;

/// Direction a quantity is required to move in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub functional: String,
    pub direction: Direction,
    pub samples: Vec<f64>,
    pub values: Vec<f64>,
    /// Most negative increment of the quantity along the required direction,
    /// or zero when there is none.
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl MonotonicityReport {
    pub fn new(functional: &str, direction: Direction, samples: Vec<f64>, values: Vec<f64>, tolerance: f64) -> Self {
        let sign = match direction {
            Direction::Nondecreasing => 1.0,
            Direction::Nonincreasing => -1.0,
        };
        let max_violation = values.windows(2).map(|w| sign * (w[1] - w[0])).fold(0.0, f64::min);
        Self {
            functional: functional.to_string(),
            direction,
            samples,
            values,
            max_violation,
            tolerance,
            pass: max_violation >= -tolerance,
        }
    }
}

/// `C·(h + dt)·E(0)`.
pub fn monotonicity_tolerance(field: &DensityField, constant: f64) -> Result<f64, EnergyError> {
    Ok(constant * (field.grid().h() + field.dt()) * field.energy(0)?)
}

/// Checks `e^{κζ}F(ζ)` nondecreasing and `e^{−κ̃ζ}F̃(ζ)` nonincreasing at every
/// node. `kappa_reflected` bounds `−K ≤ κ̃H`, the growth constant of the
/// reflected problem behind `F̃`.
pub fn check_f_monotone(
    field: &DensityField,
    spec: &WindowSpec,
    kappa: f64,
    kappa_reflected: f64,
    tolerance: f64,
) -> Result<[MonotonicityReport; 2], EnergyError> {
    let zetas: Vec<f64> = field.grid().nodes().collect();
    let mut f = Vec::with_capacity(zetas.len());
    let mut ft = Vec::with_capacity(zetas.len());
    for &z in &zetas {
        f.push((kappa * z).exp() * f_window(field, z, spec, false)?);
        ft.push((-kappa_reflected * z).exp() * f_window(field, z, spec, true)?);
    }
    Ok([
        MonotonicityReport::new("exp(kappa zeta) F", Direction::Nondecreasing, zetas.clone(), f, tolerance),
        MonotonicityReport::new("exp(-kappa zeta) Ftilde", Direction::Nonincreasing, zetas, ft, tolerance),
    ])
}

/// Snapshot times in `[0, end]`.
pub(crate) fn times_up_to(field: &DensityField, end: f64) -> Vec<f64> {
    let last = ((end / field.dt()) * (1.0 + 1e-12)).floor() as usize;
    (0..=last.min(field.len() - 1)).map(|k| field.time(k)).collect()
}

/// Checks `G` and `G̃` nonincreasing at every snapshot of their admissible ranges.
pub fn check_g_monotone(field: &DensityField, spec: &WindowSpec, tolerance: f64) -> Result<[MonotonicityReport; 2], EnergyError> {
    let tg = times_up_to(field, spec.g_end());
    let tgt = times_up_to(field, spec.g_tilde_end());
    let g = tg.iter().map(|&t| g_window(field, t, spec)).collect::<Result<Vec<_>, _>>()?;
    let gt = tgt.iter().map(|&t| g_tilde_window(field, t, spec)).collect::<Result<Vec<_>, _>>()?;
    Ok([
        MonotonicityReport::new("G", Direction::Nonincreasing, tg, g, tolerance),
        MonotonicityReport::new("Gtilde", Direction::Nonincreasing, tgt, gt, tolerance),
    ])
}
