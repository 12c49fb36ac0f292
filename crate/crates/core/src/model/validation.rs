use nalgebra::DMatrix;
use serde::Serialize;

use super::system::{boundary_form_matrix, PHSystem};
use super::ModelError;
use crate::linalg::{asymmetry, kernel_basis, rank, skew_defect, sym_eigenvalues};

/// Default number of equispaced validation samples.
pub const DEFAULT_SAMPLES: usize = 257;

const MATRIX_TOL: f64 = 1e-12;
const PASSIVITY_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    P1Symmetric,
    P1Invertible,
    P0SkewSymmetric,
    BoundaryRank,
    BoundaryPassivity,
    HSymmetric,
    HCoercive,
}

/// Evidence attached to a failed check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub zeta: Option<f64>,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: Check,
    pub passed: bool,
    pub witness: Option<Witness>,
}

/// Boundary-form diagnostics computed during validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryDiagnostics {
    pub rank: usize,
    /// Eigenvalues of `W̃_B diag(P1⁻¹, −P1⁻¹) W̃_Bᵀ` (equivalently `W_B Σ W_Bᵀ`).
    pub passivity_eigenvalues: Vec<f64>,
    /// Largest value of the boundary power form on the unit sphere of the boundary kernel.
    pub kernel_power_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub samples: usize,
    pub boundary: BoundaryDiagnostics,
}

impl ValidationReport {
    pub fn check(&self, check: Check) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.check == check)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Equispaced grid on `[a, b]` merged with the field's critical points.
pub fn sample_grid(sys: &PHSystem, samples: usize) -> Vec<f64> {
    let (a, b) = sys.interval();
    let mut grid: Vec<f64> = (0..samples).map(|j| a + (b - a) * j as f64 / (samples - 1) as f64).collect();
    grid.extend(sys.hamiltonian().critical_points());
    grid.sort_by(|x, y| x.total_cmp(y));
    grid.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (b - a));
    grid
}

fn result(check: Check, failure: Option<Witness>) -> CheckResult {
    CheckResult { check, passed: failure.is_none(), witness: failure }
}

fn witness(zeta: Option<f64>, value: f64, detail: impl Into<String>) -> Option<Witness> {
    Some(Witness { zeta, value, detail: detail.into() })
}

/// Checks the structural assumptions on `P1`, `P0`, the boundary matrix and
/// `H` (symmetry and uniform coercivity on an equispaced sample grid).
pub fn validate_system(sys: &PHSystem, samples: usize) -> Result<ValidationReport, ModelError> {
    if samples < 2 {
        return Err(ModelError::InvalidSamples(samples));
    }
    let n = sys.n();
    let mut checks = Vec::new();

    let asym = asymmetry(sys.p1());
    checks.push(result(Check::P1Symmetric, (asym > MATRIX_TOL).then(|| Witness {
        zeta: None,
        value: asym,
        detail: "P1 − P1ᵀ ≠ 0".into(),
    })));

    let sv = sys.p1().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let invertible = smin > MATRIX_TOL * smax.max(1.0) && sys.p1_inv().is_ok();
    checks.push(result(
        Check::P1Invertible,
        if invertible { None } else { witness(None, smin, "P1 is singular (smallest singular value)") },
    ));

    let skew = skew_defect(sys.p0());
    checks.push(result(
        Check::P0SkewSymmetric,
        if skew > MATRIX_TOL { witness(None, skew, "P0 + P0ᵀ ≠ 0") } else { None },
    ));

    let w = sys.endpoint_matrix();
    let w_rank = rank(w, 1e-12);
    checks.push(result(
        Check::BoundaryRank,
        if w_rank == n { None } else { witness(None, w_rank as f64, format!("boundary matrix has rank {w_rank} < {n}")) },
    ));

    let mut diagnostics = BoundaryDiagnostics { rank: w_rank, passivity_eigenvalues: Vec::new(), kernel_power_max: None };
    if invertible {
        let p1_inv = sys.p1_inv()?;
        let mut j_inv = DMatrix::zeros(2 * n, 2 * n);
        j_inv.view_mut((0, 0), (n, n)).copy_from(p1_inv);
        j_inv.view_mut((n, n), (n, n)).copy_from(&(-p1_inv));
        let pass_mat = w * j_inv * w.transpose();
        let ev = sym_eigenvalues(&pass_mat);
        let floor = -PASSIVITY_RTOL * w.norm().powi(2).max(f64::MIN_POSITIVE);
        let lowest = ev.first().copied().unwrap_or(0.0);
        checks.push(result(
            Check::BoundaryPassivity,
            if lowest >= floor { None } else { witness(None, lowest, "W̃_B diag(P1⁻¹, −P1⁻¹) W̃_Bᵀ has a negative eigenvalue") },
        ));
        diagnostics.passivity_eigenvalues = ev;
        if w_rank == n {
            let (kernel, _) = kernel_basis(w);
            let q = kernel.transpose() * boundary_form_matrix(sys.p1()) * &kernel;
            diagnostics.kernel_power_max = sym_eigenvalues(&q).last().copied();
        }
    } else {
        checks.push(result(Check::BoundaryPassivity, witness(None, f64::NAN, "not decidable: P1 is singular")));
    }

    let grid = sample_grid(sys, samples);
    let mut worst_asym: Option<(f64, f64)> = None;
    let mut worst_coercive: Option<(f64, f64)> = None;
    let mut m = f64::INFINITY;
    let mut big_m = f64::NEG_INFINITY;
    for &z in &grid {
        let h = sys.hamiltonian().eval(z);
        let defect = asymmetry(&h);
        let scale = h.norm().max(f64::MIN_POSITIVE);
        if defect > MATRIX_TOL * scale && worst_asym.is_none_or(|(_, d)| defect > d) {
            worst_asym = Some((z, defect));
        }
        let ev = sym_eigenvalues(&h);
        let (lo, hi) = (ev[0], ev[n - 1]);
        m = m.min(lo);
        big_m = big_m.max(hi);
        if lo <= 0.0 && worst_coercive.is_none_or(|(_, e)| lo < e) {
            worst_coercive = Some((z, lo));
        }
    }
    checks.push(result(
        Check::HSymmetric,
        worst_asym.and_then(|(z, d)| witness(Some(z), d, "H(ζ) − H(ζ)ᵀ ≠ 0")),
    ));
    checks.push(result(
        Check::HCoercive,
        worst_coercive.and_then(|(z, e)| witness(Some(z), e, "λ_min(H(ζ)) ≤ 0")),
    ));

    Ok(ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
        m,
        big_m,
        samples: grid.len(),
        boundary: diagnostics,
    })
}
