use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::discretization::boundary_subspace;
use crate::energy::Endpoint;
use crate::linalg::{sym_eigen_sorted, sym_eigenvalues, symmetrize};
use crate::model::{boundary_form_matrix, PHSystem};

/// Below this the best constant `k` counts as zero.
pub const K_THRESHOLD: f64 = 1e-8;

/// Endpoint trace pair `((Hx)(b), (Hx)(a))` allowed by the boundary
/// conditions that refutes a dissipation bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceWitness {
    pub hx_b: Vec<f64>,
    pub hx_a: Vec<f64>,
    /// `(1/2)[yᵀP1y]_a^b` at the witness.
    pub dissipation: f64,
    /// `‖y(δ)‖` at the endpoint the bound controls.
    pub trace_norm: f64,
    /// `‖W̃_B (y_b; y_a)‖`.
    pub constraint_residual: f64,
}

/// Whether `(1/2)[yᵀP1y]_a^b ≤ −k ‖y(δ)‖²` holds on every admissible trace pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientVerdict {
    pub endpoint: Endpoint,
    pub holds: bool,
    /// Largest admissible `k` (zero when the bound fails).
    pub k: f64,
    pub witness: Option<TraceWitness>,
}

/// Orthonormal basis of the null space of a symmetric matrix, eigenvalues
/// below `tol` in modulus.
fn null_space(s: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (vals, vecs) = sym_eigen_sorted(s);
    let cols: Vec<DVector<f64>> =
        vals.iter().zip(vecs.column_iter()).filter(|(v, _)| v.abs() <= tol).map(|(_, c)| c.into_owned()).collect();
    if cols.is_empty() {
        DMatrix::zeros(s.nrows(), 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Largest `k ≥ 0` with `D − kB ⪰ 0` for PSD `D` (found by bisection on the
/// smallest eigenvalue).
fn best_constant(d: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> f64 {
    let feasible = |k: f64| sym_eigenvalues(&(d - b * k))[0] >= -tol;
    let mut hi = 1.0;
    while feasible(hi) && hi < 1e12 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Decides the dissipation bound at both endpoints (`b` first) by finite-dimensional
/// linear algebra on the kernel of the boundary matrix.
///
/// On the kernel, with `Q` the boundary form and `B_δ` the squared trace norm at
/// `δ`, the bound holds iff `−Q ⪰ k B_δ` for some `k > 0`. Since `−Q ⪰ 0`
/// for a passive system, this fails exactly when some kernel vector has
/// `Q = 0` but a nonzero trace at `δ`; such a vector is returned as witness,
/// preferring one whose trace at the other endpoint vanishes.
pub fn sufficient_condition_check(sys: &PHSystem) -> [SufficientVerdict; 2] {
    let n = sys.n();
    let z = boundary_subspace(sys);
    let form = boundary_form_matrix(sys.p1());
    let neg_q = symmetrize(&(-(z.transpose() * &form * &z)));
    let scale = neg_q.norm().max(1.0);
    let tol = 1e-10 * scale;
    let null_q = null_space(&neg_q, tol);

    [Endpoint::B, Endpoint::A].map(|endpoint| {
        let (mine, other) = match endpoint {
            Endpoint::B => (0, n),
            Endpoint::A => (n, 0),
        };
        let z_d = z.rows(mine, n).into_owned();
        let z_o = z.rows(other, n).into_owned();
        let b = z_d.transpose() * &z_d;
        let k = best_constant(&neg_q, &b, tol);
        if k > K_THRESHOLD {
            return SufficientVerdict { endpoint, holds: true, k, witness: None };
        }
        // search Q = 0 vectors, first those silent at the other endpoint
        let mut candidates = Vec::new();
        if null_q.ncols() > 0 {
            let zo_null = &z_o * &null_q;
            let quiet = null_space(&symmetrize(&(zo_null.transpose() * &zo_null)), 1e-20);
            if quiet.ncols() > 0 {
                candidates.push(&null_q * quiet);
            }
            candidates.push(null_q.clone());
        }
        let witness = candidates.into_iter().find_map(|basis| {
            let zb = &z_d * &basis;
            let (vals, vecs) = sym_eigen_sorted(&symmetrize(&(zb.transpose() * &zb)));
            let top = vals.len().checked_sub(1)?;
            (vals[top] > 1e-12).then(|| {
                let c = &basis * vecs.column(top);
                make_witness(sys, &form, &(&z * c), endpoint)
            })
        });
        SufficientVerdict { endpoint, holds: false, k: 0.0, witness }
    })
}

fn make_witness(sys: &PHSystem, form: &DMatrix<f64>, v: &DVector<f64>, endpoint: Endpoint) -> TraceWitness {
    let n = sys.n();
    let v = v / v.norm();
    let hx_b = v.rows(0, n).into_owned();
    let hx_a = v.rows(n, n).into_owned();
    let trace_norm = match endpoint {
        Endpoint::B => hx_b.norm(),
        Endpoint::A => hx_a.norm(),
    };
    TraceWitness {
        dissipation: v.dot(&(form * &v)),
        trace_norm,
        constraint_residual: sys.boundary_residual(&hx_a, &hx_b).norm(),
        hx_b: hx_b.iter().copied().collect(),
        hx_a: hx_a.iter().copied().collect(),
    }
}
