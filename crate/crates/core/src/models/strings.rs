use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ModelsError, StringParams};
use crate::model::{BoundarySpec, HamiltonianField, MatrixFn, PHSystem};

/// Which endpoint of `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    A,
    B,
}

/// Condition at one end of a single string.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndCondition {
    /// `v = 0`.
    Fixed,
    /// `F = 0`.
    Free,
    /// `F = −σ v`.
    Damper(f64),
}

/// Damper coefficient that absorbs incident waves completely:
/// `σ = √(T/ρ)` with the velocity variable `v = x_1`.
pub fn matched_damping(rho: f64, tension: f64) -> f64 {
    (tension / rho).sqrt()
}

/// Endpoint constraints of a string network, written in terms of velocities
/// `v_j(δ) = x_{2j+1}(δ)` and forces `F_j(b) = T_j(b) x_{2j+2}(b)`,
/// `F_j(a) = −T_j(a) x_{2j+2}(a)`, and stored as rows acting on
/// `((Hx)(b); (Hx)(a))` where `(Hx)_{2j+1} = v_j/ρ_j` and `(Hx)_{2j+2} = T_j x_{2j+2}`.
struct Rows<'a> {
    strings: &'a [StringParams],
    a: f64,
    b: f64,
    rows: Vec<DVector<f64>>,
}

#[derive(Clone, Copy)]
enum Var {
    V(usize, End),
    F(usize, End),
}

impl<'a> Rows<'a> {
    fn new(strings: &'a [StringParams], a: f64, b: f64) -> Self {
        Self { strings, a, b, rows: Vec::new() }
    }

    fn column(&self, var: Var) -> (usize, f64) {
        let n = 2 * self.strings.len();
        let (j, end, comp) = match var {
            Var::V(j, e) => (j, e, 0),
            Var::F(j, e) => (j, e, 1),
        };
        let offset = match end {
            End::B => 0,
            End::A => n,
        };
        let zeta = match end {
            End::A => self.a,
            End::B => self.b,
        };
        let scale = match (var, end) {
            (Var::V(..), _) => self.strings[j].rho_at(self.a, zeta),
            (Var::F(..), End::B) => 1.0,
            (Var::F(..), End::A) => -1.0,
        };
        (offset + 2 * j + comp, scale)
    }

    /// Adds the constraint `Σ coef · var = 0`.
    fn push(&mut self, terms: &[(f64, Var)]) {
        let mut row = DVector::zeros(4 * self.strings.len());
        for &(coef, var) in terms {
            let (col, scale) = self.column(var);
            row[col] += coef * scale;
        }
        self.rows.push(row);
    }

    fn matrix(&self) -> DMatrix<f64> {
        let n = 2 * self.strings.len();
        DMatrix::from_fn(self.rows.len(), 2 * n, |r, c| self.rows[r][c])
    }
}

fn hamiltonian(strings: &[StringParams], a: f64, b: f64) -> Result<HamiltonianField, ModelsError> {
    let n = 2 * strings.len();
    let constants: Option<Vec<(f64, f64)>> =
        strings.iter().map(|s| Some((s.rho.as_constant()?, s.tension.as_constant()?))).collect();
    if let Some(c) = constants {
        let diag = DVector::from_iterator(n, c.iter().flat_map(|&(rho, t)| [1.0 / rho, t]));
        return Ok(HamiltonianField::constant(DMatrix::from_diagonal(&diag), a, b)?);
    }
    let s1 = strings.to_vec();
    let value: MatrixFn = Arc::new(move |z| {
        DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            s1.iter().flat_map(|s| [1.0 / s.rho_at(a, z), s.tension_at(a, z)]),
        ))
    });
    let s2 = strings.to_vec();
    let derivative: MatrixFn = Arc::new(move |z| {
        DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            s2.iter().flat_map(|s| {
                let r = s.rho_at(a, z);
                [-s.rho.derivative(a, z) / (r * r), s.tension.derivative(a, z)]
            }),
        ))
    });
    Ok(HamiltonianField::callable(n, a, b, value, Some(derivative))?)
}

fn network(strings: &[StringParams], a: f64, b: f64, rows: DMatrix<f64>) -> Result<PHSystem, ModelsError> {
    let n = 2 * strings.len();
    let mut p1 = DMatrix::zeros(n, n);
    for j in 0..strings.len() {
        p1[(2 * j, 2 * j + 1)] = 1.0;
        p1[(2 * j + 1, 2 * j)] = 1.0;
    }
    Ok(PHSystem::new(p1, DMatrix::zeros(n, n), hamiltonian(strings, a, b)?, BoundarySpec::endpoint(rows))?)
}

fn check_interval(a: f64, b: f64) -> Result<(), ModelsError> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(ModelsError::Model(crate::model::ModelError::InvalidInterval { a, b }))
    }
}

fn check_damping(what: &'static str, sigma: f64) -> Result<(), ModelsError> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(ModelsError::NonPositive { what, at: f64::NAN, value: sigma })
    }
}

/// Velocity continuity with force balance is lossless only when the joined
/// strings have the same density at the junction.
fn check_junction(strings: &[StringParams], a: f64, joined: &[(usize, f64)]) -> Result<(), ModelsError> {
    let (j0, z0) = joined[0];
    let r0 = strings[j0].rho_at(a, z0);
    for &(j, z) in &joined[1..] {
        let r = strings[j].rho_at(a, z);
        if (r - r0).abs() > 1e-12 * r0.max(r) {
            return Err(ModelsError::DensityMismatch { at: z, first: r0, second: r });
        }
    }
    Ok(())
}

fn end_rows(rows: &mut Rows<'_>, j: usize, end: End, cond: EndCondition) {
    match cond {
        EndCondition::Fixed => rows.push(&[(1.0, Var::V(j, end))]),
        EndCondition::Free => rows.push(&[(1.0, Var::F(j, end))]),
        EndCondition::Damper(sigma) => rows.push(&[(1.0, Var::F(j, end)), (sigma, Var::V(j, end))]),
    }
}

/// One string `∂t x = [[0,1],[1,0]] ∂ζ(diag(1/ρ, T) x)` with the given end conditions.
pub fn single_string(
    p: &StringParams,
    a: f64,
    b: f64,
    left: EndCondition,
    right: EndCondition,
) -> Result<PHSystem, ModelsError> {
    check_interval(a, b)?;
    p.check(a, b)?;
    for c in [left, right] {
        if let EndCondition::Damper(s) = c {
            check_damping("sigma", s)?;
        }
    }
    let strings = std::slice::from_ref(p);
    let mut rows = Rows::new(strings, a, b);
    end_rows(&mut rows, 0, End::A, left);
    end_rows(&mut rows, 0, End::B, right);
    network(strings, a, b, rows.matrix())
}

/// String fixed at `fixed_end` with a damper `F = −σ v` at the other end.
pub fn single_damped_string(p: &StringParams, a: f64, b: f64, fixed_end: End, sigma: f64) -> Result<PHSystem, ModelsError> {
    match fixed_end {
        End::A => single_string(p, a, b, EndCondition::Fixed, EndCondition::Damper(sigma)),
        End::B => single_string(p, a, b, EndCondition::Damper(sigma), EndCondition::Fixed),
    }
}

/// Conservative string with `v = 0` at both ends.
pub fn fixed_fixed_string(p: &StringParams, a: f64, b: f64) -> Result<PHSystem, ModelsError> {
    single_string(p, a, b, EndCondition::Fixed, EndCondition::Fixed)
}

/// Two strings joined at `b` by a massless bar; string I fixed at `a`,
/// string II damped at `a`:
/// `v_I(a) = 0`, `v_I(b) = v_II(b)`, `F_I(b) + F_II(b) = 0`, `F_II(a) = −σ v_II(a)`.
pub fn two_string_network(p1: &StringParams, p2: &StringParams, a: f64, b: f64, sigma: f64) -> Result<PHSystem, ModelsError> {
    check_interval(a, b)?;
    p1.check(a, b)?;
    p2.check(a, b)?;
    check_damping("sigma", sigma)?;
    let strings = [p1.clone(), p2.clone()];
    check_junction(&strings, a, &[(0, b), (1, b)])?;
    let mut rows = Rows::new(&strings, a, b);
    rows.push(&[(1.0, Var::V(0, End::A))]);
    rows.push(&[(1.0, Var::V(0, End::B)), (-1.0, Var::V(1, End::B))]);
    rows.push(&[(1.0, Var::F(0, End::B)), (1.0, Var::F(1, End::B))]);
    rows.push(&[(1.0, Var::F(1, End::A)), (sigma, Var::V(1, End::A))]);
    network(&strings, a, b, rows.matrix())
}

/// `S` with `x_I(b) = S x_II(b)` on the domain of the two-string network.
pub fn two_string_coupling(p1: &StringParams, p2: &StringParams, a: f64, b: f64) -> DMatrix<f64> {
    let ratio = p2.tension_at(a, b) / p1.tension_at(a, b);
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -ratio])
}

/// Four strings: I fixed at `a` and joined to II at `b`; II joined at `a` to
/// the `b` ends of III and IV, whose `a` ends carry dampers.
pub fn four_string_network(
    strings: &[StringParams; 4],
    a: f64,
    b: f64,
    sigma3: f64,
    sigma4: f64,
) -> Result<PHSystem, ModelsError> {
    check_interval(a, b)?;
    for s in strings {
        s.check(a, b)?;
    }
    check_damping("sigma_III", sigma3)?;
    check_damping("sigma_IV", sigma4)?;
    check_junction(strings, a, &[(0, b), (1, b)])?;
    check_junction(strings, a, &[(1, a), (2, b), (3, b)])?;
    let mut rows = Rows::new(strings, a, b);
    rows.push(&[(1.0, Var::V(0, End::A))]);
    rows.push(&[(1.0, Var::V(0, End::B)), (-1.0, Var::V(1, End::B))]);
    rows.push(&[(1.0, Var::V(2, End::B)), (-1.0, Var::V(1, End::A))]);
    rows.push(&[(1.0, Var::V(3, End::B)), (-1.0, Var::V(1, End::A))]);
    rows.push(&[(1.0, Var::F(0, End::B)), (1.0, Var::F(1, End::B))]);
    rows.push(&[(1.0, Var::F(1, End::A)), (1.0, Var::F(2, End::B)), (1.0, Var::F(3, End::B))]);
    rows.push(&[(1.0, Var::F(2, End::A)), (sigma3, Var::V(2, End::A))]);
    rows.push(&[(1.0, Var::F(3, End::A)), (sigma4, Var::V(3, End::A))]);
    network(strings, a, b, rows.matrix())
}

/// `R ∈ ℝ^{2×4}` with `x_II(a) = R (x_III(b); x_IV(b))` on the domain of the
/// four-string network.
pub fn four_string_coupling(strings: &[StringParams; 4], a: f64, b: f64) -> DMatrix<f64> {
    let t2 = strings[1].tension_at(a, a);
    DMatrix::from_row_slice(
        2,
        4,
        &[1.0, 0.0, 0.0, 0.0, 0.0, strings[2].tension_at(a, b) / t2, 0.0, strings[3].tension_at(a, b) / t2],
    )
}
