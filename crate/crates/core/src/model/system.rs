use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{HamiltonianField, ModelError};

/// Which boundary variables a boundary matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryForm {
    /// `W_B` acting on `(e∂; f∂)`.
    EffortFlow,
    /// `W̃_B` acting on `((Hx)(b); (Hx)(a))`.
    Endpoint,
}

#[derive(Debug, Clone)]
pub struct BoundarySpec {
    pub form: BoundaryForm,
    pub matrix: DMatrix<f64>,
}

impl BoundarySpec {
    pub fn endpoint(matrix: DMatrix<f64>) -> Self {
        Self { form: BoundaryForm::Endpoint, matrix }
    }

    pub fn effort_flow(matrix: DMatrix<f64>) -> Self {
        Self { form: BoundaryForm::EffortFlow, matrix }
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// The map `(y_b; y_a) ↦ (e∂; f∂) = (1/√2)[[I, I], [P1, −P1]] (y_b; y_a)`.
pub fn trace_map(p1: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p1.nrows();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut phi = DMatrix::zeros(2 * n, 2 * n);
    let eye = DMatrix::<f64>::identity(n, n) * s;
    phi.view_mut((0, 0), (n, n)).copy_from(&eye);
    phi.view_mut((0, n), (n, n)).copy_from(&eye);
    phi.view_mut((n, 0), (n, n)).copy_from(&(p1 * s));
    phi.view_mut((n, n), (n, n)).copy_from(&(p1 * -s));
    phi
}

/// Inverse of [`trace_map`], `(1/√2)[[I, P1⁻¹], [I, −P1⁻¹]]`.
pub fn trace_map_inverse(p1_inv: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p1_inv.nrows();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    let eye = DMatrix::<f64>::identity(n, n) * s;
    out.view_mut((0, 0), (n, n)).copy_from(&eye);
    out.view_mut((n, 0), (n, n)).copy_from(&eye);
    out.view_mut((0, n), (n, n)).copy_from(&(p1_inv * s));
    out.view_mut((n, n), (n, n)).copy_from(&(p1_inv * -s));
    out
}

/// Converts an effort/flow boundary matrix into endpoint form: `W̃_B = W_B Φ`.
pub fn effort_flow_to_endpoint(w_b: &DMatrix<f64>, p1: &DMatrix<f64>) -> DMatrix<f64> {
    w_b * trace_map(p1)
}

/// Converts an endpoint boundary matrix into effort/flow form: `W_B = W̃_B Φ⁻¹`.
pub fn endpoint_to_effort_flow(w_tilde: &DMatrix<f64>, p1_inv: &DMatrix<f64>) -> DMatrix<f64> {
    w_tilde * trace_map_inverse(p1_inv)
}

/// A linear first-order port-Hamiltonian system
/// `∂x/∂t = (P1 ∂/∂ζ + P0)(H(ζ) x)` on `[a, b]` with boundary condition
/// `W̃_B ((Hx)(b); (Hx)(a)) = 0`.
///
/// Construction only checks that the pieces fit together dimensionally;
/// the structural assumptions are checked by [`super::validate_system`].
#[derive(Debug, Clone)]
pub struct PHSystem {
    n: usize,
    p1: DMatrix<f64>,
    p0: DMatrix<f64>,
    h: HamiltonianField,
    boundary: BoundarySpec,
    endpoint: DMatrix<f64>,
    p1_inv: Option<DMatrix<f64>>,
}

impl PHSystem {
    pub fn new(p1: DMatrix<f64>, p0: DMatrix<f64>, h: HamiltonianField, boundary: BoundarySpec) -> Result<Self, ModelError> {
        let n = p1.nrows();
        if n == 0 {
            return Err(ModelError::DimensionMismatch { what: "P1", expected: (1, 1), found: (0, 0) });
        }
        for (what, m, shape) in [("P1", &p1, (n, n)), ("P0", &p0, (n, n)), ("boundary matrix", &boundary.matrix, (n, 2 * n))] {
            if m.shape() != shape {
                return Err(ModelError::DimensionMismatch { what, expected: shape, found: m.shape() });
            }
        }
        if h.dimension() != n {
            return Err(ModelError::DimensionMismatch { what: "H", expected: (n, n), found: (h.dimension(), h.dimension()) });
        }
        let p1_inv = p1.clone().try_inverse();
        let endpoint = match boundary.form {
            BoundaryForm::Endpoint => boundary.matrix.clone(),
            BoundaryForm::EffortFlow => effort_flow_to_endpoint(&boundary.matrix, &p1),
        };
        Ok(Self { n, p1, p0, h, boundary, endpoint, p1_inv })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p1(&self) -> &DMatrix<f64> {
        &self.p1
    }

    pub fn p0(&self) -> &DMatrix<f64> {
        &self.p0
    }

    pub fn p1_inv(&self) -> Result<&DMatrix<f64>, ModelError> {
        self.p1_inv.as_ref().ok_or(ModelError::NotInvertible { what: "P1" })
    }

    pub fn hamiltonian(&self) -> &HamiltonianField {
        &self.h
    }

    pub fn interval(&self) -> (f64, f64) {
        self.h.interval()
    }

    pub fn length(&self) -> f64 {
        let (a, b) = self.interval();
        b - a
    }

    pub fn boundary(&self) -> &BoundarySpec {
        &self.boundary
    }

    /// Canonical boundary matrix `W̃_B` (endpoint form, `n × 2n`).
    pub fn endpoint_matrix(&self) -> &DMatrix<f64> {
        &self.endpoint
    }

    /// Boundary matrix in effort/flow form.
    pub fn effort_flow_matrix(&self) -> Result<DMatrix<f64>, ModelError> {
        match self.boundary.form {
            BoundaryForm::EffortFlow => Ok(self.boundary.matrix.clone()),
            BoundaryForm::Endpoint => Ok(endpoint_to_effort_flow(&self.endpoint, self.p1_inv()?)),
        }
    }

    /// `K(ζ) = dH/dζ + P1⁻¹ P0 H − H P0 P1⁻¹`, the field governing the spatial
    /// growth of time-windowed local energy: for solutions,
    /// `∂ζ(x*Hx) = ∂t(x*P1⁻¹x) − x*Kx`.
    pub fn k_field(&self, zeta: f64) -> Result<DMatrix<f64>, ModelError> {
        let p1_inv = self.p1_inv()?;
        let h = self.h.eval(zeta);
        Ok(self.h.derivative(zeta) + p1_inv * &self.p0 * &h - &h * &self.p0 * p1_inv)
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<(), ModelError> {
        if v.len() != self.n {
            return Err(ModelError::LengthMismatch { expected: self.n, found: v.len() });
        }
        Ok(())
    }

    /// Boundary effort and flow `(e∂, f∂)` from the endpoint values of `Hx`.
    pub fn boundary_trace(&self, hx_a: &DVector<f64>, hx_b: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>), ModelError> {
        self.check_len(hx_a)?;
        self.check_len(hx_b)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e = (hx_b + hx_a) * s;
        let f = (&self.p1 * hx_b - &self.p1 * hx_a) * s;
        Ok((e, f))
    }

    /// Instantaneous energy rate `(1/2)[(Hx)ᵀ P1 (Hx)]_a^b`.
    pub fn energy_rate(&self, hx_a: &DVector<f64>, hx_b: &DVector<f64>) -> Result<f64, ModelError> {
        self.check_len(hx_a)?;
        self.check_len(hx_b)?;
        Ok(boundary_form_value(&self.p1, hx_b, hx_a))
    }

    /// Residual `W̃_B (y_b; y_a)` of the boundary condition.
    pub fn boundary_residual(&self, hx_a: &DVector<f64>, hx_b: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        self.endpoint.columns(0, n) * hx_b + self.endpoint.columns(n, n) * hx_a
    }
}

/// `(1/2)(y_bᵀ P1 y_b − y_aᵀ P1 y_a)`.
pub fn boundary_form_value(p1: &DMatrix<f64>, y_b: &DVector<f64>, y_a: &DVector<f64>) -> f64 {
    0.5 * (y_b.dot(&(p1 * y_b)) - y_a.dot(&(p1 * y_a)))
}

/// The symmetric `2n × 2n` matrix of the boundary power form on `(y_b; y_a)`.
pub fn boundary_form_matrix(p1: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p1.nrows();
    let mut q = DMatrix::zeros(2 * n, 2 * n);
    q.view_mut((0, 0), (n, n)).copy_from(&(p1 * 0.5));
    q.view_mut((n, n), (n, n)).copy_from(&(p1 * -0.5));
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kernel_basis;
    use proptest::prelude::*;

    fn swap2() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn fixed_fixed() -> PHSystem {
        let h = HamiltonianField::constant(DMatrix::identity(2, 2), 0.0, 1.0).unwrap();
        let w = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        PHSystem::new(swap2(), DMatrix::zeros(2, 2), h, BoundarySpec::endpoint(w)).unwrap()
    }

    #[test]
    fn boundary_trace_direct_evaluation() {
        let sys = fixed_fixed();
        let (e, f) = sys.boundary_trace(&DVector::from_vec(vec![0.0, 1.0]), &DVector::from_vec(vec![1.0, 0.0])).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e - DVector::from_vec(vec![s, s])).norm() < 1e-15);
        assert!((f - DVector::from_vec(vec![-s, s])).norm() < 1e-15);
    }

    #[test]
    fn boundary_trace_zero_and_equal_ends() {
        let sys = fixed_fixed();
        let z = DVector::zeros(2);
        let (e, f) = sys.boundary_trace(&z, &z).unwrap();
        assert_eq!(e.norm() + f.norm(), 0.0);
        let v = DVector::from_vec(vec![0.3, -1.7]);
        let (_, f) = sys.boundary_trace(&v, &v).unwrap();
        assert_eq!(f.norm(), 0.0);
        assert_eq!(sys.energy_rate(&v, &v).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let sys = fixed_fixed();
        let r = sys.boundary_trace(&DVector::zeros(3), &DVector::zeros(2));
        assert!(matches!(r, Err(ModelError::LengthMismatch { expected: 2, found: 3 })));
        assert!(sys.energy_rate(&DVector::zeros(2), &DVector::zeros(1)).is_err());
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let h = HamiltonianField::constant(DMatrix::identity(3, 3), 0.0, 1.0).unwrap();
        let w = DMatrix::zeros(2, 4);
        let r = PHSystem::new(swap2(), DMatrix::zeros(2, 2), h, BoundarySpec::endpoint(w));
        assert!(matches!(r, Err(ModelError::DimensionMismatch { what: "H", .. })));
    }

    #[test]
    fn fixed_fixed_is_conservative() {
        let sys = fixed_fixed();
        // velocities vanish at both ends, forces arbitrary
        let hx_a = DVector::from_vec(vec![0.0, 2.0]);
        let hx_b = DVector::from_vec(vec![0.0, -5.0]);
        assert_eq!(sys.energy_rate(&hx_a, &hx_b).unwrap(), 0.0);
        assert_eq!(sys.boundary_residual(&hx_a, &hx_b).norm(), 0.0);
    }

    #[test]
    fn boundary_form_round_trip_preserves_kernel() {
        let p1 = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, -3.0]);
        let p1_inv = p1.clone().try_inverse().unwrap();
        let w = DMatrix::from_row_slice(2, 4, &[1.0, 0.5, 0.0, 2.0, 0.0, 1.0, -1.0, 0.3]);
        let back = effort_flow_to_endpoint(&endpoint_to_effort_flow(&w, &p1_inv), &p1);
        let (k1, _) = kernel_basis(&w);
        let (k2, _) = kernel_basis(&back);
        // equal kernels: each basis lies in the other's kernel
        assert!((&back * &k1).norm() < 1e-12);
        assert!((&w * &k2).norm() < 1e-12);
    }

    proptest! {
        #[test]
        fn boundary_trace_is_linear(
            u in prop::collection::vec(-10.0f64..10.0, 4),
            v in prop::collection::vec(-10.0f64..10.0, 4),
            alpha in -3.0f64..3.0,
            beta in -3.0f64..3.0,
        ) {
            let sys = fixed_fixed();
            let (ua, ub) = (DVector::from_row_slice(&u[..2]), DVector::from_row_slice(&u[2..]));
            let (va, vb) = (DVector::from_row_slice(&v[..2]), DVector::from_row_slice(&v[2..]));
            let (eu, fu) = sys.boundary_trace(&ua, &ub).unwrap();
            let (ev, fv) = sys.boundary_trace(&va, &vb).unwrap();
            let (e, f) = sys.boundary_trace(&(&ua * alpha + &va * beta), &(&ub * alpha + &vb * beta)).unwrap();
            prop_assert!((e - (eu * alpha + ev * beta)).norm() < 1e-12);
            prop_assert!((f - (fu * alpha + fv * beta)).norm() < 1e-12);
        }
    }
}
