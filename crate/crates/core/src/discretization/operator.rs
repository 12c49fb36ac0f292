use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{DiscretizationError, Grid};
use crate::linalg::{kernel_basis, SparseRows};
use crate::model::PHSystem;

pub const MIN_CELLS: usize = 8;

/// Nodal values of `H` on a grid; everything needed to measure energy of a
/// discrete state laid out node-major (`x[i·n + k]`).
#[derive(Debug, Clone)]
pub struct NodeMetric {
    grid: Grid,
    n: usize,
    h_nodes: Vec<DMatrix<f64>>,
}

impl NodeMetric {
    pub fn new(sys: &PHSystem, grid: Grid) -> Self {
        let h_nodes = grid.nodes().map(|z| sys.hamiltonian().eval(z)).collect();
        Self { grid, n: sys.n(), h_nodes }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.n * self.grid.nodes_len()
    }

    pub fn h_node(&self, i: usize) -> &DMatrix<f64> {
        &self.h_nodes[i]
    }

    pub fn node_state<'a>(&self, x: &'a DVector<f64>, i: usize) -> nalgebra::DVectorView<'a, f64> {
        x.rows(i * self.n, self.n)
    }

    /// `(Hx)(ζ_i)`.
    pub fn effort(&self, x: &DVector<f64>, i: usize) -> DVector<f64> {
        &self.h_nodes[i] * self.node_state(x, i)
    }

    /// Pointwise energy density `x(ζ_i)ᵀ H(ζ_i) x(ζ_i)` (no factor one half).
    pub fn density(&self, x: &DVector<f64>, i: usize) -> f64 {
        let xi = self.node_state(x, i);
        xi.dot(&(&self.h_nodes[i] * xi))
    }

    /// Trapezoid approximation of `‖x‖²_X = (1/2)∫ xᵀHx dζ`.
    pub fn energy(&self, x: &DVector<f64>) -> f64 {
        (0..self.grid.nodes_len()).map(|i| 0.5 * self.grid.weight(i) * self.density(x, i)).sum()
    }
}

/// Semidiscrete generator `A_h = (D ⊗ P1 + I ⊗ P0)·blkdiag(H(ζ_i))` on the
/// grid, with the endpoint constraint `W̃_B (y_N; y_0) = 0` imposed by an
/// orthogonal projection in the energy inner product.
///
/// `D` is the summation-by-parts first-derivative operator with central
/// interior rows and one-sided boundary rows, paired with trapezoid weights.
/// With that pairing `d/dt ‖x‖² = (1/2)[yᵀP1y]_0^N` holds exactly for the
/// discrete flow, so the projected generator is dissipative whenever the
/// boundary matrix is passive.
#[derive(Debug, Clone)]
pub struct SemidiscreteOperator {
    system: PHSystem,
    metric: Arc<NodeMetric>,
    a_op: SparseRows,
    w_b: DMatrix<f64>,
    w_a: DMatrix<f64>,
    schur_inv: DMatrix<f64>,
    projected: SparseRows,
    rank_margin: f64,
}

impl SemidiscreteOperator {
    pub fn system(&self) -> &PHSystem {
        &self.system
    }

    pub fn metric(&self) -> &Arc<NodeMetric> {
        &self.metric
    }

    pub fn grid(&self) -> &Grid {
        self.metric.grid()
    }

    pub fn n(&self) -> usize {
        self.metric.n()
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    /// Ratio of smallest to largest singular value of `W̃_B`.
    pub fn rank_margin(&self) -> f64 {
        self.rank_margin
    }

    fn last(&self) -> usize {
        self.grid().cells()
    }

    /// Unconstrained action `A_h x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a_op.mul_vec(x)
    }

    /// Projected action `Π A_h x`.
    pub fn apply_projected(&self, x: &DVector<f64>) -> DVector<f64> {
        self.projected.mul_vec(x)
    }

    pub fn projected_sparse(&self) -> &SparseRows {
        &self.projected
    }

    /// Constraint residual `W̃ (Hx)(b) + W̃ (Hx)(a)` with orthonormalized rows.
    pub fn constraint_residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.w_b * self.metric.effort(x, self.last()) + &self.w_a * self.metric.effort(x, 0)
    }

    /// Residual of the boundary condition in the user's scaling.
    pub fn boundary_residual(&self, x: &DVector<f64>) -> DVector<f64> {
        self.system.boundary_residual(&self.metric.effort(x, 0), &self.metric.effort(x, self.last()))
    }

    /// Orthogonal projection onto the constraint range in the energy inner product.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = x.clone();
        self.project_in_place(&mut out);
        out
    }

    pub fn project_in_place(&self, x: &mut DVector<f64>) {
        let n = self.n();
        let last = self.last();
        let lam = &self.schur_inv * self.constraint_residual(x);
        let corr_a = self.w_a.transpose() * &lam * (2.0 / self.grid().weight(0));
        let corr_b = self.w_b.transpose() * &lam * (2.0 / self.grid().weight(last));
        for k in 0..n {
            x[k] -= corr_a[k];
            x[last * n + k] -= corr_b[k];
        }
    }

    /// Discrete energy `‖x‖²_X`.
    pub fn energy(&self, x: &DVector<f64>) -> f64 {
        self.metric.energy(x)
    }

    /// `⟨A_h x, x⟩ + ⟨x, A_h x⟩` in the discrete energy inner product.
    pub fn dissipation(&self, x: &DVector<f64>) -> f64 {
        self.energy_product(&self.apply(x), x) * 2.0
    }

    /// Discrete energy inner product `Σ (w_i/2) u_iᵀ H_i v_i`.
    pub fn energy_product(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let m = &self.metric;
        (0..self.grid().nodes_len())
            .map(|i| 0.5 * self.grid().weight(i) * m.node_state(u, i).dot(&(m.h_node(i) * m.node_state(v, i))))
            .sum()
    }

    /// `energy_rate` of the continuous system evaluated at the discrete traces.
    pub fn trace_energy_rate(&self, x: &DVector<f64>) -> f64 {
        self.system
            .energy_rate(&self.metric.effort(x, 0), &self.metric.effort(x, self.last()))
            .expect("trace lengths match n")
    }

    /// Orthonormal basis (Euclidean) of `{(x_N, x_0) : W̃ (H_N x_N; H_0 x_0) = 0}`.
    fn endpoint_kernel(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut block = DMatrix::zeros(n, 2 * n);
        block.columns_mut(0, n).copy_from(&(&self.w_b * self.metric.h_node(self.last())));
        block.columns_mut(n, n).copy_from(&(&self.w_a * self.metric.h_node(0)));
        kernel_basis(&block).0
    }

    /// Dense `D × (D − n)` matrix whose columns span the constraint range:
    /// unit vectors for interior unknowns and the endpoint kernel for `(x_N, x_0)`.
    pub fn constraint_basis(&self) -> DMatrix<f64> {
        let n = self.n();
        let d = self.dim();
        let last = self.last();
        let interior = n * (last - 1);
        let mut z = DMatrix::zeros(d, d - n);
        for c in 0..interior {
            z[(n + c, c)] = 1.0;
        }
        let k = self.endpoint_kernel();
        for c in 0..n {
            for r in 0..n {
                z[(last * n + r, interior + c)] = k[(r, c)];
                z[(r, interior + c)] = k[(n + r, c)];
            }
        }
        z
    }

    /// Block-diagonal energy Gram matrix `M = blkdiag((w_i/2) H_i)`.
    pub fn mass_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..self.grid().nodes_len() {
            let block = self.metric.h_node(i) * (0.5 * self.grid().weight(i));
            m.view_mut((i * n, i * n), (n, n)).copy_from(&block);
        }
        m
    }

    /// Matrix of the projected generator restricted to the constraint range,
    /// in the coordinates of [`Self::constraint_basis`]. Dense; meant for
    /// eigenvalue diagnostics on small grids.
    pub fn restricted_generator(&self) -> DMatrix<f64> {
        let z = self.constraint_basis();
        let m = self.mass_matrix();
        let mz = &m * &z;
        let gram = z.transpose() * &mz;
        let az = self.a_op.to_dense() * &z;
        let rhs = mz.transpose() * az;
        gram.lu().solve(&rhs).expect("Gram matrix of a basis is invertible")
    }
}

/// Orthonormal basis of `{(z_b, z_a) ∈ ℝ²ⁿ : W̃_B (z_b; z_a) = 0}` as the
/// columns of a `2n × n` matrix.
pub fn boundary_subspace(sys: &PHSystem) -> DMatrix<f64> {
    kernel_basis(sys.endpoint_matrix()).0
}

pub fn build_semidiscrete(sys: &PHSystem, cells: usize) -> Result<SemidiscreteOperator, DiscretizationError> {
    if cells < MIN_CELLS {
        return Err(DiscretizationError::TooFewCells { cells, min: MIN_CELLS });
    }
    let (a, b) = sys.interval();
    let grid = Grid::new(a, b, cells)?;
    let metric = Arc::new(NodeMetric::new(sys, grid.clone()));
    let n = sys.n();
    let last = cells;
    let d = n * (cells + 1);
    let h = grid.h();

    // derivative stencil: (row node, column node, coefficient)
    let mut stencil = vec![(0, 0, -1.0 / h), (0, 1, 1.0 / h), (last, last - 1, -1.0 / h), (last, last, 1.0 / h)];
    for i in 1..last {
        stencil.push((i, i - 1, -0.5 / h));
        stencil.push((i, i + 1, 0.5 / h));
    }
    let p1 = sys.p1();
    let p0 = sys.p0();
    let mut triplets = Vec::new();
    let mut push_block = |ti: usize, tj: usize, block: &DMatrix<f64>| {
        for r in 0..n {
            for c in 0..n {
                let v = block[(r, c)];
                if v != 0.0 {
                    triplets.push((ti * n + r, tj * n + c, v));
                }
            }
        }
    };
    for &(i, j, coef) in &stencil {
        push_block(i, j, &(p1 * metric.h_node(j) * coef));
    }
    for i in 0..=last {
        push_block(i, i, &(p0 * metric.h_node(i)));
    }
    let a_op = SparseRows::from_triplets(d, d, triplets);

    // orthonormalize the constraint rows; the kernel is unchanged
    let svd = sys.endpoint_matrix().clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let s_max = svd.singular_values.max();
    let s_min = svd.singular_values.min();
    if !(s_min > 1e-10 * s_max.max(f64::MIN_POSITIVE)) || svd.singular_values.len() < n {
        return Err(DiscretizationError::RankDeficient { margin: s_min });
    }
    let w_b = v_t.columns(0, n).into_owned();
    let w_a = v_t.columns(n, n).into_owned();

    // Schur complement S = L M⁻¹ Lᵀ of the constraint L x = W̃_b H_N x_N + W̃_a H_0 x_0
    let schur = &w_b * metric.h_node(last) * w_b.transpose() * (2.0 / grid.weight(last))
        + &w_a * metric.h_node(0) * w_a.transpose() * (2.0 / grid.weight(0));
    let schur_inv = schur.try_inverse().ok_or(DiscretizationError::RankDeficient { margin: 0.0 })?;
    let rank_margin = s_min / s_max;

    // Π A = A − M⁻¹Lᵀ S⁻¹ (L A); L A only touches rows of A at the two end nodes.
    let mut la = DMatrix::zeros(n, d);
    for (node, w) in [(0, &w_a), (last, &w_b)] {
        let wh = w * metric.h_node(node);
        for r in 0..n {
            for &(j, v) in a_op.row(node * n + r) {
                for q in 0..n {
                    la[(q, j)] += wh[(q, r)] * v;
                }
            }
        }
    }
    let lam = &schur_inv * la;
    let mut triplets: Vec<(usize, usize, f64)> = a_op.triplets().collect();
    for (node, w) in [(0, &w_a), (last, &w_b)] {
        let corr = w.transpose() * &lam * (2.0 / grid.weight(node));
        for r in 0..n {
            for j in 0..d {
                let v = corr[(r, j)];
                if v != 0.0 {
                    triplets.push((node * n + r, j, -v));
                }
            }
        }
    }
    let projected = SparseRows::from_triplets(d, d, triplets);

    Ok(SemidiscreteOperator { system: sys.clone(), metric, a_op, w_b, w_a, schur_inv, projected, rank_margin })
}
