use std::sync::Arc;

use nalgebra::DVector;

use super::EnergyError;
use crate::discretization::{Grid, NodeMetric, Observer, Trajectory};

/// Pointwise energy density `x(t_k, ζ_i)ᵀ H(ζ_i) x(t_k, ζ_i)` of a run on a
/// uniform time grid. This is all the window functionals need, at a fraction
/// of the memory of the full trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid,
    dt: f64,
    nodes: usize,
    values: Vec<f64>,
}

impl DensityField {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let mut rec = DensityRecorder::new(traj.metric().clone(), traj.dt());
        for (k, x) in traj.snapshots().iter().enumerate() {
            rec.observe(k, traj.time(k), x);
        }
        rec.finish()
    }

    /// Builds a field from rows of nodal densities, one row per time step.
    pub fn from_rows(grid: Grid, dt: f64, rows: &[Vec<f64>]) -> Result<Self, EnergyError> {
        let nodes = grid.nodes_len();
        if rows.is_empty() {
            return Err(EnergyError::Empty);
        }
        let mut values = Vec::with_capacity(rows.len() * nodes);
        for row in rows {
            if row.len() != nodes {
                return Err(EnergyError::LengthMismatch { expected: nodes, found: row.len() });
            }
            values.extend_from_slice(row);
        }
        Ok(Self { grid, dt, nodes, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.nodes..(k + 1) * self.nodes]
    }

    /// Density at snapshot `k`, linearly interpolated between nodes.
    pub fn at(&self, k: usize, zeta: f64) -> f64 {
        let (i, theta) = self.grid.locate(zeta);
        let row = self.row(k);
        (1.0 - theta) * row[i] + theta * row[i + 1]
    }

    /// `‖x(t_k)‖²_X`, trapezoid rule for `(1/2)∫ xᵀHx dζ`.
    pub fn energy(&self, k: usize) -> Result<f64, EnergyError> {
        if k >= self.len() {
            return Err(EnergyError::IndexOutOfRange { index: k, len: self.len() });
        }
        let row = self.row(k);
        Ok(row.iter().enumerate().map(|(i, d)| 0.5 * self.grid.weight(i) * d).sum())
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.energy(k).expect("index in range")).collect()
    }

    /// Every density multiplied by `factor` (the field of a state scaled by `√factor`).
    pub fn scaled(&self, factor: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * factor).collect(), ..self.clone() }
    }

    /// Checks `[from, to]` against the stored horizon, allowing rounding slack.
    pub(crate) fn check_time_range(&self, from: f64, to: f64) -> Result<(), EnergyError> {
        let slack = 1e-9 * self.dt;
        if from < -slack || to > self.horizon() + slack || from > to + slack {
            return Err(EnergyError::OutsideHorizon { from, to, horizon: self.horizon() });
        }
        Ok(())
    }

    pub(crate) fn check_zeta(&self, zeta: f64) -> Result<(), EnergyError> {
        let (a, b) = self.grid.interval();
        let slack = 1e-12 * (b - a);
        if !(zeta >= a - slack && zeta <= b + slack) {
            return Err(EnergyError::OutsideInterval { zeta, a, b });
        }
        Ok(())
    }

    /// `∫_from^to f(t) dt` for the piecewise linear interpolant of `f(t_k)`.
    pub(crate) fn integrate_time(&self, from: f64, to: f64, f: impl Fn(usize) -> f64) -> f64 {
        integrate_linear(0.0, self.dt, self.len(), from, to, f)
    }

    /// `∫_from^to (xᵀHx)(t_k, ζ) dζ` for the nodal interpolant.
    pub(crate) fn integrate_space(&self, k: usize, from: f64, to: f64) -> f64 {
        let (a, _) = self.grid.interval();
        let row = self.row(k);
        integrate_linear(a, self.grid.h(), self.grid.nodes_len(), from, to, |i| row[i])
    }
}

/// Exact integral over `[lo, hi]` of the piecewise linear function through
/// `(origin + j·step, f(j))`, `j < count`. Endpoints within `1e−9` cells of a
/// sample snap to it, so windows that should start on a node do.
pub(crate) fn integrate_linear(origin: f64, step: f64, count: usize, lo: f64, hi: f64, f: impl Fn(usize) -> f64) -> f64 {
    let last = (count - 1) as f64;
    let snap = |s: f64| {
        let r = s.round();
        let s = if (s - r).abs() < 1e-9 { r } else { s };
        s.clamp(0.0, last)
    };
    let s0 = snap((lo - origin) / step);
    let s1 = snap((hi - origin) / step);
    if s1 <= s0 {
        return 0.0;
    }
    let first = (s0.floor() as usize).min(count - 2);
    let end = (s1.ceil() as usize).max(first + 1);
    let mut total = 0.0;
    for j in first..end {
        let u0 = (s0 - j as f64).max(0.0);
        let u1 = (s1 - j as f64).min(1.0);
        if u1 <= u0 {
            continue;
        }
        let (v0, v1) = (f(j), f(j + 1));
        total += (u1 - u0) * v0 + 0.5 * (u1 * u1 - u0 * u0) * (v1 - v0);
    }
    total * step
}

/// Observer that keeps only the density field of a run.
#[derive(Debug, Clone)]
pub struct DensityRecorder {
    metric: Arc<NodeMetric>,
    dt: f64,
    values: Vec<f64>,
}

impl DensityRecorder {
    pub fn new(metric: Arc<NodeMetric>, dt: f64) -> Self {
        Self { metric, dt, values: Vec::new() }
    }

    pub fn with_capacity(metric: Arc<NodeMetric>, dt: f64, snapshots: usize) -> Self {
        let cap = snapshots * metric.grid().nodes_len();
        Self { metric, dt, values: Vec::with_capacity(cap) }
    }

    pub fn finish(self) -> DensityField {
        let grid = self.metric.grid().clone();
        DensityField { nodes: grid.nodes_len(), grid, dt: self.dt, values: self.values }
    }
}

impl Observer for DensityRecorder {
    fn observe(&mut self, _k: usize, _t: f64, x: &DVector<f64>) {
        let m = &self.metric;
        self.values.extend((0..m.grid().nodes_len()).map(|i| m.density(x, i)));
    }
}
