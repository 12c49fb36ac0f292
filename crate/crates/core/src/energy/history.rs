use std::sync::Arc;

use nalgebra::DVector;

use super::density::integrate_linear;
use super::{DensityField, EnergyError, Endpoint};
use crate::discretization::{NodeMetric, Observer};

/// Energy and endpoint densities of a run: the three scalar series the
/// boundary estimates and decay fits need.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyHistory {
    dt: f64,
    energies: Vec<f64>,
    density_a: Vec<f64>,
    density_b: Vec<f64>,
}

impl EnergyHistory {
    pub fn new(dt: f64, energies: Vec<f64>, density_a: Vec<f64>, density_b: Vec<f64>) -> Result<Self, EnergyError> {
        if energies.is_empty() {
            return Err(EnergyError::Empty);
        }
        for len in [density_a.len(), density_b.len()] {
            if len != energies.len() {
                return Err(EnergyError::LengthMismatch { expected: energies.len(), found: len });
            }
        }
        Ok(Self { dt, energies, density_a, density_b })
    }

    pub fn from_field(field: &DensityField) -> Self {
        let last = field.grid().cells();
        Self {
            dt: field.dt(),
            energies: field.energies(),
            density_a: (0..field.len()).map(|k| field.row(k)[0]).collect(),
            density_b: (0..field.len()).map(|k| field.row(k)[last]).collect(),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn density(&self, endpoint: Endpoint) -> &[f64] {
        match endpoint {
            Endpoint::A => &self.density_a,
            Endpoint::B => &self.density_b,
        }
    }

    /// Every series multiplied by `factor` (the run from an initial state scaled by `√factor`).
    pub fn scaled(&self, factor: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|x| x * factor).collect();
        Self { dt: self.dt, energies: s(&self.energies), density_a: s(&self.density_a), density_b: s(&self.density_b) }
    }

    /// The first `len` samples.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.clamp(1, self.len());
        Self {
            dt: self.dt,
            energies: self.energies[..len].to_vec(),
            density_a: self.density_a[..len].to_vec(),
            density_b: self.density_b[..len].to_vec(),
        }
    }

    fn check_range(&self, from: f64, to: f64) -> Result<(), EnergyError> {
        let slack = 1e-9 * self.dt;
        if !(from >= -slack && to <= self.horizon() + slack && from <= to + slack) {
            return Err(EnergyError::OutsideHorizon { from, to, horizon: self.horizon() });
        }
        Ok(())
    }

    /// `‖x(t)‖²_X`, linear in time between samples.
    pub fn energy_at(&self, t: f64) -> Result<f64, EnergyError> {
        self.check_range(t, t)?;
        if self.len() == 1 {
            return Ok(self.energies[0]);
        }
        let s = (t / self.dt).clamp(0.0, (self.len() - 1) as f64);
        let k = (s.floor() as usize).min(self.len() - 2);
        let theta = s - k as f64;
        Ok((1.0 - theta) * self.energies[k] + theta * self.energies[k + 1])
    }

    /// `∫_from^to (xᵀHx)(t, δ) dt`.
    pub fn boundary_integral(&self, from: f64, to: f64, endpoint: Endpoint) -> Result<f64, EnergyError> {
        if !(from <= to) {
            return Err(EnergyError::InvalidWindow("need sigma <= tau".into()));
        }
        self.check_range(from, to)?;
        if self.len() == 1 {
            return Ok(0.0);
        }
        let d = self.density(endpoint);
        Ok(integrate_linear(0.0, self.dt, self.len(), from, to, |k| d[k]))
    }
}

/// Observer recording an [`EnergyHistory`].
#[derive(Debug, Clone)]
pub struct HistoryRecorder {
    metric: Arc<NodeMetric>,
    dt: f64,
    energies: Vec<f64>,
    density_a: Vec<f64>,
    density_b: Vec<f64>,
}

impl HistoryRecorder {
    pub fn new(metric: Arc<NodeMetric>, dt: f64, capacity: usize) -> Self {
        Self {
            metric,
            dt,
            energies: Vec::with_capacity(capacity),
            density_a: Vec::with_capacity(capacity),
            density_b: Vec::with_capacity(capacity),
        }
    }

    pub fn finish(self) -> EnergyHistory {
        EnergyHistory { dt: self.dt, energies: self.energies, density_a: self.density_a, density_b: self.density_b }
    }
}

impl Observer for HistoryRecorder {
    fn observe(&mut self, _k: usize, _t: f64, x: &DVector<f64>) {
        let m = &self.metric;
        self.energies.push(m.energy(x));
        self.density_a.push(m.density(x, 0));
        self.density_b.push(m.density(x, m.grid().cells()));
    }
}
