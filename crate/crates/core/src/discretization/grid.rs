use serde::Serialize;

use super::DiscretizationError;

/// Equispaced nodes `ζ_0 = a < … < ζ_N = b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    cells: usize,
    a: f64,
    b: f64,
    h: f64,
}

impl Grid {
    pub fn new(a: f64, b: f64, cells: usize) -> Result<Self, DiscretizationError> {
        if cells == 0 || !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(DiscretizationError::InvalidGrid { a, b, cells });
        }
        Ok(Self { cells, a, b, h: (b - a) / cells as f64 })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn nodes_len(&self) -> usize {
        self.cells + 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells {
            self.b
        } else {
            self.a + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.cells).map(|i| self.node(i))
    }

    /// Trapezoid quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.cells {
            0.5 * self.h
        } else {
            self.h
        }
    }

    /// Cell index `i` and fraction `θ ∈ [0, 1]` with `ζ = (1 − θ)ζ_i + θζ_{i+1}`.
    pub fn locate(&self, zeta: f64) -> (usize, f64) {
        let s = ((zeta - self.a) / self.h).clamp(0.0, self.cells as f64);
        let i = (s.floor() as usize).min(self.cells - 1);
        (i, s - i as f64)
    }
}
