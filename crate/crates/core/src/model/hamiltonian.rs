use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::ModelError;

pub type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

/// How a [`HamiltonianField`] is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentationTag {
    Constant,
    PerSegmentConstant,
    PiecewisePolynomial,
    Callable,
}

/// One piece of a piecewise polynomial field, `H(ζ) = Σ_k C_k (ζ − start)^k` on `[start, end]`.
#[derive(Debug, Clone)]
pub struct PolynomialPiece {
    pub start: f64,
    pub end: f64,
    pub coefficients: Vec<DMatrix<f64>>,
}

#[derive(Clone)]
enum Repr {
    Constant(DMatrix<f64>),
    Segments { bounds: Vec<f64>, values: Vec<DMatrix<f64>> },
    Polynomial(Vec<PolynomialPiece>),
    Callable { value: MatrixFn, derivative: Option<MatrixFn> },
}

/// Matrix-valued Hamiltonian density `H(ζ)` on `[a, b]` together with its
/// derivative `dH/dζ`.
///
/// Piecewise representations differentiate exactly; a callable without an
/// explicit derivative falls back to central differences with step
/// `1e-6·(b − a)`.
#[derive(Clone)]
pub struct HamiltonianField {
    n: usize,
    a: f64,
    b: f64,
    repr: Repr,
}

impl fmt::Debug for HamiltonianField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianField")
            .field("n", &self.n)
            .field("interval", &(self.a, self.b))
            .field("representation", &self.tag())
            .finish()
    }
}

fn check_interval(a: f64, b: f64) -> Result<(), ModelError> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(ModelError::InvalidInterval { a, b })
    }
}

fn check_square(m: &DMatrix<f64>, n: usize, what: &'static str) -> Result<(), ModelError> {
    if m.shape() != (n, n) {
        return Err(ModelError::DimensionMismatch { what, expected: (n, n), found: m.shape() });
    }
    Ok(())
}

impl HamiltonianField {
    pub fn constant(matrix: DMatrix<f64>, a: f64, b: f64) -> Result<Self, ModelError> {
        check_interval(a, b)?;
        let n = matrix.nrows();
        check_square(&matrix, n, "H")?;
        Ok(Self { n, a, b, repr: Repr::Constant(matrix) })
    }

    /// Piecewise constant field. `segments` lists `(start, end, matrix)` and
    /// must tile `[a, b]` contiguously in increasing order.
    pub fn segments(segments: Vec<(f64, f64, DMatrix<f64>)>) -> Result<Self, ModelError> {
        let first = segments.first().ok_or(ModelError::EmptyRepresentation)?;
        let last = segments.last().expect("non-empty");
        let (a, b) = (first.0, last.1);
        check_interval(a, b)?;
        let n = first.2.nrows();
        let mut bounds = vec![a];
        let mut values = Vec::with_capacity(segments.len());
        for (i, (s, e, m)) in segments.into_iter().enumerate() {
            check_square(&m, n, "H segment")?;
            let prev = *bounds.last().expect("seeded");
            if !(e > s) || (i > 0 && (s - prev).abs() > 1e-12 * (b - a)) {
                return Err(ModelError::NonContiguousPieces { at: s });
            }
            bounds.push(e);
            values.push(m);
        }
        Ok(Self { n, a, b, repr: Repr::Segments { bounds, values } })
    }

    pub fn piecewise_polynomial(pieces: Vec<PolynomialPiece>) -> Result<Self, ModelError> {
        let first = pieces.first().ok_or(ModelError::EmptyRepresentation)?;
        let (a, b) = (first.start, pieces.last().expect("non-empty").end);
        check_interval(a, b)?;
        let n = first.coefficients.first().ok_or(ModelError::EmptyRepresentation)?.nrows();
        let mut prev_end = a;
        for p in &pieces {
            if !(p.end > p.start) || (p.start - prev_end).abs() > 1e-12 * (b - a) {
                return Err(ModelError::NonContiguousPieces { at: p.start });
            }
            if p.coefficients.is_empty() {
                return Err(ModelError::EmptyRepresentation);
            }
            for c in &p.coefficients {
                check_square(c, n, "H polynomial coefficient")?;
            }
            prev_end = p.end;
        }
        Ok(Self { n, a, b, repr: Repr::Polynomial(pieces) })
    }

    pub fn callable(n: usize, a: f64, b: f64, value: MatrixFn, derivative: Option<MatrixFn>) -> Result<Self, ModelError> {
        check_interval(a, b)?;
        let probe = value(a);
        check_square(&probe, n, "H callable value")?;
        if let Some(d) = &derivative {
            check_square(&d(a), n, "H callable derivative")?;
        }
        Ok(Self { n, a, b, repr: Repr::Callable { value, derivative } })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn tag(&self) -> RepresentationTag {
        match self.repr {
            Repr::Constant(_) => RepresentationTag::Constant,
            Repr::Segments { .. } => RepresentationTag::PerSegmentConstant,
            Repr::Polynomial(_) => RepresentationTag::PiecewisePolynomial,
            Repr::Callable { .. } => RepresentationTag::Callable,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.repr, Repr::Constant(_))
    }

    fn piece_index(bounds_start: impl Iterator<Item = f64>, zeta: f64) -> usize {
        // right-continuous: a breakpoint belongs to the piece starting there
        bounds_start.skip(1).take_while(|&s| zeta >= s).count()
    }

    pub fn eval(&self, zeta: f64) -> DMatrix<f64> {
        match &self.repr {
            Repr::Constant(m) => m.clone(),
            Repr::Segments { bounds, values } => {
                let k = Self::piece_index(bounds[..values.len()].iter().copied(), zeta);
                values[k].clone()
            }
            Repr::Polynomial(pieces) => {
                let k = Self::piece_index(pieces.iter().map(|p| p.start), zeta);
                let p = &pieces[k];
                let s = zeta - p.start;
                // Horner
                let mut acc = p.coefficients.last().expect("non-empty").clone();
                for c in p.coefficients.iter().rev().skip(1) {
                    acc = acc * s + c;
                }
                acc
            }
            Repr::Callable { value, .. } => value(zeta),
        }
    }

    pub fn derivative(&self, zeta: f64) -> DMatrix<f64> {
        match &self.repr {
            Repr::Constant(_) | Repr::Segments { .. } => DMatrix::zeros(self.n, self.n),
            Repr::Polynomial(pieces) => {
                let k = Self::piece_index(pieces.iter().map(|p| p.start), zeta);
                let p = &pieces[k];
                let s = zeta - p.start;
                let mut acc = DMatrix::zeros(self.n, self.n);
                for (j, c) in p.coefficients.iter().enumerate().skip(1).rev() {
                    acc = acc * s + c * j as f64;
                }
                acc
            }
            Repr::Callable { derivative: Some(d), .. } => d(zeta),
            Repr::Callable { value, derivative: None } => {
                let step = 1e-6 * (self.b - self.a);
                if zeta - step < self.a {
                    (value(zeta) * -3.0 + value(zeta + step) * 4.0 - value(zeta + 2.0 * step)) / (2.0 * step)
                } else if zeta + step > self.b {
                    (value(zeta) * 3.0 - value(zeta - step) * 4.0 + value(zeta - 2.0 * step)) / (2.0 * step)
                } else {
                    (value(zeta + step) - value(zeta - step)) / (2.0 * step)
                }
            }
        }
    }

    /// Points that must be part of any validation grid so that piecewise
    /// constant fields are sampled on every piece.
    pub fn critical_points(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Segments { bounds, .. } => bounds.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
            Repr::Polynomial(pieces) => pieces.iter().flat_map(|p| [p.start, 0.5 * (p.start + p.end)]).collect(),
            _ => Vec::new(),
        }
    }
}
