use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{DiscretizationError, SemidiscreteOperator};

pub const SAMPLER_MODES: usize = 10;

/// Evaluates `f(ζ_i)` at every node and projects onto the constraint range.
pub fn from_fn(op: &SemidiscreteOperator, f: impl Fn(f64) -> DVector<f64>) -> Result<DVector<f64>, DiscretizationError> {
    let n = op.n();
    let mut x = DVector::zeros(op.dim());
    for (i, z) in op.grid().nodes().enumerate() {
        let v = f(z);
        if v.len() != n {
            return Err(DiscretizationError::LengthMismatch { expected: n, found: v.len() });
        }
        x.rows_mut(i * n, n).copy_from(&v);
    }
    Ok(op.project(&x))
}

/// Projects a raw nodal vector onto the constraint range.
pub fn project_initial(op: &SemidiscreteOperator, raw: &DVector<f64>) -> DVector<f64> {
    op.project(raw)
}

/// Ensemble member `member` of the seeded sampler: every component is
/// `Σ_{k=1}^{10} c_k sin(kπ(ζ − a)/(b − a))` with standard normal `c_k`.
///
/// Members draw from separate streams of one seeded generator, so a member
/// does not depend on how many others are drawn or in what order.
pub fn sample_member(op: &SemidiscreteOperator, seed: u64, member: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member);
    let n = op.n();
    let coeffs: Vec<[f64; SAMPLER_MODES]> =
        (0..n).map(|_| std::array::from_fn(|_| rng.sample::<f64, _>(StandardNormal))).collect();
    let (a, b) = op.grid().interval();
    from_fn(op, |z| {
        let s = std::f64::consts::PI * (z - a) / (b - a);
        let taper = s.sin().powi(2);
        DVector::from_iterator(
            n,
            coeffs
                .iter()
                .map(|c| taper * c.iter().enumerate().map(|(k, ck)| ck * ((k + 1) as f64 * s).sin()).sum::<f64>()),
        )
    })
    .expect("sampler produces n components")
}

/// Smooth compactly supported bump `exp(1 − 1/(1 − r²))` with `r = (ζ − center)/radius`,
/// peak value one.
pub fn bump(zeta: f64, center: f64, radius: f64) -> f64 {
    let r = (zeta - center) / radius;
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// Bump profile along `direction`, projected.
pub fn bump_state(
    op: &SemidiscreteOperator,
    center: f64,
    radius: f64,
    direction: &[f64],
) -> Result<DVector<f64>, DiscretizationError> {
    let dir = DVector::from_column_slice(direction);
    from_fn(op, |z| &dir * bump(z, center, radius))
}
