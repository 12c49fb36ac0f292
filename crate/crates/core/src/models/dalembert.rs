use super::{EndCondition, ModelsError, StringParams};

/// Exact solution of the constant-coefficient string
/// `∂t x1 = T ∂ζ x2`, `∂t x2 = (1/ρ) ∂ζ x1` by characteristics.
///
/// With `z = √(ρT)` and `c = √(T/ρ)`, the combinations `R = x1 − z·x2` and
/// `L = x1 + z·x2` move right and left at speed `c`. At an end the outgoing
/// wave is `r` times the incoming one with `r = −1` (fixed), `r = +1` (free)
/// and `r = (c − σ)/(c + σ)` (damper `F = −σ x1`); every `r` has modulus at
/// most one for `σ ≥ 0` and vanishes at `σ = c`.
#[derive(Debug, Clone)]
pub struct DAlembert {
    a: f64,
    b: f64,
    c: f64,
    z: f64,
    r_a: f64,
    r_b: f64,
}

pub fn reflection_coefficient(rho: f64, tension: f64, cond: EndCondition) -> f64 {
    let c = (tension / rho).sqrt();
    match cond {
        EndCondition::Fixed => -1.0,
        EndCondition::Free => 1.0,
        EndCondition::Damper(sigma) => (c - sigma) / (c + sigma),
    }
}

impl DAlembert {
    pub fn new(p: &StringParams, a: f64, b: f64, left: EndCondition, right: EndCondition) -> Result<Self, ModelsError> {
        let (Some(rho), Some(tension)) = (p.rho.as_constant(), p.tension.as_constant()) else {
            return Err(ModelsError::Unsupported("the characteristics oracle needs constant coefficients"));
        };
        p.check(a, b)?;
        Ok(Self {
            a,
            b,
            c: (tension / rho).sqrt(),
            z: (rho * tension).sqrt(),
            r_a: reflection_coefficient(rho, tension, left),
            r_b: reflection_coefficient(rho, tension, right),
        })
    }

    pub fn speed(&self) -> f64 {
        self.c
    }

    pub fn reflections(&self) -> (f64, f64) {
        (self.r_a, self.r_b)
    }

    fn right_moving(&self, x0: &dyn Fn(f64) -> [f64; 2], zeta: f64, t: f64) -> f64 {
        let foot = zeta - self.c * t;
        if foot >= self.a {
            let [x1, x2] = x0(foot);
            x1 - self.z * x2
        } else {
            let s = t - (zeta - self.a) / self.c;
            if self.r_a == 0.0 {
                0.0
            } else {
                self.r_a * self.left_moving(x0, self.a, s)
            }
        }
    }

    fn left_moving(&self, x0: &dyn Fn(f64) -> [f64; 2], zeta: f64, t: f64) -> f64 {
        let foot = zeta + self.c * t;
        if foot <= self.b {
            let [x1, x2] = x0(foot);
            x1 + self.z * x2
        } else {
            let s = t - (self.b - zeta) / self.c;
            if self.r_b == 0.0 {
                0.0
            } else {
                self.r_b * self.right_moving(x0, self.b, s)
            }
        }
    }

    /// State `(x1, x2)` at `(ζ, t)` for initial data `x0`.
    pub fn evaluate(&self, x0: &dyn Fn(f64) -> [f64; 2], zeta: f64, t: f64) -> [f64; 2] {
        let r = self.right_moving(x0, zeta, t);
        let l = self.left_moving(x0, zeta, t);
        [0.5 * (r + l), 0.5 * (l - r) / self.z]
    }

    pub fn solution(&self, x0: &dyn Fn(f64) -> [f64; 2], points: &[f64], t: f64) -> Vec<[f64; 2]> {
        points.iter().map(|&z| self.evaluate(x0, z, t)).collect()
    }
}
