use std::sync::Arc;
use std::time::Instant;

use nalgebra::DVector;

use super::{DiscretizationError, NodeMetric, SemidiscreteOperator};
use crate::linalg::BandedLu;

pub const INTEGRATOR_NAME: &str = "implicit-midpoint";

/// Position of node `i` in the folded ordering `0, N, 1, N−1, 2, …`, which
/// keeps the endpoint coupling introduced by the projection inside a narrow band.
fn folded_position(i: usize, last: usize) -> usize {
    if i <= last - i {
        2 * i
    } else {
        2 * (last - i) + 1
    }
}

/// Implicit midpoint rule `(I − dt/2 ΠA) x⁺ = (I + dt/2 ΠA) x` with the
/// matrix factorized once.
#[derive(Debug, Clone)]
pub struct MidpointStepper {
    dt: f64,
    lu: BandedLu,
    perm: Vec<usize>,
    buf_len: usize,
}

impl MidpointStepper {
    pub fn new(op: &SemidiscreteOperator, dt: f64) -> Result<Self, DiscretizationError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(DiscretizationError::InvalidStep(dt));
        }
        let n = op.n();
        let last = op.grid().cells();
        let d = op.dim();
        let perm: Vec<usize> = (0..d).map(|idx| folded_position(idx / n, last) * n + idx % n).collect();
        let half = 0.5 * dt;
        let triplets = op
            .projected_sparse()
            .triplets()
            .map(|(i, j, v)| (i, j, -half * v))
            .chain((0..d).map(|i| (i, i, 1.0)));
        let lu = BandedLu::factor(d, triplets, &perm).map_err(|e| DiscretizationError::Singular { column: e.column })?;
        Ok(Self { dt, lu, perm, buf_len: d })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Lower and upper bandwidths of the factorized midpoint matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        self.lu.bandwidths()
    }

    pub fn mean_profile(&self) -> (f64, f64) {
        self.lu.mean_profile()
    }

    pub fn step(&self, op: &SemidiscreteOperator, x: &DVector<f64>) -> Result<DVector<f64>, DiscretizationError> {
        let mut buf = vec![0.0; self.buf_len];
        let mut out = x.clone();
        self.step_into(op, x, &mut out, &mut buf)?;
        Ok(out)
    }

    /// [`Self::step`] writing into `out`, with `buf` as scratch of length `D`.
    pub fn step_into(
        &self,
        op: &SemidiscreteOperator,
        x: &DVector<f64>,
        out: &mut DVector<f64>,
        buf: &mut [f64],
    ) -> Result<(), DiscretizationError> {
        if x.len() != self.buf_len {
            return Err(DiscretizationError::LengthMismatch { expected: self.buf_len, found: x.len() });
        }
        let half = 0.5 * self.dt;
        let sparse = op.projected_sparse();
        for (old, &new) in self.perm.iter().enumerate() {
            let ax: f64 = sparse.row(old).iter().map(|&(j, v)| v * x[j]).sum();
            buf[new] = x[old] + half * ax;
        }
        self.lu.solve_in_place(buf);
        for (old, &new) in self.perm.iter().enumerate() {
            out[old] = buf[new];
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(DiscretizationError::NonFinite);
        }
        // the solve preserves the constraint up to rounding; remove the drift
        op.project_in_place(out);
        Ok(())
    }
}

/// One midpoint step; factorizes on every call, so prefer [`MidpointStepper`] in loops.
pub fn step_midpoint(op: &SemidiscreteOperator, x: &DVector<f64>, dt: f64) -> Result<DVector<f64>, DiscretizationError> {
    MidpointStepper::new(op, dt)?.step(op, x)
}

/// Number of steps covering `[0, horizon]`, `⌈horizon/dt⌉`.
pub fn step_count(horizon: f64, dt: f64) -> usize {
    let r = horizon / dt;
    let k = r.round();
    if (r - k).abs() <= 1e-9 * r.max(1.0) {
        k as usize
    } else {
        r.ceil() as usize
    }
}

/// Receives every state of a run, including the initial one.
pub trait Observer {
    fn observe(&mut self, k: usize, t: f64, x: &DVector<f64>);
}

/// Runs `steps` midpoint steps from `x0`, handing every state to `observer`.
pub fn integrate<O: Observer>(
    op: &SemidiscreteOperator,
    stepper: &MidpointStepper,
    x0: &DVector<f64>,
    steps: usize,
    observer: &mut O,
) -> Result<(), DiscretizationError> {
    let mut x = x0.clone();
    let mut next = x0.clone();
    let mut buf = vec![0.0; x0.len()];
    observer.observe(0, 0.0, &x);
    for k in 1..=steps {
        stepper.step_into(op, &x, &mut next, &mut buf)?;
        std::mem::swap(&mut x, &mut next);
        observer.observe(k, k as f64 * stepper.dt(), &x);
    }
    Ok(())
}

/// Stored run with uniform step: snapshot `k` is the state at `t_k = k·dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    metric: Arc<NodeMetric>,
    dt: f64,
    snapshots: Vec<DVector<f64>>,
    integrator: &'static str,
    wall_time: f64,
}

impl Trajectory {
    pub fn from_snapshots(metric: Arc<NodeMetric>, dt: f64, snapshots: Vec<DVector<f64>>) -> Self {
        assert!(!snapshots.is_empty(), "a trajectory has at least one snapshot");
        Self { metric, dt, snapshots, integrator: INTEGRATOR_NAME, wall_time: 0.0 }
    }

    pub fn metric(&self) -> &Arc<NodeMetric> {
        &self.metric
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        (self.snapshots.len() - 1) as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn snapshot(&self, k: usize) -> Option<&DVector<f64>> {
        self.snapshots.get(k)
    }

    pub fn snapshots(&self) -> &[DVector<f64>] {
        &self.snapshots
    }

    pub fn integrator(&self) -> &'static str {
        self.integrator
    }

    pub fn wall_time(&self) -> f64 {
        self.wall_time
    }

    /// Every snapshot multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { snapshots: self.snapshots.iter().map(|x| x * factor).collect(), ..self.clone() }
    }
}

struct Collect(Vec<DVector<f64>>);

impl Observer for Collect {
    fn observe(&mut self, _k: usize, _t: f64, x: &DVector<f64>) {
        self.0.push(x.clone());
    }
}

pub fn simulate(op: &SemidiscreteOperator, x0: &DVector<f64>, horizon: f64, dt: f64) -> Result<Trajectory, DiscretizationError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(DiscretizationError::InvalidHorizon(horizon));
    }
    if !(dt > 0.0) || dt > horizon {
        return Err(DiscretizationError::InvalidStep(dt));
    }
    let stepper = MidpointStepper::new(op, dt)?;
    simulate_with(op, &stepper, x0, step_count(horizon, dt))
}

pub fn simulate_with(
    op: &SemidiscreteOperator,
    stepper: &MidpointStepper,
    x0: &DVector<f64>,
    steps: usize,
) -> Result<Trajectory, DiscretizationError> {
    if x0.len() != op.dim() {
        return Err(DiscretizationError::LengthMismatch { expected: op.dim(), found: x0.len() });
    }
    let start = Instant::now();
    let mut collect = Collect(Vec::with_capacity(steps + 1));
    integrate(op, stepper, x0, steps, &mut collect)?;
    let mut traj = Trajectory::from_snapshots(op.metric().clone(), stepper.dt(), collect.0);
    traj.wall_time = start.elapsed().as_secs_f64();
    Ok(traj)
}
