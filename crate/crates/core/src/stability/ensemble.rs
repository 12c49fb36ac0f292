use serde::Serialize;

use crate::discretization::{integrate, sample_member, DiscretizationError, MidpointStepper, SemidiscreteOperator};
use crate::energy::{EnergyHistory, HistoryRecorder};

/// How ensemble members are scheduled. Members never share mutable state
/// and results come back in member order either way, so the choice does not
/// affect any output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel { jobs: usize },
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
            Execution::Parallel { jobs }
        }
        #[cfg(not(feature = "parallel"))]
        {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// `jobs = 1` runs sequentially; larger values use a pool of that size
    /// when built with `parallel`, and are ignored otherwise.
    pub fn with_jobs(jobs: usize) -> Self {
        #[cfg(feature = "parallel")]
        if jobs > 1 {
            return Execution::Parallel { jobs };
        }
        let _ = jobs;
        Execution::Sequential
    }

    /// Applies `f` to every item, preserving order.
    pub fn map<I, T, F>(&self, items: &[I], f: F) -> Vec<T>
    where
        I: Sync,
        T: Send,
        F: Fn(&I) -> T + Sync + Send,
    {
        match *self {
            Execution::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Execution::Parallel { jobs } => {
                use rayon::prelude::*;
                match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
                    Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                    Err(_) => items.iter().map(f).collect(),
                }
            }
        }
    }
}

/// Runs sampler member `m` for `steps` midpoint steps, for every `(m, steps)`
/// in `runs`, and keeps the energy history of each.
pub fn run_histories(
    op: &SemidiscreteOperator,
    stepper: &MidpointStepper,
    seed: u64,
    runs: &[(u64, usize)],
    exec: Execution,
) -> Result<Vec<EnergyHistory>, DiscretizationError> {
    exec.map(runs, |&(member, steps)| {
        let x0 = sample_member(op, seed, member);
        let mut rec = HistoryRecorder::new(op.metric().clone(), stepper.dt(), steps + 1);
        integrate(op, stepper, &x0, steps, &mut rec)?;
        Ok(rec.finish())
    })
    .into_iter()
    .collect()
}
