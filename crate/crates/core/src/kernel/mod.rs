//! Value operator, update-set rules and the incremental solver.

mod boundary;
mod frozen;
mod run;
mod solver;
mod state;
mod update;

pub use boundary::{GoalTracker, HaloRule, NodeKind};
pub use frozen::{sup_distance, FixedPoint, FrozenOperator};
pub use run::{run, run_with, write_values_csv, Algorithm, Cadence, Checkpoint, SolutionTrace, SolverConfig};
pub use solver::{KernelOptions, Propagation, Solver, StepReport, UpdateRule};
pub use state::{cascade_schedule, round_robin_schedule, SolverState, UpdateSet};
pub use update::{ball_min, time_update, value_update, Backup};

/// `(0..n).map(f)`, in parallel when the `parallel` feature is on. Output
/// order is the index order either way.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
