//! iGame snapshots on the fence escape game, scored against the oracle.

use std::fs::File;
use std::io::BufWriter;
use std::ops::ControlFlow;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::game::game_by_id;
use crate::kernel::{run_with, Algorithm, Cadence, KernelOptions, SolverConfig};
use crate::multigrid::GridSolution;
use crate::policy::{SampleField, ValueField};
use crate::pools::PoolMode;
use crate::sampling::PointSet;
use crate::schedule::Schedule;

use super::error::ErrorStats;
use super::reference::FenceOracle;

pub const FENCE_SNAPSHOT_COUNTS: [usize; 5] = [100, 500, 1000, 2000, 6000];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FenceConfig {
    /// `max_samples` and `checkpoints` are overridden by `counts`.
    pub solver: SolverConfig,
    pub counts: Vec<usize>,
    pub oracle: FenceOracle,
}

impl Default for FenceConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig {
                game: "fence".into(),
                mode: Algorithm::Igame,
                max_staleness: 0,
                kernel: KernelOptions { pools: PoolMode::Grid { angel: 3, demon: 3 }, ..KernelOptions::default() },
                ..SolverConfig::default()
            },
            counts: FENCE_SNAPSHOT_COUNTS.to_vec(),
            oracle: FenceOracle::default(),
        }
    }
}

/// The iGame field at one sample count, read off at the probe lattice nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct FenceSnapshot {
    pub n: usize,
    pub wall_ms: f64,
    pub schedule: Schedule,
    pub values: Vec<f64>,
    pub error: ErrorStats,
}

#[derive(Clone, Debug)]
pub struct FenceRun {
    pub oracle: GridSolution,
    pub snapshots: Vec<FenceSnapshot>,
}

pub fn run_fence_snapshots(config: &FenceConfig, oracle: GridSolution) -> Result<FenceRun> {
    let mut counts = config.counts.clone();
    counts.sort_unstable();
    counts.dedup();
    let Some(&last) = counts.last() else { return domain("no snapshot counts") };
    let game = game_by_id(&config.solver.game)?;
    let solver_cfg = SolverConfig { max_samples: last, checkpoints: Cadence::At(counts.clone()), ..config.solver.clone() };

    let lattice = &oracle.lattice;
    let scored: Vec<usize> = (0..lattice.len())
        .filter(|&i| {
            let x = lattice.point(i);
            game.in_free(x) && !game.in_goal(x)
        })
        .collect();

    let mut snapshots = Vec::new();
    let mut failure = None;
    run_with(&game, &solver_cfg, |solver, wall_ms| {
        if !counts.contains(&solver.len()) {
            return ControlFlow::Continue(());
        }
        let field = match SampleField::from_solver(solver) {
            Ok(f) => f,
            Err(e) => {
                failure = Some(e);
                return ControlFlow::Break(());
            }
        };
        let values = crate::kernel::par_map(lattice.len(), |i| field.interpolate(lattice.point(i)));
        let diffs: Vec<f64> = scored.iter().map(|&i| (values[i] - oracle.values[i]).abs()).collect();
        let error = ErrorStats {
            mean: diffs.iter().sum::<f64>() / diffs.len().max(1) as f64,
            sup: diffs.iter().copied().fold(0.0, f64::max),
            probes: diffs.len(),
        };
        snapshots.push(FenceSnapshot {
            n: solver.len(),
            wall_ms,
            schedule: *solver.schedule().expect("solver has stepped"),
            values,
            error,
        });
        ControlFlow::Continue(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(FenceRun { oracle, snapshots })
}

/// Number of steps in `errors` that fail to decrease.
pub fn non_monotone_steps(errors: &[f64]) -> usize {
    errors.windows(2).filter(|w| w[1] >= w[0]).count()
}

impl FenceRun {
    pub fn errors(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.error.mean).collect()
    }

    /// `oracle.csv`, one `snapshot_<n>.csv` per snapshot (columns
    /// `x_p,x_e,value`) and `errors.csv`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let lattice = &self.oracle.lattice;
        write_field(&dir.join("oracle.csv"), lattice, &self.oracle.values)?;
        for s in &self.snapshots {
            write_field(&dir.join(format!("snapshot_{}.csv", s.n)), lattice, &s.values)?;
        }
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("errors.csv"))?));
        w.write_record(["n", "wall_ms", "d", "h", "mean_error", "sup_error", "probes"])?;
        for s in &self.snapshots {
            w.write_record([
                s.n.to_string(),
                format!("{:.3}", s.wall_ms),
                format!("{:?}", s.schedule.d),
                format!("{:?}", s.schedule.h),
                format!("{:?}", s.error.mean),
                format!("{:?}", s.error.sup),
                s.error.probes.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn write_field(path: &Path, lattice: &crate::multigrid::Lattice, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["x_p", "x_e", "value"])?;
    for (i, v) in values.iter().enumerate() {
        let x = lattice.point(i);
        w.write_record([format!("{:?}", x[0]), format!("{:?}", x[1]), format!("{v:?}")])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::reference::{resample, GridReference};
    use crate::schedule::DilationRule;

    #[test]
    fn monotone_step_count() {
        assert_eq!(non_monotone_steps(&[0.9, 0.8, 0.85, 0.5, 0.4]), 1);
        assert_eq!(non_monotone_steps(&[0.5, 0.4, 0.3]), 0);
        assert_eq!(non_monotone_steps(&[0.5]), 0);
    }

    #[test]
    fn small_snapshot_run() {
        let reference = GridReference { shape: vec![60, 60], tol: 1e-6, ..GridReference::fence_oracle() };
        let game = game_by_id("fence").unwrap();
        let oracle = resample(&reference.solve().unwrap(), &game, &[30, 30], DilationRule::Compact).unwrap();
        let cfg = FenceConfig { counts: vec![50, 20, 100], ..FenceConfig::default() };
        let run = run_fence_snapshots(&cfg, oracle).unwrap();
        let ns: Vec<usize> = run.snapshots.iter().map(|s| s.n).collect();
        assert_eq!(ns, vec![20, 50, 100]);
        for s in &run.snapshots {
            assert_eq!(s.values.len(), 900);
            assert!(s.values.iter().all(|v| (0.0..=1.0).contains(v)));
            assert!((0.0..=1.0).contains(&s.error.mean));
        }
        let dir = tempfile::tempdir().unwrap();
        run.write_dir(dir.path()).unwrap();
        for f in ["oracle.csv", "snapshot_20.csv", "snapshot_100.csv", "errors.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let errors = std::fs::read_to_string(dir.path().join("errors.csv")).unwrap();
        assert_eq!(errors.lines().count(), 4);
    }
}
