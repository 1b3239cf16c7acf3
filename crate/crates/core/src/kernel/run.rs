//! Budgeted solver runs with checkpointed traces.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::ops::ControlFlow;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::game::{game_by_id, GameDef};
use crate::schedule::Schedule;

use super::solver::{KernelOptions, Solver, UpdateRule};
use super::state::SolverState;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Synchronous sweeps when `max_staleness = 0`, round robin otherwise.
    #[default]
    Igame,
    /// Child/flag cascade.
    Igamestar,
}

/// When [`run`] records a checkpoint. The last iteration is always recorded.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    /// Whenever the sample count reaches a power of two.
    #[default]
    Geometric,
    Every(usize),
    At(Vec<usize>),
}

impl Cadence {
    fn hit(&self, n: usize) -> bool {
        match self {
            Cadence::Geometric => n.is_power_of_two(),
            Cadence::Every(k) => *k > 0 && n % k == 0,
            Cadence::At(list) => list.contains(&n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub game: String,
    pub seed: u64,
    pub mode: Algorithm,
    /// `D`: the longest a sample may go without a value-iteration update.
    pub max_staleness: u32,
    #[serde(flatten)]
    pub kernel: KernelOptions,
    pub max_samples: usize,
    pub max_seconds: Option<f64>,
    pub checkpoints: Cadence,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            game: "fence".into(),
            seed: 0,
            mode: Algorithm::Igame,
            max_staleness: 50,
            kernel: KernelOptions::default(),
            max_samples: 1000,
            max_seconds: None,
            checkpoints: Cadence::Geometric,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        game_by_id(&self.game)?;
        if !(self.kernel.alpha_exp > 0.0) {
            return domain("alpha_exp must be positive");
        }
        if matches!(self.max_seconds, Some(s) if !(s >= 0.0)) {
            return domain("max_seconds must be nonnegative");
        }
        Ok(())
    }

    pub fn update_rule(&self) -> UpdateRule {
        match (self.mode, self.max_staleness) {
            (Algorithm::Igame, 0) => UpdateRule::Synchronous,
            (Algorithm::Igame, d) => UpdateRule::RoundRobin(d),
            (Algorithm::Igamestar, d) => UpdateRule::Cascade(d),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub n: usize,
    /// Cumulative solver time, excluding checkpoint handling.
    pub wall_ms: f64,
    pub schedule: Schedule,
    pub state: SolverState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionTrace {
    pub dim: usize,
    /// Final sample coordinates, row-major.
    pub samples: Vec<f64>,
    pub checkpoints: Vec<Checkpoint>,
}

/// Runs the configured solver and records the checkpoints.
pub fn run(game: &GameDef, config: &SolverConfig) -> Result<SolutionTrace> {
    let mut checkpoints = Vec::new();
    let solver = run_with(game, config, |s, wall_ms| {
        checkpoints.push(Checkpoint {
            n: s.len(),
            wall_ms,
            schedule: *s.schedule().expect("at least one iteration"),
            state: s.state().clone(),
        });
        ControlFlow::Continue(())
    })?;
    Ok(SolutionTrace { dim: game.dim(), samples: solver.cloud().coords().to_vec(), checkpoints })
}

/// Runs the configured solver, calling `on_checkpoint` with the solver and
/// its cumulative wall time at every checkpoint. Time spent in the callback
/// is not counted; returning `Break` stops the run.
pub fn run_with<F>(game: &GameDef, config: &SolverConfig, mut on_checkpoint: F) -> Result<Solver>
where
    F: FnMut(&Solver, f64) -> ControlFlow<()>,
{
    if !(config.kernel.alpha_exp > 0.0) {
        return domain("alpha_exp must be positive");
    }
    let mut solver = Solver::new(game.clone(), config.kernel.clone(), config.seed)?;
    let rule = config.update_rule();
    let budget_ms = config.max_seconds.map(|s| s * 1e3);
    let mut wall_ms = 0.0;
    while solver.len() < config.max_samples {
        let t0 = Instant::now();
        solver.igame_step(rule.clone())?;
        wall_ms += t0.elapsed().as_secs_f64() * 1e3;
        let out_of_time = budget_ms.is_some_and(|b| wall_ms >= b);
        let last = out_of_time || solver.len() == config.max_samples;
        if (last || config.checkpoints.hit(solver.len())) && on_checkpoint(&solver, wall_ms).is_break() {
            break;
        }
        if out_of_time {
            break;
        }
    }
    Ok(solver)
}

impl SolutionTrace {
    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    /// Writes `samples.csv`, one `values_<n>.csv` per checkpoint and
    /// `schedule.csv`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        crate::sampling::write_points_csv(File::create(dir.join("samples.csv"))?, self.dim, &self.samples)?;
        for cp in &self.checkpoints {
            write_values_csv(File::create(dir.join(format!("values_{}.csv", cp.n)))?, &cp.state)?;
        }
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("schedule.csv"))?));
        w.write_record(["n", "d", "h", "kappa", "dilation", "wall_ms"])?;
        for cp in &self.checkpoints {
            let s = &cp.schedule;
            w.write_record(&[
                cp.n.to_string(),
                format!("{:?}", s.d),
                format!("{:?}", s.h),
                format!("{:?}", s.kappa),
                format!("{:?}", s.dilation),
                format!("{:.3}", cp.wall_ms),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `id,v,u,child,flag`; absent labels are empty fields.
pub fn write_values_csv<W: Write>(out: W, state: &SolverState) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(out));
    w.write_record(["id", "v", "u", "child", "flag"])?;
    let opt = |o: Option<usize>| o.map_or_else(String::new, |x| x.to_string());
    for i in 0..state.len() {
        w.write_record(&[
            i.to_string(),
            format!("{:?}", state.values[i]),
            opt(state.controls[i]),
            opt(state.child[i]),
            state.flag[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::make_fence_escape;
    use crate::pools::PoolMode;

    fn fence_config() -> SolverConfig {
        SolverConfig {
            game: "fence".into(),
            seed: 7,
            max_samples: 100,
            checkpoints: Cadence::Every(1),
            kernel: KernelOptions { pools: PoolMode::Grid { angel: 3, demon: 3 }, ..KernelOptions::default() },
            ..SolverConfig::default()
        }
    }

    #[test]
    fn fence_trace_shape() {
        let trace = run(&make_fence_escape(), &fence_config()).unwrap();
        assert_eq!(trace.checkpoints.len(), 100);
        for cp in &trace.checkpoints {
            assert!(cp.state.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        assert!(trace.checkpoints.windows(2).all(|w| w[0].n < w[1].n));
    }

    #[test]
    fn zero_budget_gives_empty_trace() {
        let cfg = SolverConfig { max_samples: 0, ..fence_config() };
        assert!(run(&make_fence_escape(), &cfg).unwrap().is_empty());
    }

    #[test]
    fn geometric_cadence_adds_final() {
        let cfg = SolverConfig { max_samples: 20, checkpoints: Cadence::Geometric, ..fence_config() };
        let ns: Vec<usize> = run(&make_fence_escape(), &cfg).unwrap().checkpoints.iter().map(|c| c.n).collect();
        assert_eq!(ns, vec![1, 2, 4, 8, 16, 20]);
    }

    #[test]
    fn reruns_are_identical() {
        for mode in [Algorithm::Igame, Algorithm::Igamestar] {
            let cfg = SolverConfig { mode, max_staleness: 3, ..fence_config() };
            let a = run(&make_fence_escape(), &cfg).unwrap();
            let b = run(&make_fence_escape(), &cfg).unwrap();
            assert_eq!(a.samples, b.samples);
            for (x, y) in a.checkpoints.iter().zip(&b.checkpoints) {
                assert_eq!(x.state, y.state);
            }
        }
    }

    #[test]
    fn trace_directory_layout() {
        let cfg = SolverConfig { max_samples: 8, checkpoints: Cadence::Geometric, ..fence_config() };
        let trace = run(&make_fence_escape(), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        trace.write_dir(dir.path()).unwrap();
        for f in ["samples.csv", "schedule.csv", "values_1.csv", "values_8.csv"] {
            assert!(dir.path().join(f).exists(), "{f}");
        }
        let sched = fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
        assert!(sched.starts_with("n,d,h,kappa,dilation,wall_ms"));
        assert_eq!(sched.lines().count(), 5);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = SolverConfig {
            mode: Algorithm::Igamestar,
            checkpoints: Cadence::At(vec![10, 20]),
            max_seconds: Some(2.5),
            ..fence_config()
        };
        let text = toml::to_string(&cfg).unwrap();
        let back: SolverConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: SolverConfig = toml::from_str("game = \"chauffeur\"\nmode = \"igamestar\"").unwrap();
        assert_eq!(partial.max_staleness, 50);
        partial.validate().unwrap();
    }
}
