//! Outcome maps of successive sampling-solver pursuers against a fixed grid
//! evader.

use std::fs::File;
use std::ops::ControlFlow;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::game::game_by_id;
use crate::geometry::BoxRegion;
use crate::kernel::{run_with, Algorithm, Cadence, KernelOptions, SolverConfig};
use crate::multigrid::GridSolution;
use crate::policy::{outcome_map, OutcomeMap, Policy, Role, SampleField, TimeLimit};
use crate::pools::PoolMode;

use super::reference::GridReference;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutcomeConfig {
    /// Angel solver; `max_samples` and `checkpoints` come from `checkpoints`.
    pub pursuer: SolverConfig,
    /// Sample counts at which the pursuer policy is frozen.
    pub checkpoints: Vec<usize>,
    /// Grid solution driving the demon.
    pub evader: GridReference,
    pub region: BoxRegion,
    pub shape: Vec<usize>,
    pub dt: f64,
    pub time_limit: TimeLimit,
}

impl Default for OutcomeConfig {
    fn default() -> Self {
        Self {
            pursuer: SolverConfig {
                game: "chauffeur".into(),
                mode: Algorithm::Igamestar,
                max_staleness: 50,
                kernel: KernelOptions { pools: PoolMode::Grid { angel: 9, demon: 16 }, ..KernelOptions::default() },
                ..SolverConfig::default()
            },
            checkpoints: vec![500, 1500, 4000],
            evader: GridReference { shape: vec![50, 50], ..GridReference::chauffeur_benchmark() },
            region: BoxRegion::cube(2, -1.0, 1.0).expect("static box"),
            shape: vec![25, 25],
            dt: 0.01,
            time_limit: TimeLimit::Fixed(2.5),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OutcomeSeries {
    /// `(sample count, map)` in checkpoint order.
    pub maps: Vec<(usize, OutcomeMap)>,
}

/// Freezes the pursuer at each checkpoint and plays it against the evader
/// from every node of the initial-state lattice.
pub fn run_outcome_maps(config: &OutcomeConfig, evader_field: GridSolution) -> Result<OutcomeSeries> {
    let mut counts = config.checkpoints.clone();
    counts.sort_unstable();
    counts.dedup();
    let Some(&last) = counts.last() else { return domain("no outcome checkpoints") };
    let game = game_by_id(&config.pursuer.game)?;
    let evader = Policy::new(Arc::new(evader_field), config.evader.pools(&game), Role::Demon)?;
    let cfg = SolverConfig { max_samples: last, checkpoints: Cadence::At(counts.clone()), ..config.pursuer.clone() };

    let mut fields = Vec::new();
    let mut pools = None;
    let mut failure = None;
    run_with(&game, &cfg, |solver, _| {
        if counts.contains(&solver.len()) {
            match SampleField::from_solver(solver) {
                Ok(f) => fields.push((solver.len(), f)),
                Err(e) => {
                    failure = Some(e);
                    return ControlFlow::Break(());
                }
            }
            pools = Some(solver.pools().clone());
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let pools = pools.expect("at least one checkpoint");
    let mut maps = Vec::new();
    for (n, field) in fields {
        let pursuer = Policy::new(Arc::new(field), pools.clone(), Role::Angel)?;
        let map = outcome_map(&game, &pursuer, &evader, &config.region, &config.shape, config.dt, config.time_limit)?;
        maps.push((n, map));
    }
    Ok(OutcomeSeries { maps })
}

impl OutcomeSeries {
    /// Capture counts never drop and timeout counts never rise.
    pub fn is_monotone(&self) -> bool {
        self.maps.windows(2).all(|w| {
            let (a, b) = (&w[0].1.counts, &w[1].1.counts);
            b.capture >= a.capture && b.timeout <= a.timeout
        })
    }

    /// `outcomes_<n>.csv` and `outcomes_<n>.json` per checkpoint.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (n, map) in &self.maps {
            map.write_csv(File::create(dir.join(format!("outcomes_{n}.csv")))?)?;
            std::fs::write(dir.join(format!("outcomes_{n}.json")), map.summary_json()?)?;
        }
        Ok(())
    }
}
