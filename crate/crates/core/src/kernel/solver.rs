//! The incremental solver: one sample, one schedule and one sweep per
//! iteration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::game::GameDef;
use crate::pools::{ControlPools, PoolMode};
use crate::sampling::{PointSet, SampleCloud};
use crate::schedule::{DilationRule, Schedule};

use super::boundary::{GoalTracker, HaloRule, NodeKind};
use super::par_map;
use super::state::{cascade_schedule, round_robin_schedule, SolverState, UpdateSet};
use super::update::{ball_min, value_update};

const MAX_DRAW_ATTEMPTS: usize = 1_000_000;

/// What a sample outside `K_n` does in an iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Propagation {
    /// Take the smallest previous value within the previous dilation radius
    /// and point the child at it.
    BallMin,
    /// Keep the previous value and child.
    #[default]
    Hold,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelOptions {
    pub alpha_exp: f64,
    pub dilation: DilationRule,
    pub propagation: Propagation,
    pub pools: PoolMode,
    /// Probe lattice resolution of the dispersion estimate (2-D and up).
    pub probes_per_axis: usize,
    pub halo: HaloRule,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            alpha_exp: 1.0,
            dilation: DilationRule::default(),
            propagation: Propagation::default(),
            pools: PoolMode::default(),
            probes_per_axis: crate::sampling::DEFAULT_PROBES_PER_AXIS,
            halo: HaloRule::default(),
        }
    }
}

/// How `K_n` is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum UpdateRule {
    /// Every sample.
    Synchronous,
    /// The new sample plus a rotating `1/(D+1)` share of the rest.
    RoundRobin(u32),
    /// Child/flag cascade with staleness bound `D`.
    Cascade(u32),
    Explicit(UpdateSet),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub new_id: usize,
    /// Number of value-iteration updates performed.
    pub updated: usize,
    pub schedule: Schedule,
}

pub struct Solver {
    game: GameDef,
    options: KernelOptions,
    cloud: SampleCloud,
    goals: GoalTracker,
    pools: ControlPools,
    state: SolverState,
    schedule: Option<Schedule>,
    rng: ChaCha8Rng,
}

impl Solver {
    pub fn new(game: GameDef, options: KernelOptions, seed: u64) -> Result<Self> {
        if !(options.alpha_exp > 0.0) {
            return domain(format!("alpha exponent must be positive, got {}", options.alpha_exp));
        }
        let cloud = SampleCloud::for_game(&game, options.probes_per_axis);
        let pools = ControlPools::new(&game, options.pools.clone());
        Ok(Self {
            game,
            options,
            cloud,
            goals: GoalTracker::default(),
            pools,
            state: SolverState::default(),
            schedule: None,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Replaces the control pools, e.g. with fixed grids.
    pub fn with_pools(mut self, pools: ControlPools) -> Self {
        self.pools = pools;
        self
    }

    pub fn game(&self) -> &GameDef {
        &self.game
    }

    pub fn options(&self) -> &KernelOptions {
        &self.options
    }

    pub fn cloud(&self) -> &SampleCloud {
        &self.cloud
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn values(&self) -> &[f64] {
        &self.state.values
    }

    pub fn pools(&self) -> &ControlPools {
        &self.pools
    }

    /// Schedule of the latest iteration.
    pub fn schedule(&self) -> Option<&Schedule> {
        self.schedule.as_ref()
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn node_kind(&self, id: usize) -> Option<NodeKind> {
        let s = self.schedule?;
        (id < self.goals.len()).then(|| self.goals.kind(id, s.goal_halo))
    }

    /// Uniform draw from the domain, rejected until it lies in the free set
    /// or the goal and is not already a sample.
    pub fn draw_sample(&mut self) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.game.dim()];
        for _ in 0..MAX_DRAW_ATTEMPTS {
            self.game.domain().sample_into(&mut self.rng, &mut y);
            if (self.game.in_free(&y) || self.game.in_goal(&y)) && self.cloud.ball_query(&y, 0.0).is_empty() {
                return Ok(y);
            }
        }
        domain("could not draw a sample in the free set")
    }

    /// One iteration of the basic algorithm with the given `K_n` rule.
    pub fn igame_step(&mut self, rule: UpdateRule) -> Result<StepReport> {
        let y = self.draw_sample()?;
        self.step_with_sample(&y, rule)
    }

    /// One iteration of the cascade variant with staleness bound `d`.
    pub fn igamestar_step(&mut self, d: u32) -> Result<StepReport> {
        self.igame_step(UpdateRule::Cascade(d))
    }

    /// One iteration with a caller-chosen new sample.
    pub fn step_with_sample(&mut self, y: &[f64], rule: UpdateRule) -> Result<StepReport> {
        let new_id = self.cloud.insert(y)?;
        self.goals.push(&self.cloud, &self.game, new_id);
        self.pools.grow(&self.game, &mut self.rng);
        if !self.pools.is_ready() {
            return Err(Error::Domain("control pools must be nonempty".into()));
        }
        let sched = self.options.dilation.schedule(self.cloud.dispersion(), self.options.alpha_exp, &self.game)?;
        let prev_radius = self.schedule.map_or(sched.dilation, |p| p.dilation);
        let prev_halo = self.schedule.map(|p| p.goal_halo);
        self.cloud.tune_index(sched.dilation.min(prev_radius));
        self.state.push(self.goals.initial_value(new_id, sched.goal_halo, self.options.halo));

        let n = self.cloud.len();
        let k = match rule {
            UpdateRule::Synchronous => None,
            UpdateRule::RoundRobin(d) => Some(round_robin_schedule(n, d, self.state.iteration, new_id)),
            UpdateRule::Cascade(d) => Some(cascade_schedule(&self.state, d, new_id)),
            UpdateRule::Explicit(set) => Some(set),
        };
        let mask = k.map(|set| set.mask(n));

        let state = &self.state;
        let snapshot = &state.values;
        let (cloud, goals, pools, game) = (&self.cloud, &self.goals, &self.pools, &self.game);
        let (propagation, halo_rule) = (self.options.propagation, self.options.halo);
        let outs = par_map(n, |i| {
            let kind = goals.kind(i, sched.goal_halo);
            // A sample leaving the shrinking halo is refreshed at once.
            let released = i != new_id
                && kind == NodeKind::Active
                && prev_halo.is_some_and(|h| goals.kind(i, h) == NodeKind::Halo);
            let in_k = released || mask.as_ref().map_or(true, |m| m[i]);
            let stale = state.flag[i].saturating_add(1);
            match kind {
                NodeKind::Goal | NodeKind::Exterior | NodeKind::Halo => {
                    let v = match (kind, halo_rule) {
                        (NodeKind::Halo, HaloRule::Target) => 0.0,
                        _ => snapshot[i],
                    };
                    (v, state.controls[i], state.child[i], if in_k { 0 } else { stale }, false)
                }
                NodeKind::Active if in_k => {
                    let b = value_update(cloud.point(i), snapshot, &sched, pools, cloud, game);
                    (b.value, Some(b.control), b.child, 0, true)
                }
                NodeKind::Active => match propagation {
                    Propagation::BallMin => match ball_min(cloud, snapshot, cloud.point(i), prev_radius, new_id) {
                        Some((v, z)) => (v, state.controls[i], Some(z), stale, false),
                        None => (snapshot[i], state.controls[i], state.child[i], stale, false),
                    },
                    Propagation::Hold => (snapshot[i], state.controls[i], state.child[i], stale, false),
                },
            }
        });

        let mut updated = 0;
        for (i, (v, u, c, f, vi)) in outs.into_iter().enumerate() {
            self.state.values[i] = v;
            self.state.controls[i] = u;
            self.state.child[i] = c;
            self.state.flag[i] = f;
            updated += vi as usize;
        }
        self.state.iteration += 1;
        self.schedule = Some(sched);
        Ok(StepReport { new_id, updated, schedule: sched })
    }
}
