//! The value operator on a fixed point set with a fixed schedule, and its
//! fixed-point iteration.

use crate::error::{domain, Result};
use crate::game::GameDef;
use crate::pools::ControlPools;
use crate::sampling::PointSet;
use crate::schedule::Schedule;

use super::boundary::{GoalTracker, HaloRule, NodeKind};
use super::par_map;
use super::update::{time_update, value_update};

/// `F` restricted to one point set. Non-active nodes get their boundary
/// values from [`FrozenOperator::impose_boundary`] (goal 0, exterior 1, halo
/// per [`HaloRule`]); [`FrozenOperator::apply`] leaves them untouched.
pub struct FrozenOperator<'a, S: PointSet> {
    set: &'a S,
    game: &'a GameDef,
    schedule: Schedule,
    pools: &'a ControlPools,
    kinds: Vec<NodeKind>,
    halo_rule: HaloRule,
}

/// Outcome of [`FrozenOperator::solve`].
#[derive(Clone, Debug)]
pub struct FixedPoint {
    pub values: Vec<f64>,
    /// Sup-norm change of each sweep.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl FixedPoint {
    pub fn sweeps(&self) -> usize {
        self.residuals.len()
    }
}

impl<'a, S: PointSet> FrozenOperator<'a, S> {
    pub fn new(set: &'a S, game: &'a GameDef, schedule: Schedule, pools: &'a ControlPools) -> Result<Self> {
        if !pools.is_ready() {
            return domain("control pools must be nonempty");
        }
        let goals = GoalTracker::from_set(set, game);
        let kinds = (0..set.len()).map(|i| goals.kind(i, schedule.goal_halo)).collect();
        Ok(Self { set, game, schedule, pools, kinds, halo_rule: HaloRule::default() })
    }

    pub fn with_halo_rule(mut self, rule: HaloRule) -> Self {
        self.halo_rule = rule;
        self
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn len(&self) -> usize {
        self.kinds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kinds.is_empty()
    }

    pub fn impose_boundary(&self, v: &mut [f64]) {
        for (vi, k) in v.iter_mut().zip(&self.kinds) {
            if let Some(b) = self.halo_rule.boundary_value(*k) {
                *vi = b;
            }
        }
    }

    /// One synchronous sweep; every read comes from `v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.len());
        par_map(self.len(), |i| match self.kinds[i] {
            NodeKind::Active => {
                value_update(self.set.point(i), v, &self.schedule, self.pools, self.set, self.game).value
            }
            _ => v[i],
        })
    }

    /// The same sweep on minimum times.
    pub fn apply_time(&self, t: &[f64]) -> Vec<f64> {
        assert_eq!(t.len(), self.len());
        par_map(self.len(), |i| match self.kinds[i] {
            NodeKind::Active => time_update(self.set.point(i), t, &self.schedule, self.pools, self.set, self.game),
            _ => t[i],
        })
    }

    /// Iterates from `v0` (boundary imposed first) until a sweep changes no
    /// entry by more than `tol`, or `max_sweeps` is reached.
    pub fn solve(&self, mut v0: Vec<f64>, tol: f64, max_sweeps: usize) -> Result<FixedPoint> {
        if !(tol > 0.0) {
            return domain(format!("tolerance must be positive, got {tol}"));
        }
        if v0.len() != self.len() {
            return domain("initial vector has the wrong length");
        }
        self.impose_boundary(&mut v0);
        let mut v = v0;
        let mut residuals = Vec::new();
        let mut converged = false;
        while residuals.len() < max_sweeps {
            let next = self.apply(&v);
            let r = sup_distance(&next, &v);
            v = next;
            residuals.push(r);
            if r <= tol {
                converged = true;
                break;
            }
        }
        Ok(FixedPoint { values: v, residuals, converged })
    }
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
