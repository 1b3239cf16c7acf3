//! Classification of samples into goal, halo, exterior and active nodes.

use crate::game::GameDef;
use crate::geometry::dist2;
use crate::sampling::PointSet;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    /// Inside the open goal; value 0 forever.
    Goal,
    /// Outside the goal but within the goal halo; not updated.
    Halo,
    /// Outside both the free set and the goal; value 1 forever.
    Exterior,
    /// Receives value updates.
    Active,
}

/// Value carried by halo samples.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaloRule {
    /// Halo samples keep what they hold; new ones start at 1.
    #[default]
    Hold,
    /// The halo is part of the discrete target: value 0.
    Target,
}

impl HaloRule {
    /// Boundary value of a non-active node in a fixed-point solve.
    pub fn boundary_value(self, kind: NodeKind) -> Option<f64> {
        match (kind, self) {
            (NodeKind::Goal, _) | (NodeKind::Halo, HaloRule::Target) => Some(0.0),
            (NodeKind::Exterior, _) | (NodeKind::Halo, HaloRule::Hold) => Some(1.0),
            (NodeKind::Active, _) => None,
        }
    }
}

/// Per-sample goal distance, maintained as samples arrive. Uses the game's
/// exact distance when it has one, otherwise the distance to the nearest
/// goal sample seen so far.
#[derive(Clone, Debug, Default)]
pub struct GoalTracker {
    dist: Vec<f64>,
    goal: Vec<bool>,
    exterior: Vec<bool>,
    goal_ids: Vec<usize>,
}

impl GoalTracker {
    pub fn from_set<S: PointSet>(set: &S, game: &GameDef) -> Self {
        let mut t = Self::default();
        for id in 0..set.len() {
            t.push(set, game, id);
        }
        t
    }

    /// Registers sample `id`, which must be the next id of `set`.
    pub fn push<S: PointSet>(&mut self, set: &S, game: &GameDef, id: usize) {
        debug_assert_eq!(id, self.dist.len());
        let x = set.point(id);
        let in_goal = game.in_goal(x);
        self.goal.push(in_goal);
        self.exterior.push(!in_goal && !game.in_free(x));
        let d = match game.goal_distance(x) {
            Some(d) => d,
            None if in_goal => {
                for (j, dj) in self.dist.iter_mut().enumerate() {
                    *dj = dj.min(dist2(set.point(j), x).sqrt());
                }
                0.0
            }
            None => self
                .goal_ids
                .iter()
                .map(|&g| dist2(set.point(g), x).sqrt())
                .fold(f64::INFINITY, f64::min),
        };
        if in_goal {
            self.goal_ids.push(id);
        }
        self.dist.push(d);
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn is_goal(&self, id: usize) -> bool {
        self.goal[id]
    }

    pub fn distance(&self, id: usize) -> f64 {
        self.dist[id]
    }

    pub fn kind(&self, id: usize, halo: f64) -> NodeKind {
        if self.goal[id] {
            NodeKind::Goal
        } else if self.exterior[id] {
            NodeKind::Exterior
        } else if self.dist[id] <= halo {
            NodeKind::Halo
        } else {
            NodeKind::Active
        }
    }

    /// Value of a new sample: 0 in the goal (and in the halo under
    /// [`HaloRule::Target`]), 1 elsewhere.
    pub fn initial_value(&self, id: usize, halo: f64, rule: HaloRule) -> f64 {
        rule.boundary_value(self.kind(id, halo)).unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::make_toy_1d;
    use crate::geometry::BoxRegion;
    use crate::sampling::SampleCloud;

    #[test]
    fn toy_classification() {
        let g = make_toy_1d(vec![vec![-1.0]]);
        let mut c = SampleCloud::new(BoxRegion::cube(1, 0.0, 1.0).unwrap(), &|_| true, 16);
        for p in [0.05, 0.15, 0.5] {
            c.insert(&[p]).unwrap();
        }
        let t = GoalTracker::from_set(&c, &g);
        assert_eq!(t.kind(0, 0.1), NodeKind::Goal);
        assert_eq!(t.kind(1, 0.1), NodeKind::Halo);
        assert_eq!(t.kind(1, 0.01), NodeKind::Active);
        assert_eq!(t.kind(2, 0.1), NodeKind::Active);
        assert_eq!(t.initial_value(0, 0.1, HaloRule::Hold), 0.0);
        assert_eq!(t.initial_value(1, 0.1, HaloRule::Hold), 1.0);
        assert_eq!(t.initial_value(1, 0.1, HaloRule::Target), 0.0);
        assert_eq!(t.initial_value(2, 0.1, HaloRule::Target), 1.0);
    }

    #[test]
    fn sample_based_distance_without_exact_metric() {
        let base = make_toy_1d(vec![vec![-1.0]]);
        let g = crate::game::GameDef::builder("toy-nodist", BoxRegion::cube(1, 0.0, 1.0).unwrap())
            .dynamics(|_x, u, _w, out| out[0] = u[0])
            .angel_controls(base.angel_controls().clone())
            .demon_controls(base.demon_controls().clone())
            .goal(|x| x[0] < 0.1)
            .speed_bound(1.0)
            .build()
            .unwrap();
        let mut c = SampleCloud::new(BoxRegion::cube(1, 0.0, 1.0).unwrap(), &|_| true, 16);
        let mut t = GoalTracker::default();
        for (id, p) in [0.5, 0.3, 0.08].into_iter().enumerate() {
            c.insert(&[p]).unwrap();
            t.push(&c, &g, id);
        }
        assert!((t.distance(0) - 0.42).abs() < 1e-12);
        assert!((t.distance(1) - 0.22).abs() < 1e-12);
        assert_eq!(t.distance(2), 0.0);
    }
}
