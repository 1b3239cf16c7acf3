//! The local value operator and ball-min interpolation.

use crate::game::GameDef;
use crate::geometry::MAX_DIM;
use crate::pools::ControlPools;
use crate::sampling::PointSet;
use crate::schedule::Schedule;

/// Result of one local value-iteration update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Backup {
    pub value: f64,
    /// Index into the angel pool of the minimizing control for the chosen
    /// demon control.
    pub control: usize,
    /// Sample attaining the inner minimum for the saddle pair, if any.
    pub child: Option<usize>,
}

/// Lowest value in `ℬ(center, radius)` among ids `< limit`, ties to the
/// lowest id. `None` when the ball holds no such sample.
pub fn ball_min<S: PointSet>(
    set: &S,
    values: &[f64],
    center: &[f64],
    radius: f64,
    limit: usize,
) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    set.for_each_in_ball(center, radius, |id| {
        if id >= limit {
            return;
        }
        let v = values[id];
        let better = match best {
            None => true,
            Some((bv, bid)) => v < bv || (v == bv && id < bid),
        };
        if better {
            best = Some((v, id));
        }
    });
    best
}

/// `F_n v(x)`: one backup of the discounted min-max problem at `x`.
///
/// For every demon control `w` (in pool order) the angel minimizes over its
/// pool the smallest value found within `dilation` of `x + h f(x, u, w)`; the
/// demon keeps the largest such minimum, ties to the first seen. An empty
/// ball counts as value 1. Once the running minimum for some `w` drops to the
/// best maximum found so far, that `w` cannot win and its scan stops.
///
/// `values` must cover every id of `set`.
pub fn value_update<S: PointSet>(
    x: &[f64],
    values: &[f64],
    schedule: &Schedule,
    pools: &ControlPools,
    set: &S,
    game: &GameDef,
) -> Backup {
    debug_assert!(pools.is_ready(), "control pools must be nonempty");
    debug_assert_eq!(values.len(), set.len());
    let dim = x.len();
    let mut f = [0.0; MAX_DIM];
    let mut succ = [0.0; MAX_DIM];
    let n = set.len();
    // (inner minimum, control, child) for the best demon control so far.
    let mut best: Option<(f64, usize, Option<usize>)> = None;
    for w in pools.demon.iter() {
        let mut row = (f64::INFINITY, 0, None);
        for (ui, u) in pools.angel.iter().enumerate() {
            game.dynamics_into(x, u, w, &mut f[..dim]);
            for i in 0..dim {
                succ[i] = x[i] + schedule.h * f[i];
            }
            let (m, child) = match ball_min(set, values, &succ[..dim], schedule.dilation, n) {
                Some((v, id)) => (v, Some(id)),
                None => (1.0, None),
            };
            if m < row.0 {
                row = (m, ui, child);
            }
            if matches!(best, Some((b, _, _)) if row.0 <= b) {
                break;
            }
        }
        if best.map_or(true, |(b, _, _)| row.0 > b) {
            best = Some(row);
        }
    }
    let (inner, control, child) = best.expect("nonempty demon pool");
    Backup { value: schedule.backup(inner), control, child }
}

/// The same backup written in the time domain:
/// `κ + max_w min_u min_{y ∈ ℬ} T(y)`, with an empty ball counting as `+∞`.
/// Kept separate from [`value_update`] so the two can be checked against each
/// other through the Kružkov transform.
pub fn time_update<S: PointSet>(
    x: &[f64],
    times: &[f64],
    schedule: &Schedule,
    pools: &ControlPools,
    set: &S,
    game: &GameDef,
) -> f64 {
    let dim = x.len();
    let mut f = vec![0.0; dim];
    let mut worst = f64::NEG_INFINITY;
    for w in pools.demon.iter() {
        let mut row = f64::INFINITY;
        for u in pools.angel.iter() {
            game.dynamics_into(x, u, w, &mut f);
            let succ: Vec<f64> = x.iter().zip(&f).map(|(xi, fi)| xi + schedule.h * fi).collect();
            for id in set.ball_ids(&succ, schedule.dilation) {
                row = row.min(times[id]);
            }
        }
        worst = worst.max(row);
    }
    schedule.kappa + worst
}
