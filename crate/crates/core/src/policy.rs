//! Feedback policies read off a value field, closed-loop simulation and
//! outcome maps.

use std::io::{BufWriter, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::game::GameDef;
use crate::geometry::{BoxRegion, MAX_DIM};
use crate::kernel::{ball_min, par_map, Solver};
use crate::kruzkov::{kruzkov_inverse, KruzkovValue};
use crate::multigrid::{GridSolution, Lattice};
use crate::pools::ControlPools;
use crate::sampling::{GridIndex, PointSet};
use crate::schedule::Schedule;

/// Anything that can be interpolated by ball minima.
pub trait ValueField: Send + Sync {
    fn schedule(&self) -> &Schedule;

    /// Smallest value within `radius` of `x`, `None` for an empty ball.
    fn ball_min(&self, x: &[f64], radius: f64) -> Option<f64>;

    fn nearest_value(&self, x: &[f64]) -> f64;

    /// Ball minimum over the field's own dispersion radius, nearest value
    /// when that ball is empty.
    fn interpolate(&self, x: &[f64]) -> f64 {
        self.ball_min(x, self.schedule().d).unwrap_or_else(|| self.nearest_value(x))
    }
}

impl ValueField for GridSolution {
    fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    fn ball_min(&self, x: &[f64], radius: f64) -> Option<f64> {
        ball_min(&self.lattice, &self.values, x, radius, self.values.len()).map(|(v, _)| v)
    }

    fn nearest_value(&self, x: &[f64]) -> f64 {
        self.values[self.lattice.nearest(x).expect("nonempty lattice")]
    }

    fn interpolate(&self, x: &[f64]) -> f64 {
        self.evaluate(x)
    }
}

/// A frozen copy of a sample set and its values.
#[derive(Clone, Debug)]
pub struct SampleField {
    dim: usize,
    coords: Vec<f64>,
    values: Vec<f64>,
    schedule: Schedule,
    index: GridIndex,
}

impl SampleField {
    pub fn new(domain: &BoxRegion, coords: Vec<f64>, values: Vec<f64>, schedule: Schedule) -> Result<Self> {
        let dim = domain.dim();
        if coords.len() != dim * values.len() || values.is_empty() {
            return domain_err("sample field needs one value per point and at least one point");
        }
        let mut index = GridIndex::new(domain, schedule.d.max(domain.diameter() * 1e-3));
        for (i, p) in coords.chunks_exact(dim).enumerate() {
            index.insert(i, p);
        }
        Ok(Self { dim, coords, values, schedule, index })
    }

    /// Snapshot of the solver's current values.
    pub fn from_solver(solver: &Solver) -> Result<Self> {
        let Some(s) = solver.schedule() else { return domain_err("solver has not run yet") };
        Self::new(solver.game().domain(), solver.cloud().coords().to_vec(), solver.values().to_vec(), *s)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn domain_err<T>(msg: &str) -> Result<T> {
    domain(msg)
}

impl PointSet for SampleField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    fn for_each_in_ball<F: FnMut(usize)>(&self, center: &[f64], radius: f64, visit: F) {
        self.index.query(&self.coords, center, radius, visit);
    }
}

impl ValueField for SampleField {
    fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    fn ball_min(&self, x: &[f64], radius: f64) -> Option<f64> {
        ball_min(self, &self.values, x, radius, self.values.len()).map(|(v, _)| v)
    }

    fn nearest_value(&self, x: &[f64]) -> f64 {
        let mut r = self.schedule.d.max(1e-9);
        loop {
            let mut best: Option<(f64, usize)> = None;
            self.for_each_in_ball(x, r, |id| {
                let d = crate::geometry::dist2(self.point(id), x);
                if best.is_none_or(|(bd, bid)| d < bd || (d == bd && id < bid)) {
                    best = Some((d, id));
                }
            });
            if let Some((_, id)) = best {
                return self.values[id];
            }
            r *= 2.0;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Angel,
    Demon,
}

/// One-step min-max feedback policy on a value field.
#[derive(Clone)]
pub struct Policy {
    pub field: Arc<dyn ValueField>,
    pub pools: ControlPools,
    pub role: Role,
    pub schedule: Schedule,
}

impl Policy {
    pub fn new(field: Arc<dyn ValueField>, pools: ControlPools, role: Role) -> Result<Self> {
        if !pools.is_ready() {
            return domain_err("policy pools must be nonempty");
        }
        let schedule = *field.schedule();
        Ok(Self { field, pools, role, schedule })
    }
}

/// Angel: `argmin_u max_w`, demon: `argmax_w min_u` of the ball-min value
/// around `x + h f(x, u, w)`. Ties go to the lowest pool index.
pub fn policy_action(policy: &Policy, game: &GameDef, x: &[f64]) -> Vec<f64> {
    let idx = policy_action_index(policy, game, x);
    match policy.role {
        Role::Angel => policy.pools.angel.get(idx).to_vec(),
        Role::Demon => policy.pools.demon.get(idx).to_vec(),
    }
}

pub fn policy_action_index(policy: &Policy, game: &GameDef, x: &[f64]) -> usize {
    let s = &policy.schedule;
    let dim = x.len();
    let mut f = [0.0; MAX_DIM];
    let mut succ = [0.0; MAX_DIM];
    let mut q = |u: &[f64], w: &[f64]| {
        game.dynamics_into(x, u, w, &mut f[..dim]);
        for i in 0..dim {
            succ[i] = x[i] + s.h * f[i];
        }
        policy.field.ball_min(&succ[..dim], s.dilation).unwrap_or(1.0)
    };
    let pools = &policy.pools;
    let mut best = (0, 0.0);
    match policy.role {
        Role::Angel => {
            for (i, u) in pools.angel.iter().enumerate() {
                let worst = pools.demon.iter().map(|w| q(u, w)).fold(f64::NEG_INFINITY, f64::max);
                if i == 0 || worst < best.1 {
                    best = (i, worst);
                }
            }
        }
        Role::Demon => {
            for (i, w) in pools.demon.iter().enumerate() {
                let least = pools.angel.iter().map(|u| q(u, w)).fold(f64::INFINITY, f64::min);
                if i == 0 || least > best.1 {
                    best = (i, least);
                }
            }
        }
    }
    best.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Capture,
    Escape,
    Timeout,
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Capture => "capture",
            OutcomeKind::Escape => "escape",
            OutcomeKind::Timeout => "timeout",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutcome {
    pub kind: OutcomeKind,
    pub time: f64,
    pub trajectory: Option<Vec<Vec<f64>>>,
}

/// Forward-Euler rollout with both policies re-queried every `dt`. The goal
/// is checked before the free set, and both before the time limit.
pub fn simulate(
    game: &GameDef,
    angel: &Policy,
    demon: &Policy,
    x0: &[f64],
    dt: f64,
    t_max: f64,
    record: bool,
) -> Result<SimOutcome> {
    if !(dt > 0.0 && t_max > 0.0) {
        return domain_err("dt and t_max must be positive");
    }
    let mut x = x0.to_vec();
    let mut f = vec![0.0; x.len()];
    let mut path = record.then(|| vec![x.clone()]);
    let mut steps = 0u64;
    loop {
        let t = steps as f64 * dt;
        let kind = if game.in_goal(&x) {
            Some(OutcomeKind::Capture)
        } else if !game.in_free(&x) {
            Some(OutcomeKind::Escape)
        } else if t >= t_max {
            Some(OutcomeKind::Timeout)
        } else {
            None
        };
        if let Some(kind) = kind {
            let time = if kind == OutcomeKind::Timeout { t_max } else { t };
            return Ok(SimOutcome { kind, time, trajectory: path });
        }
        let u = policy_action(angel, game, &x);
        let w = policy_action(demon, game, &x);
        game.dynamics_into(&x, &u, &w, &mut f);
        for (xi, fi) in x.iter_mut().zip(&f) {
            *xi += dt * fi;
        }
        steps += 1;
        if let Some(p) = path.as_mut() {
            p.push(x.clone());
        }
    }
}

/// Horizon of an outcome-map run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeLimit {
    Fixed(f64),
    /// `factor` times the angel field's time-to-go at the start when finite
    /// and below `cap`, else `cap`.
    FromValue { factor: f64, cap: f64 },
}

impl TimeLimit {
    pub fn resolve(self, angel: &Policy, x0: &[f64]) -> f64 {
        match self {
            TimeLimit::Fixed(t) => t,
            TimeLimit::FromValue { factor, cap } => {
                let v = angel.field.interpolate(x0).clamp(0.0, 1.0);
                let t = kruzkov_inverse(KruzkovValue::new(v).expect("clamped"));
                if t.is_finite() && t > 0.0 {
                    (factor * t).min(cap)
                } else {
                    cap
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub capture: usize,
    pub escape: usize,
    pub timeout: usize,
}

impl OutcomeCounts {
    pub fn total(&self) -> usize {
        self.capture + self.escape + self.timeout
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeCell {
    pub index: Vec<usize>,
    pub x0: Vec<f64>,
    pub kind: OutcomeKind,
    pub time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeMap {
    pub shape: Vec<usize>,
    pub cells: Vec<OutcomeCell>,
    pub counts: OutcomeCounts,
}

/// Runs [`simulate`] from every node of a lattice over `region`.
pub fn outcome_map(
    game: &GameDef,
    angel: &Policy,
    demon: &Policy,
    region: &BoxRegion,
    shape: &[usize],
    dt: f64,
    limit: TimeLimit,
) -> Result<OutcomeMap> {
    let lattice = Lattice::new(region.clone(), shape)?;
    let results = par_map(lattice.len(), |i| {
        let x0 = lattice.point(i);
        simulate(game, angel, demon, x0, dt, limit.resolve(angel, x0), false)
    });
    let mut cells = Vec::with_capacity(results.len());
    let mut counts = OutcomeCounts::default();
    for (i, r) in results.into_iter().enumerate() {
        let out = r?;
        match out.kind {
            OutcomeKind::Capture => counts.capture += 1,
            OutcomeKind::Escape => counts.escape += 1,
            OutcomeKind::Timeout => counts.timeout += 1,
        }
        let mut index = vec![0; shape.len()];
        let mut rest = i;
        for a in (0..shape.len()).rev() {
            index[a] = rest % shape[a];
            rest /= shape[a];
        }
        cells.push(OutcomeCell { index, x0: lattice.point(i).to_vec(), kind: out.kind, time: out.time });
    }
    Ok(OutcomeMap { shape: shape.to_vec(), cells, counts })
}

impl OutcomeMap {
    /// `i,j,..,x0,x1,..,kind,time`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let dim = self.shape.len();
        let mut w = csv::Writer::from_writer(BufWriter::new(out));
        let names = ["i", "j", "k", "l", "m", "n", "o", "p"];
        let mut header: Vec<String> = names[..dim].iter().map(|s| s.to_string()).collect();
        header.extend((0..dim).map(|a| format!("x{a}")));
        header.extend(["kind".to_string(), "time".to_string()]);
        w.write_record(&header)?;
        for c in &self.cells {
            let mut row: Vec<String> = c.index.iter().map(|i| i.to_string()).collect();
            row.extend(c.x0.iter().map(|x| format!("{x:?}")));
            row.push(c.kind.as_str().into());
            row.push(format!("{:?}", c.time));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.counts)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_homicidal_chauffeur, make_toy_1d};
    use crate::kruzkov::kruzkov;
    use crate::multigrid::{solve_fixed_grid, GridOptions};
    use crate::pools::{ControlPool, PoolMode};

    /// A field with `v(y) = Ψ(y)` on a fine 1-D lattice.
    fn kruzkov_field() -> Arc<dyn ValueField> {
        let lattice = Lattice::new(BoxRegion::cube(1, 0.0, 1.0).unwrap(), &[201]).unwrap();
        let values = (0..lattice.len()).map(|i| kruzkov(lattice.point(i)[0]).unwrap().get()).collect();
        let schedule = Schedule::new(lattice.dispersion(), 1.0, 0.0, 0.0).unwrap();
        Arc::new(GridSolution {
            game: "toy1d".into(),
            lattice,
            values,
            schedule,
            tol: 0.0,
            residuals: vec![],
            converged: true,
            wall_ms: 0.0,
            pool_sizes: (2, 1),
        })
    }

    #[test]
    fn angel_moves_downhill() {
        let g = make_toy_1d(vec![vec![1.0], vec![-1.0]]);
        let pools = ControlPools::new(&g, PoolMode::default());
        let p = Policy::new(kruzkov_field(), pools, Role::Angel).unwrap();
        assert_eq!(policy_action(&p, &g, &[0.5]), vec![-1.0]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // Constant field: every control ties.
        let g = make_toy_1d(vec![vec![1.0], vec![-1.0]]);
        let lattice = Lattice::new(BoxRegion::cube(1, 0.0, 1.0).unwrap(), &[11]).unwrap();
        let schedule = Schedule::new(lattice.dispersion(), 1.0, 0.0, 0.0).unwrap();
        let field: Arc<dyn ValueField> = Arc::new(GridSolution {
            game: "toy1d".into(),
            lattice,
            values: vec![0.5; 11],
            schedule,
            tol: 0.0,
            residuals: vec![],
            converged: true,
            wall_ms: 0.0,
            pool_sizes: (2, 1),
        });
        let pools = ControlPools::fixed(
            ControlPool::from_vectors(1, &[vec![1.0], vec![-1.0]]),
            ControlPool::from_vectors(1, &[vec![0.0], vec![0.0]]),
        );
        for role in [Role::Angel, Role::Demon] {
            let p = Policy::new(field.clone(), pools.clone(), role).unwrap();
            assert_eq!(policy_action_index(&p, &g, &[0.5]), 0);
        }
    }

    fn chauffeur_policies() -> (GameDef, Policy, Policy) {
        let g = make_homicidal_chauffeur();
        let pools = ControlPools::new(&g, PoolMode::Grid { angel: 5, demon: 8 });
        let sol = solve_fixed_grid(&g, &[30, 30], 1e-6, &pools, &GridOptions::default()).unwrap();
        let field: Arc<dyn ValueField> = Arc::new(sol);
        let a = Policy::new(field.clone(), pools.clone(), Role::Angel).unwrap();
        let d = Policy::new(field, pools, Role::Demon).unwrap();
        (g, a, d)
    }

    #[test]
    fn terminal_starts() {
        let (g, a, d) = chauffeur_policies();
        let cap = simulate(&g, &a, &d, &[0.01, 0.02], 0.01, 5.0, true).unwrap();
        assert_eq!((cap.kind, cap.time), (OutcomeKind::Capture, 0.0));
        assert_eq!(cap.trajectory.unwrap().len(), 1);
        let esc = simulate(&g, &a, &d, &[0.9, 0.9], 0.01, 5.0, false).unwrap();
        assert_eq!((esc.kind, esc.time), (OutcomeKind::Escape, 0.0));
        assert!(simulate(&g, &a, &d, &[0.3, 0.3], 0.0, 5.0, false).is_err());
    }

    #[test]
    fn timeout_reports_the_limit_and_reruns_match() {
        let (g, a, d) = chauffeur_policies();
        let r1 = simulate(&g, &a, &d, &[0.5, 0.1], 0.01, 0.05, true).unwrap();
        assert_eq!(r1.kind, OutcomeKind::Timeout);
        assert_eq!(r1.time, 0.05);
        let r2 = simulate(&g, &a, &d, &[0.5, 0.1], 0.01, 0.05, true).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn outcome_map_partition() {
        let (g, a, d) = chauffeur_policies();
        let inside = BoxRegion::cube(2, -0.02, 0.02).unwrap();
        let m = outcome_map(&g, &a, &d, &inside, &[4, 4], 0.01, TimeLimit::Fixed(1.0)).unwrap();
        assert_eq!(m.counts.capture, 16);
        let wide = BoxRegion::cube(2, -1.2, 1.2).unwrap();
        let m = outcome_map(&g, &a, &d, &wide, &[5, 5], 0.01, TimeLimit::Fixed(0.3)).unwrap();
        assert_eq!(m.counts.total(), 25);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 26);
    }

    #[test]
    fn sample_field_matches_brute_force() {
        let g = make_homicidal_chauffeur();
        let mut s = Solver::new(g, crate::kernel::KernelOptions::default(), 2).unwrap();
        for _ in 0..200 {
            s.igame_step(crate::kernel::UpdateRule::RoundRobin(5)).unwrap();
        }
        let f = SampleField::from_solver(&s).unwrap();
        for x in [[0.1, 0.2], [-0.7, 0.3], [0.0, -0.95]] {
            let r = 0.2;
            let brute = (0..f.len())
                .filter(|&i| crate::geometry::dist2(f.point(i), &x) <= r * r)
                .map(|i| f.values()[i])
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
            assert_eq!(f.ball_min(&x, r), brute);
        }
    }
}
