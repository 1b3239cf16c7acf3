//! Fixed-grid and coarse-to-fine baselines. The lattice plays the role of
//! the sample set, so the grid and sampling solvers share one operator.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::ControlFlow;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::game::GameDef;
use crate::geometry::{dist2, BoxRegion};
use crate::kernel::{ball_min, FrozenOperator, HaloRule};
use crate::pools::ControlPools;
use crate::sampling::PointSet;
use crate::schedule::{DilationRule, Schedule};

/// Regular lattice with nodes on both faces of every axis, row-major with the
/// last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    domain: BoxRegion,
    shape: Vec<usize>,
    spacing: Vec<f64>,
    coords: Vec<f64>,
}

impl Lattice {
    pub fn new(domain: BoxRegion, shape: &[usize]) -> Result<Self> {
        if shape.len() != domain.dim() {
            return domain_err("lattice shape must match the domain dimension");
        }
        if shape.iter().any(|&k| k < 2) {
            return domain_err("lattice needs at least two nodes per axis");
        }
        let spacing: Vec<f64> = (0..shape.len()).map(|i| domain.extent(i) / (shape[i] - 1) as f64).collect();
        let total: usize = shape.iter().product();
        let dim = shape.len();
        let mut coords = vec![0.0; total * dim];
        let mut idx = vec![0usize; dim];
        for node in 0..total {
            for a in 0..dim {
                coords[node * dim + a] = if idx[a] == shape[a] - 1 {
                    domain.hi()[a]
                } else {
                    domain.lo()[a] + spacing[a] * idx[a] as f64
                };
            }
            for a in (0..dim).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(Self { domain, shape: shape.to_vec(), spacing, coords })
    }

    pub fn domain(&self) -> &BoxRegion {
        &self.domain
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    /// Half the cell diagonal: every point of the box is this close to a node.
    pub fn dispersion(&self) -> f64 {
        0.5 * self.spacing.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &k)| acc * k + i)
    }
}

fn domain_err<T>(msg: &str) -> Result<T> {
    domain(msg)
}

impl PointSet for Lattice {
    fn dim(&self) -> usize {
        self.shape.len()
    }

    fn len(&self) -> usize {
        self.coords.len() / self.shape.len()
    }

    fn point(&self, id: usize) -> &[f64] {
        let d = self.shape.len();
        &self.coords[id * d..(id + 1) * d]
    }

    fn for_each_in_ball<F: FnMut(usize)>(&self, center: &[f64], radius: f64, mut visit: F) {
        let dim = self.shape.len();
        let mut lo = [0usize; crate::geometry::MAX_DIM];
        let mut hi = [0usize; crate::geometry::MAX_DIM];
        for a in 0..dim {
            let origin = self.domain.lo()[a];
            let first = ((center[a] - radius - origin) / self.spacing[a]).ceil() - 1.0;
            let last = ((center[a] + radius - origin) / self.spacing[a]).floor() + 1.0;
            let max = (self.shape[a] - 1) as f64;
            if last < 0.0 || first > max {
                return;
            }
            lo[a] = first.clamp(0.0, max) as usize;
            hi[a] = last.clamp(0.0, max) as usize;
        }
        let r2 = radius * radius;
        let mut idx = lo;
        loop {
            let id = self.flat_index(&idx[..dim]);
            if dist2(self.point(id), center) <= r2 {
                visit(id);
            }
            let mut a = dim;
            loop {
                if a == 0 {
                    return;
                }
                a -= 1;
                if idx[a] < hi[a] {
                    idx[a] += 1;
                    break;
                }
                idx[a] = lo[a];
            }
        }
    }

    fn nearest(&self, center: &[f64]) -> Option<usize> {
        let idx: Vec<usize> = (0..self.shape.len())
            .map(|a| {
                let t = ((center[a] - self.domain.lo()[a]) / self.spacing[a]).round();
                t.clamp(0.0, (self.shape[a] - 1) as f64) as usize
            })
            .collect();
        Some(self.flat_index(&idx))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridOptions {
    pub alpha_exp: f64,
    pub dilation: DilationRule,
    pub max_sweeps: usize,
    /// Initial value of the first (or only) level.
    pub initial_value: f64,
    pub halo: HaloRule,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            alpha_exp: 1.0,
            dilation: DilationRule::default(),
            max_sweeps: 100_000,
            initial_value: 1.0,
            halo: HaloRule::default(),
        }
    }
}

/// A converged value field on a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSolution {
    pub game: String,
    pub lattice: Lattice,
    pub values: Vec<f64>,
    pub schedule: Schedule,
    pub tol: f64,
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub wall_ms: f64,
    pub pool_sizes: (usize, usize),
}

/// The metadata file that accompanies a solution CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub game: String,
    pub resolution: Vec<usize>,
    pub domain: BoxRegion,
    pub spacing: Vec<f64>,
    pub schedule: Schedule,
    pub tol: f64,
    pub sweeps: usize,
    pub converged: bool,
    pub wall_ms: f64,
    pub angel_pool: usize,
    pub demon_pool: usize,
}

impl GridSolution {
    pub fn sweeps(&self) -> usize {
        self.residuals.len()
    }

    /// Smallest node value within the solution's own dispersion of `x`,
    /// falling back to the nearest node.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match ball_min(&self.lattice, &self.values, x, self.schedule.d, self.values.len()) {
            Some((v, _)) => v,
            None => self.values[self.lattice.nearest(x).expect("nonempty lattice")],
        }
    }

    pub fn metadata(&self) -> GridMetadata {
        GridMetadata {
            game: self.game.clone(),
            resolution: self.lattice.shape().to_vec(),
            domain: self.lattice.domain().clone(),
            spacing: self.lattice.spacing().to_vec(),
            schedule: self.schedule,
            tol: self.tol,
            sweeps: self.sweeps(),
            converged: self.converged,
            wall_ms: self.wall_ms,
            angel_pool: self.pool_sizes.0,
            demon_pool: self.pool_sizes.1,
        }
    }

    /// `node,x0,..,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let dim = self.lattice.dim();
        let mut w = csv::Writer::from_writer(BufWriter::new(out));
        let mut header = vec!["node".to_string()];
        header.extend((0..dim).map(|i| format!("x{i}")));
        header.push("value".into());
        w.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(self.lattice.point(i).iter().map(|c| format!("{c:?}")));
            row.push(format!("{v:?}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(File::create(dir.join(format!("{stem}.csv")))?)?;
        let meta = serde_json::to_string_pretty(&self.metadata())?;
        std::fs::write(dir.join(format!("{stem}.json")), meta)?;
        Ok(())
    }

    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let meta: GridMetadata =
            serde_json::from_reader(BufReader::new(File::open(dir.join(format!("{stem}.json")))?))?;
        let values = read_values_csv(File::open(dir.join(format!("{stem}.csv")))?)?;
        let lattice = Lattice::new(meta.domain.clone(), &meta.resolution)?;
        if values.len() != lattice.len() {
            return Err(Error::Config(format!("{stem}.csv has {} rows, expected {}", values.len(), lattice.len())));
        }
        let sweeps = meta.sweeps;
        Ok(Self {
            game: meta.game,
            lattice,
            values,
            schedule: meta.schedule,
            tol: meta.tol,
            residuals: vec![f64::NAN; sweeps],
            converged: meta.converged,
            wall_ms: meta.wall_ms,
            pool_sizes: (meta.angel_pool, meta.demon_pool),
        })
    }
}

fn read_values_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let v = rec
            .get(rec.len() - 1)
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| Error::Config("malformed value column".into()))?;
        values.push(v);
    }
    Ok(values)
}

/// Solves the fixed-point problem on one lattice.
pub fn solve_fixed_grid(
    game: &GameDef,
    shape: &[usize],
    tol: f64,
    pools: &ControlPools,
    options: &GridOptions,
) -> Result<GridSolution> {
    let lattice = Lattice::new(game.domain().clone(), shape)?;
    let init = vec![options.initial_value; lattice.len()];
    solve_level(game, lattice, init, tol, pools, options)
}

fn solve_level(
    game: &GameDef,
    lattice: Lattice,
    init: Vec<f64>,
    tol: f64,
    pools: &ControlPools,
    options: &GridOptions,
) -> Result<GridSolution> {
    let t0 = Instant::now();
    let schedule = options.dilation.schedule(lattice.dispersion(), options.alpha_exp, game)?;
    let fp = {
        let op = FrozenOperator::new(&lattice, game, schedule, pools)?.with_halo_rule(options.halo);
        op.solve(init, tol, options.max_sweeps)?
    };
    Ok(GridSolution {
        game: game.id().to_string(),
        lattice,
        values: fp.values,
        schedule,
        tol,
        residuals: fp.residuals,
        converged: fp.converged,
        wall_ms: t0.elapsed().as_secs_f64() * 1e3,
        pool_sizes: (pools.angel.len(), pools.demon.len()),
    })
}

/// One level of a coarse-to-fine run.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRecord {
    pub resolution: Vec<usize>,
    pub sweeps: usize,
    /// Cumulative time up to the end of this level.
    pub wall_ms: f64,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MultigridRun {
    pub solution: GridSolution,
    pub levels: Vec<LevelRecord>,
}

pub fn solve_multigrid(
    game: &GameDef,
    levels: &[Vec<usize>],
    tol: f64,
    pools: &ControlPools,
    options: &GridOptions,
) -> Result<MultigridRun> {
    solve_multigrid_with(game, levels, tol, pools, options, |_, _| ControlFlow::Continue(()))
}

/// Like [`solve_multigrid`], calling `on_level` with each level's solution and
/// the cumulative solve time; callback time is not counted.
pub fn solve_multigrid_with<F>(
    game: &GameDef,
    levels: &[Vec<usize>],
    tol: f64,
    pools: &ControlPools,
    options: &GridOptions,
    mut on_level: F,
) -> Result<MultigridRun>
where
    F: FnMut(&GridSolution, f64) -> ControlFlow<()>,
{
    if levels.is_empty() {
        return domain("multigrid needs at least one level");
    }
    for w in levels.windows(2) {
        let finer = w[0].len() == w[1].len() && w[0].iter().zip(&w[1]).all(|(a, b)| b >= a) && w[1] != w[0];
        if !finer {
            return domain("multigrid levels must strictly refine");
        }
    }
    let mut records = Vec::with_capacity(levels.len());
    let mut prev: Option<GridSolution> = None;
    let mut wall_ms = 0.0;
    for shape in levels {
        let t0 = Instant::now();
        let lattice = Lattice::new(game.domain().clone(), shape)?;
        let init = match &prev {
            None => vec![options.initial_value; lattice.len()],
            Some(p) => prolongate(p, &lattice),
        };
        let mut sol = solve_level(game, lattice, init, tol, pools, options)?;
        wall_ms += t0.elapsed().as_secs_f64() * 1e3;
        sol.wall_ms = wall_ms;
        records.push(LevelRecord {
            resolution: shape.clone(),
            sweeps: sol.sweeps(),
            wall_ms,
            values: sol.values.clone(),
        });
        let stop = on_level(&sol, wall_ms).is_break();
        prev = Some(sol);
        if stop {
            break;
        }
    }
    Ok(MultigridRun { solution: prev.expect("at least one level"), levels: records })
}

/// Ball-min of the coarse field over the coarse dilation radius at each fine
/// node, nearest coarse node when that ball is empty.
fn prolongate(coarse: &GridSolution, fine: &Lattice) -> Vec<f64> {
    crate::kernel::par_map(fine.len(), |i| {
        let x = fine.point(i);
        match ball_min(&coarse.lattice, &coarse.values, x, coarse.schedule.dilation, coarse.values.len()) {
            Some((v, _)) => v,
            None => coarse.values[coarse.lattice.nearest(x).expect("nonempty lattice")],
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{make_homicidal_chauffeur, make_toy_1d};
    use crate::kernel::sup_distance;
    use crate::pools::PoolMode;
    use proptest::prelude::*;

    #[test]
    fn lattice_ball_queries_match_brute_force() {
        let l = Lattice::new(BoxRegion::new(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap(), &[7, 11]).unwrap();
        for (c, r) in [([0.1, 0.2], 0.5), ([-1.0, 3.0], 0.3), ([0.0, 1.5], 0.0), ([5.0, 5.0], 1.0), ([1.2, 1.0], 0.25)] {
            let mut got = l.ball_ids(&c, r);
            got.sort_unstable();
            let want: Vec<usize> = (0..l.len()).filter(|&i| dist2(l.point(i), &c) <= r * r).collect();
            assert_eq!(got, want);
        }
        assert_eq!(l.point(l.len() - 1), &[1.0, 3.0]);
    }

    #[test]
    fn evaluate_examples() {
        let g = make_toy_1d(vec![vec![-1.0], vec![1.0]]);
        let lattice = Lattice::new(g.domain().clone(), &[11]).unwrap();
        let schedule = Schedule::new(lattice.dispersion(), 1.0, 0.0, 0.0).unwrap();
        let mut values = vec![1.0; 11];
        values[3] = 0.2;
        values[4] = 0.6;
        let sol = GridSolution {
            game: "toy1d".into(),
            lattice,
            values,
            schedule,
            tol: 1e-6,
            residuals: vec![],
            converged: true,
            wall_ms: 0.0,
            pool_sizes: (2, 1),
        };
        assert_eq!(sol.evaluate(&[0.4]), 0.6);
        assert_eq!(sol.evaluate(&[0.35]), 0.2);
    }

    #[test]
    fn toy_grid_time_near_analytic() {
        let g = make_toy_1d(vec![vec![-1.0], vec![1.0]]);
        let pools = ControlPools::new(&g, PoolMode::default());
        let opts = GridOptions { initial_value: 0.0, ..GridOptions::default() };
        let a = solve_fixed_grid(&g, &[101], 1e-10, &pools, &opts).unwrap();
        let t = -(1.0 - a.values[50]).ln();
        assert!((t - 0.4).abs() <= 0.05, "{t}");
        let b = solve_fixed_grid(&g, &[101], 1e-10, &pools, &GridOptions::default()).unwrap();
        assert!(sup_distance(&a.values, &b.values) <= 2e-10 * 1e3);
    }

    #[test]
    fn chauffeur_coarse_grid_certificate() {
        let g = make_homicidal_chauffeur();
        let pools = ControlPools::new(&g, PoolMode::Grid { angel: 5, demon: 8 });
        let sol = solve_fixed_grid(&g, &[50, 50], 1e-6, &pools, &GridOptions::default()).unwrap();
        assert!(sol.converged);
        let q = sol.schedule.decay();
        for w in sol.residuals.windows(2) {
            assert!(w[1] <= q * w[0] + 1e-9);
        }
        assert!(sol.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn multigrid_shapes() {
        let g = make_homicidal_chauffeur();
        let pools = ControlPools::new(&g, PoolMode::Grid { angel: 3, demon: 4 });
        let opts = GridOptions::default();
        let single = solve_multigrid(&g, &[vec![10, 10]], 1e-6, &pools, &opts).unwrap();
        let direct = solve_fixed_grid(&g, &[10, 10], 1e-6, &pools, &opts).unwrap();
        assert_eq!(single.solution.values, direct.values);
        assert_eq!(single.levels.len(), 1);
        assert!(solve_multigrid(&g, &[], 1e-6, &pools, &opts).is_err());
        assert!(solve_multigrid(&g, &[vec![10, 10], vec![10, 10]], 1e-6, &pools, &opts).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let g = make_homicidal_chauffeur();
        let pools = ControlPools::new(&g, PoolMode::Grid { angel: 3, demon: 4 });
        let sol = solve_fixed_grid(&g, &[12, 9], 1e-6, &pools, &GridOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        sol.save(dir.path(), "bench").unwrap();
        let back = GridSolution::load(dir.path(), "bench").unwrap();
        assert_eq!(back.values, sol.values);
        assert_eq!(back.schedule, sol.schedule);
        assert_eq!(back.lattice, sol.lattice);
    }

    proptest! {
        #[test]
        fn lattice_queries_exact(cx in -1.5f64..1.5, cy in -1.5f64..1.5, r in 0.0f64..0.6) {
            let l = Lattice::new(BoxRegion::cube(2, -1.2, 1.2).unwrap(), &[13, 17]).unwrap();
            let c = [cx, cy];
            let mut got = l.ball_ids(&c, r);
            got.sort_unstable();
            let want: Vec<usize> = (0..l.len()).filter(|&i| dist2(l.point(i), &c) <= r * r).collect();
            prop_assert_eq!(got, want);
        }
    }
}
