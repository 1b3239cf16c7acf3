//! Reference value fields: the chauffeur benchmark grid and the fence oracle.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::{game_by_id, GameDef};
use crate::multigrid::{solve_fixed_grid, GridOptions, GridSolution, Lattice};
use crate::pools::{ControlPools, PoolMode};
use crate::sampling::PointSet;
use crate::schedule::DilationRule;

use super::cache::{cached_grid, content_hash};

/// Bumped whenever the solver changes in a way that invalidates cached grids.
const CACHE_FORMAT: u32 = 1;

/// A converged fixed-grid solve, identified by everything that affects it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridReference {
    pub game: String,
    pub shape: Vec<usize>,
    pub tol: f64,
    /// Points per axis of the angel and demon control grids.
    pub angel_pool: usize,
    pub demon_pool: usize,
    pub options: GridOptions,
}

impl Default for GridReference {
    fn default() -> Self {
        Self::chauffeur_benchmark()
    }
}

impl GridReference {
    /// 200×200 chauffeur grid at tolerance 1e−6 with 9 turn rates and 16
    /// evader headings.
    pub fn chauffeur_benchmark() -> Self {
        Self {
            game: "chauffeur".into(),
            shape: vec![200, 200],
            tol: 1e-6,
            angel_pool: 9,
            demon_pool: 16,
            options: GridOptions::default(),
        }
    }

    /// 400×400 fence grid at tolerance 1e−8 with bang-bang-or-stop controls.
    pub fn fence_oracle() -> Self {
        Self {
            game: "fence".into(),
            shape: vec![400, 400],
            tol: 1e-8,
            angel_pool: 3,
            demon_pool: 3,
            options: GridOptions::default(),
        }
    }

    pub fn pools(&self, game: &GameDef) -> ControlPools {
        ControlPools::new(game, PoolMode::Grid { angel: self.angel_pool, demon: self.demon_pool })
    }

    pub fn key(&self) -> Result<String> {
        Ok(format!("{}-{}", self.game, &content_hash(&(CACHE_FORMAT, self))?[..16]))
    }

    pub fn solve(&self) -> Result<GridSolution> {
        let game = game_by_id(&self.game)?;
        solve_fixed_grid(&game, &self.shape, self.tol, &self.pools(&game), &self.options)
    }

    /// The cached solution in `dir`, solving on a miss.
    pub fn load_or_solve(&self, dir: &Path) -> Result<GridSolution> {
        cached_grid(dir, &self.key()?, || self.solve())
    }
}

/// The fence oracle resampled onto a `probe_shape` lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FenceOracle {
    pub reference: GridReference,
    pub probe_shape: Vec<usize>,
}

impl Default for FenceOracle {
    fn default() -> Self {
        Self { reference: GridReference::fence_oracle(), probe_shape: vec![200, 200] }
    }
}

impl FenceOracle {
    pub fn key(&self) -> Result<String> {
        Ok(format!("fence-probes-{}", &content_hash(&(CACHE_FORMAT, self))?[..16]))
    }

    pub fn load_or_solve(&self, dir: &Path) -> Result<GridSolution> {
        cached_grid(dir, &self.key()?, || {
            let fine = self.reference.load_or_solve(dir)?;
            let game = game_by_id(&self.reference.game)?;
            resample(&fine, &game, &self.probe_shape, self.reference.options.dilation)
        })
    }
}

/// `fine` evaluated at the nodes of a new lattice over the same domain. The
/// result interpolates over its own lattice dispersion.
pub fn resample(fine: &GridSolution, game: &GameDef, shape: &[usize], rule: DilationRule) -> Result<GridSolution> {
    let lattice = Lattice::new(fine.lattice.domain().clone(), shape)?;
    let values = crate::kernel::par_map(lattice.len(), |i| fine.evaluate(lattice.point(i)));
    let schedule = rule.schedule(lattice.dispersion(), fine.schedule.alpha_exp, game)?;
    Ok(GridSolution {
        game: fine.game.clone(),
        lattice,
        values,
        schedule,
        tol: fine.tol,
        residuals: Vec::new(),
        converged: fine.converged,
        wall_ms: 0.0,
        pool_sizes: fine.pool_sizes,
    })
}

/// Nodes of `lattice` in the free set and outside the goal, row-major.
pub fn lattice_probes(game: &GameDef, lattice: &Lattice) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..lattice.len() {
        let x = lattice.point(i);
        if game.in_free(x) && !game.in_goal(x) {
            out.extend_from_slice(x);
        }
    }
    out
}

/// Largest value jump between lattice neighbours along any axis.
pub fn max_neighbour_jump(sol: &GridSolution) -> f64 {
    let shape = sol.lattice.shape();
    let mut stride = 1;
    let mut best: f64 = 0.0;
    for a in (0..shape.len()).rev() {
        for i in 0..sol.values.len() {
            if (i / stride) % shape[a] + 1 < shape[a] {
                best = best.max((sol.values[i] - sol.values[i + stride]).abs());
            }
        }
        stride *= shape[a];
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::make_toy_1d;
    use crate::pools::PoolMode;

    #[test]
    fn keys_depend_on_every_field() {
        let a = GridReference::chauffeur_benchmark();
        let mut b = a.clone();
        b.tol = 1e-7;
        let mut c = a.clone();
        c.demon_pool = 8;
        assert_ne!(a.key().unwrap(), b.key().unwrap());
        assert_ne!(a.key().unwrap(), c.key().unwrap());
        assert!(a.key().unwrap().starts_with("chauffeur-"));
    }

    #[test]
    fn resample_onto_the_same_lattice_is_identity() {
        let g = make_toy_1d(vec![vec![-1.0]]);
        let pools = ControlPools::new(&g, PoolMode::Grid { angel: 1, demon: 1 });
        let sol = solve_fixed_grid(&g, &[51], 1e-12, &pools, &GridOptions::default()).unwrap();
        let same = resample(&sol, &g, &[51], DilationRule::Compact).unwrap();
        assert_eq!(same.values, sol.values);
        let coarse = resample(&sol, &g, &[26], DilationRule::Compact).unwrap();
        assert_eq!(coarse.values.len(), 26);
        assert!(coarse.schedule.d > sol.schedule.d);
    }

    #[test]
    fn neighbour_jump_on_a_step() {
        let g = make_toy_1d(vec![vec![-1.0]]);
        let pools = ControlPools::new(&g, PoolMode::Grid { angel: 1, demon: 1 });
        let mut sol = solve_fixed_grid(&g, &[3], 1e-12, &pools, &GridOptions::default()).unwrap();
        sol.values = vec![0.0, 0.25, 1.0];
        assert_eq!(max_neighbour_jump(&sol), 0.75);
    }

    #[test]
    fn probes_skip_goal_and_exterior() {
        let g = crate::game::make_homicidal_chauffeur();
        let lattice = Lattice::new(g.domain().clone(), &[25, 25]).unwrap();
        let probes = lattice_probes(&g, &lattice);
        for p in probes.chunks_exact(2) {
            assert!(g.in_free(p) && !g.in_goal(p));
        }
        assert!(probes.len() / 2 < 625);
    }
}
