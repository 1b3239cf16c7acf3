//! Discrete control pools `U_n` and `W_n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::game::{ControlSpace, GameDef};

/// How the control pools are formed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PoolMode {
    /// One fresh uniform draw per player per iteration, up to `cap` entries.
    Incremental { cap: usize },
    /// Fixed uniform grids with the given number of values per control axis.
    Grid { angel: usize, demon: usize },
}

impl Default for PoolMode {
    fn default() -> Self {
        PoolMode::Incremental { cap: 32 }
    }
}

/// Append-only list of control vectors; an entry's index is its label.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ControlPool {
    dim: usize,
    flat: Vec<f64>,
}

impl ControlPool {
    pub fn from_vectors(dim: usize, vs: &[Vec<f64>]) -> Self {
        let mut p = Self { dim, flat: Vec::with_capacity(dim * vs.len()) };
        for v in vs {
            p.push(v);
        }
        p
    }

    pub fn push(&mut self, v: &[f64]) {
        debug_assert_eq!(v.len(), self.dim);
        self.flat.extend_from_slice(v);
    }

    #[inline]
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.flat.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.flat[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.flat.chunks_exact(self.dim.max(1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlPools {
    pub angel: ControlPool,
    pub demon: ControlPool,
    mode: PoolMode,
}

impl ControlPools {
    /// Grid pools are filled immediately; incremental pools start empty and
    /// grow through [`ControlPools::grow`]. A finite control set is always
    /// used whole.
    pub fn new(game: &GameDef, mode: PoolMode) -> Self {
        let build = |space: &ControlSpace, per_axis: Option<usize>| {
            let dim = space.dim();
            match (space, per_axis) {
                (ControlSpace::Finite(set), _) => ControlPool::from_vectors(dim, set),
                (_, Some(n)) => ControlPool::from_vectors(dim, &space.grid(n)),
                (_, None) => ControlPool { dim, flat: Vec::new() },
            }
        };
        let (a, d) = match &mode {
            PoolMode::Grid { angel, demon } => (Some(*angel), Some(*demon)),
            PoolMode::Incremental { .. } => (None, None),
        };
        Self { angel: build(game.angel_controls(), a), demon: build(game.demon_controls(), d), mode }
    }

    pub fn fixed(angel: ControlPool, demon: ControlPool) -> Self {
        let mode = PoolMode::Grid { angel: angel.len(), demon: demon.len() };
        Self { angel, demon, mode }
    }

    pub fn mode(&self) -> &PoolMode {
        &self.mode
    }

    /// `U_n ← U_{n−1} ∪ Sample(U, 1)`, then the same for `W`. No-op for grid
    /// pools, finite sets and full pools.
    pub fn grow<R: Rng + ?Sized>(&mut self, game: &GameDef, rng: &mut R) {
        let PoolMode::Incremental { cap } = self.mode else { return };
        for (pool, space) in [(&mut self.angel, game.angel_controls()), (&mut self.demon, game.demon_controls())] {
            if !matches!(space, ControlSpace::Finite(_)) && pool.len() < cap {
                let v = space.sample(rng);
                pool.push(&v);
            }
        }
    }

    pub fn is_ready(&self) -> bool {
        !self.angel.is_empty() && !self.demon.is_empty()
    }
}
