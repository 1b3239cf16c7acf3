//! WebAssembly bindings for the browser demo in `www/`.
//!
//! A [`Demo`] owns one iGame* solver. The page grows it a batch of samples at
//! a time and, between batches, rasterizes the value field, plays out a
//! trajectory with both players following the current field, or maps the
//! outcome of every start state.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use igame_core::game::game_by_id;
use igame_core::kernel::{KernelOptions, Solver};
use igame_core::policy::{outcome_map, simulate, OutcomeKind, Policy, Role, SampleField, TimeLimit, ValueField};
use igame_core::pools::PoolMode;

const STALENESS: u32 = 50;

#[wasm_bindgen]
pub struct Demo {
    solver: Solver,
}

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl Demo {
    /// `game` is `"fence"` or `"chauffeur"`.
    #[wasm_bindgen(constructor)]
    pub fn new(game: &str, seed: u64) -> Result<Demo, JsError> {
        let game = game_by_id(game).map_err(js_err)?;
        let pools = match game.id() {
            "fence" => PoolMode::Grid { angel: 3, demon: 3 },
            _ => PoolMode::Grid { angel: 9, demon: 16 },
        };
        let options = KernelOptions { pools, probes_per_axis: 128, ..KernelOptions::default() };
        let solver = Solver::new(game, options, seed).map_err(js_err)?;
        Ok(Demo { solver })
    }

    /// Adds `count` samples with cascade updates; returns the new total.
    pub fn grow(&mut self, count: usize) -> Result<usize, JsError> {
        for _ in 0..count {
            self.solver.igamestar_step(STALENESS).map_err(js_err)?;
        }
        Ok(self.solver.len())
    }

    pub fn samples(&self) -> usize {
        self.solver.len()
    }

    /// Current dispersion estimate, 0 before the first sample.
    pub fn dispersion(&self) -> f64 {
        self.solver.schedule().map_or(0.0, |s| s.d)
    }

    /// `[lo_0, hi_0, lo_1, hi_1]`.
    pub fn bounds(&self) -> Vec<f64> {
        let d = self.solver.game().domain();
        vec![d.lo()[0], d.hi()[0], d.lo()[1], d.hi()[1]]
    }

    /// Sample coordinates, `x0, y0, x1, y1, …`.
    pub fn points(&self) -> Vec<f64> {
        self.solver.cloud().coords().to_vec()
    }

    /// Interpolated values on a `width × height` raster, row 0 at the top.
    pub fn raster(&self, width: usize, height: usize) -> Result<Vec<f32>, JsError> {
        let field = SampleField::from_solver(&self.solver).map_err(js_err)?;
        let b = self.bounds();
        let mut out = Vec::with_capacity(width * height);
        for row in 0..height {
            let y = b[3] - (row as f64 + 0.5) / height as f64 * (b[3] - b[2]);
            for col in 0..width {
                let x = b[0] + (col as f64 + 0.5) / width as f64 * (b[1] - b[0]);
                out.push(field.interpolate(&[x, y]) as f32);
            }
        }
        Ok(out)
    }

    /// Both players follow the current field from `(x, y)`. Returns the path
    /// `x0, y0, x1, y1, …` followed by the outcome code (0 capture, 1 escape,
    /// 2 timeout).
    pub fn trajectory(&self, x: f64, y: f64, dt: f64, t_max: f64) -> Result<Vec<f64>, JsError> {
        let (angel, demon) = self.policies()?;
        let out = simulate(self.solver.game(), &angel, &demon, &[x, y], dt, t_max, true).map_err(js_err)?;
        let mut flat: Vec<f64> = out.trajectory.unwrap_or_default().into_iter().flatten().collect();
        flat.push(outcome_code(out.kind));
        Ok(flat)
    }

    /// Outcome code of every node of a `res × res` lattice over the domain,
    /// row 0 at the top.
    pub fn outcomes(&self, res: usize, dt: f64, t_max: f64) -> Result<Vec<u8>, JsError> {
        let (angel, demon) = self.policies()?;
        let game = self.solver.game();
        let map = outcome_map(game, &angel, &demon, game.domain(), &[res, res], dt, TimeLimit::Fixed(t_max))
            .map_err(js_err)?;
        // Lattice rows run along the first axis; flip to screen order.
        let mut out = vec![0u8; res * res];
        for c in &map.cells {
            let (i, j) = (c.index[0], c.index[1]);
            out[(res - 1 - j) * res + i] = outcome_code(c.kind) as u8;
        }
        Ok(out)
    }
}

impl Demo {
    fn policies(&self) -> Result<(Policy, Policy), JsError> {
        let field: Arc<dyn ValueField> = Arc::new(SampleField::from_solver(&self.solver).map_err(js_err)?);
        let pools = self.solver.pools().clone();
        let angel = Policy::new(field.clone(), pools.clone(), Role::Angel).map_err(js_err)?;
        let demon = Policy::new(field, pools, Role::Demon).map_err(js_err)?;
        Ok((angel, demon))
    }
}

fn outcome_code(kind: OutcomeKind) -> f64 {
    match kind {
        OutcomeKind::Capture => 0.0,
        OutcomeKind::Escape => 1.0,
        OutcomeKind::Timeout => 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fence_demo_round() {
        let mut demo = Demo::new("fence", 3).unwrap_or_else(|_| panic!("fence exists"));
        assert_eq!(demo.grow(150).ok(), Some(150));
        assert_eq!(demo.points().len(), 300);
        let r = demo.raster(8, 6).ok().unwrap();
        assert_eq!(r.len(), 48);
        assert!(r.iter().all(|v| (0.0..=1.0).contains(v)));
        let path = demo.trajectory(0.0, 9.5, 0.05, 2.0).ok().unwrap();
        assert_eq!(path.len() % 2, 1);
        assert!(path.len() >= 3);
        let codes = demo.outcomes(5, 0.1, 1.0).ok().unwrap();
        assert_eq!(codes.len(), 25);
        assert!(codes.iter().all(|c| *c <= 2));
    }
}
