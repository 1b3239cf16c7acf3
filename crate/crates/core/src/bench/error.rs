//! Approximation error of a value field against a reference field.

use serde::{Deserialize, Serialize};

use crate::game::GameDef;
use crate::geometry::BoxRegion;
use crate::policy::ValueField;

/// Mean and sup absolute difference over a probe set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub sup: f64,
    pub probes: usize,
}

/// Cell centres of a regular lattice over `region` that lie in the free set
/// and outside the goal, row-major.
pub fn error_probes(game: &GameDef, region: &BoxRegion, shape: &[usize]) -> Vec<f64> {
    let dim = region.dim();
    let total: usize = shape.iter().product();
    let mut out = Vec::new();
    let mut x = vec![0.0; dim];
    for flat in 0..total {
        let mut rest = flat;
        for a in (0..dim).rev() {
            let i = rest % shape[a];
            rest /= shape[a];
            x[a] = region.lo()[a] + region.extent(a) * (i as f64 + 0.5) / shape[a] as f64;
        }
        if game.in_free(&x) && !game.in_goal(&x) {
            out.extend_from_slice(&x);
        }
    }
    out
}

/// Compares ball-min interpolations of `field` and `benchmark` at every
/// probe (row-major, `dim` coordinates each).
pub fn error_against_benchmark(
    field: &dyn ValueField,
    benchmark: &dyn ValueField,
    probes: &[f64],
    dim: usize,
) -> ErrorStats {
    let diffs = crate::kernel::par_map(probes.len() / dim, |i| {
        let x = &probes[i * dim..(i + 1) * dim];
        (field.interpolate(x) - benchmark.interpolate(x)).abs()
    });
    let n = diffs.len();
    let sum: f64 = diffs.iter().sum();
    let sup = diffs.iter().copied().fold(0.0, f64::max);
    ErrorStats { mean: if n == 0 { 0.0 } else { sum / n as f64 }, sup, probes: n }
}
