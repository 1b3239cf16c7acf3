//! Growing sample sets, radius queries and dispersion tracking.

mod cloud;
mod dispersion;
mod grid_index;

pub(crate) use cloud::write_points_csv;
pub use cloud::{SampleCloud, DEFAULT_PROBES_PER_AXIS};
pub use dispersion::{dispersion_bounds, dispersion_scale_for_gamma, DispersionTracker};
pub use grid_index::GridIndex;

use rand::Rng;

use crate::error::{domain, Result};
use crate::geometry::BoxRegion;

/// A finite point set answering closed-ball queries. Both the random sample
/// cloud and the regular lattice of the grid baseline implement it, so the
/// value operator is written once.
pub trait PointSet: Sync {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn point(&self, id: usize) -> &[f64];

    /// Calls `visit` for every id whose point lies within Euclidean distance
    /// `radius` of `center` (boundary inclusive). Order is unspecified.
    fn for_each_in_ball<F: FnMut(usize)>(&self, center: &[f64], radius: f64, visit: F);

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn ball_ids(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_in_ball(center, radius, |id| out.push(id));
        out
    }

    /// Closest point, ties to the lowest id.
    fn nearest(&self, center: &[f64]) -> Option<usize> {
        (0..self.len())
            .map(|id| (crate::geometry::dist2(self.point(id), center), id))
            .min_by(|a, b| a.partial_cmp(b).expect("finite distances"))
            .map(|(_, id)| id)
    }
}

/// `k` i.i.d. uniform points in `region`.
pub fn sample_uniform<R: Rng + ?Sized>(region: &BoxRegion, k: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if region.is_degenerate() {
        return domain("cannot sample a zero-volume region");
    }
    if k == 0 {
        return domain("sample count must be at least 1");
    }
    Ok((0..k)
        .map(|_| {
            let mut p = vec![0.0; region.dim()];
            region.sample_into(rng, &mut p);
            p
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_given_seed() {
        let unit = BoxRegion::cube(1, 0.0, 1.0).unwrap();
        let a = sample_uniform(&unit, 3, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = sample_uniform(&unit, 3, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (0.0..=1.0).contains(&p[0])));
    }

    #[test]
    fn empirical_mean() {
        // Per-axis std of the mean is 1/sqrt(12 * 1e4) ≈ 0.0029, so 0.02 is ~7σ.
        let square = BoxRegion::cube(2, 0.0, 1.0).unwrap();
        let pts = sample_uniform(&square, 10_000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for axis in 0..2 {
            let mean = pts.iter().map(|p| p[axis]).sum::<f64>() / pts.len() as f64;
            assert!((mean - 0.5).abs() < 0.02, "axis {axis}: {mean}");
        }
    }

    #[test]
    fn degenerate_region_rejected() {
        let flat = BoxRegion::new(vec![2.0, 3.0], vec![2.0, 3.0]).unwrap();
        assert!(sample_uniform(&flat, 1, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        let unit = BoxRegion::cube(1, 0.0, 1.0).unwrap();
        assert!(sample_uniform(&unit, 0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
