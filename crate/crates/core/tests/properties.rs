//! Property checks on the public API: ball-min interpolation, sample-cloud
//! geometry and the discretization schedule.

use igame_core::geometry::{dist2, BoxRegion};
use igame_core::kernel::{ball_min, sup_distance};
use igame_core::kruzkov::{kruzkov, kruzkov_inverse};
use igame_core::sampling::{PointSet, SampleCloud};
use igame_core::schedule::Schedule;
use proptest::prelude::*;

fn cloud_of(points: &[(f64, f64)]) -> SampleCloud {
    let mut cloud = SampleCloud::new(BoxRegion::cube(2, 0.0, 1.0).unwrap(), &|_| true, 48);
    for &(x, y) in points {
        let _ = cloud.insert(&[x, y]);
    }
    cloud
}

fn points(range: std::ops::Range<usize>) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), range)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ball_min_is_nonexpansive(
        pts in points(1..80),
        shift in prop::collection::vec(-0.5..0.5f64, 80),
        base in prop::collection::vec(0.0..1.0f64, 80),
        cx in -0.2..1.2f64, cy in -0.2..1.2f64, r in 0.0..0.7f64,
    ) {
        let cloud = cloud_of(&pts);
        let n = cloud.len();
        let v = &base[..n];
        let w: Vec<f64> = v.iter().zip(&shift).map(|(a, s)| (a + s).clamp(0.0, 1.0)).collect();
        let a = ball_min(&cloud, v, &[cx, cy], r, n).map_or(1.0, |m| m.0);
        let b = ball_min(&cloud, &w, &[cx, cy], r, n).map_or(1.0, |m| m.0);
        prop_assert!((a - b).abs() <= sup_distance(v, &w));
    }

    #[test]
    fn appending_a_one_keeps_interpolation(
        pts in points(8..120),
        fresh in (0.0..1.0f64, 0.0..1.0f64),
        probe in (0.0..1.0f64, 0.0..1.0f64),
        margin in 2.001..3.0f64,
    ) {
        let mut cloud = cloud_of(&pts);
        let old = cloud.len();
        prop_assume!(cloud.insert(&[fresh.0, fresh.1]).is_ok());
        let alpha = margin * cloud.dispersion();
        let mut v: Vec<f64> = (0..old).map(|i| (i as f64 * 0.37).fract()).collect();
        v.push(1.0);
        let x = [probe.0, probe.1];
        let before = ball_min(&cloud, &v, &x, alpha, old);
        let after = ball_min(&cloud, &v, &x, alpha, old + 1);
        prop_assert!(before.is_some());
        prop_assert_eq!(before.map(|m| m.0), after.map(|m| m.0));
    }

    #[test]
    fn close_pairs_share_a_third_sample(pts in points(30..150), margin in 2.001..2.5f64) {
        let cloud = cloud_of(&pts);
        let alpha = margin * cloud.dispersion();
        for x in 0..cloud.len() {
            let near = cloud.ball_ids(cloud.point(x), alpha);
            for &y in near.iter().filter(|&&y| y > x) {
                let shared = near
                    .iter()
                    .any(|&s| s != x && s != y && dist2(cloud.point(s), cloud.point(y)) <= alpha * alpha);
                prop_assert!(shared, "pair ({x}, {y}) at alpha {alpha}");
            }
        }
    }

    #[test]
    fn schedule_contracts(d in 1e-6..5.0f64, alpha in 0.1..3.0f64, m in 0.0..6.0f64, l in 0.0..6.0f64) {
        let s = Schedule::new(d, alpha, m, l).unwrap();
        prop_assert!(s.kappa > 0.0 && s.decay() < 1.0);
        prop_assert!(s.dilation >= 2.0 * d);
        prop_assert!(s.goal_halo >= d);
        prop_assert!((s.backup(0.0) - (1.0 - s.decay())).abs() < 1e-15);
    }

    #[test]
    fn kruzkov_is_monotone_and_invertible(a in 0.0..30.0f64, b in 0.0..30.0f64) {
        let (va, vb) = (kruzkov(a).unwrap(), kruzkov(b).unwrap());
        prop_assert!((0.0..1.0).contains(&va.get()));
        if a < b {
            prop_assert!(va.get() <= vb.get());
        }
        if a <= 8.0 {
            prop_assert!((kruzkov_inverse(va) - a).abs() <= 1e-12);
        }
    }
}
