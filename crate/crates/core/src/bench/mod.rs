//! Experiment harness: error metrics, algorithm comparisons, fence
//! snapshots, outcome maps and cached reference solutions.

mod cache;
mod comparison;
mod config;
mod error;
mod fence;
mod outcomes;
mod reference;

pub use cache::{cache_dir, cached_grid, content_hash, CACHE_ENV};
pub use comparison::{
    faster, run_comparison, ComparisonConfig, ComparisonReport, Crossing, CurvePoint, CurveStat, ErrorCurve, Method,
    MultigridSpec, ThresholdRow, DEFAULT_THRESHOLDS,
};
pub use config::ExperimentConfig;
pub use error::{error_against_benchmark, error_probes, ErrorStats};
pub use fence::{non_monotone_steps, run_fence_snapshots, FenceConfig, FenceRun, FenceSnapshot, FENCE_SNAPSHOT_COUNTS};
pub use outcomes::{run_outcome_maps, OutcomeConfig, OutcomeSeries};
pub use reference::{lattice_probes, max_neighbour_jump, resample, FenceOracle, GridReference};
