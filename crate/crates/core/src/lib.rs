//! Incremental sampling-based solvers for time-optimal approach-evasion
//! differential games.

pub mod bench;
pub mod error;
pub mod game;
pub mod geometry;
pub mod kernel;
pub mod kruzkov;
pub mod multigrid;
pub mod policy;
pub mod pools;
pub mod sampling;
pub mod schedule;

pub use error::{Error, Result};
