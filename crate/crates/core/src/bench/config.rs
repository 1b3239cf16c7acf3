//! The experiment configuration file.
//!
//! One TOML document with a section per experiment; every key is optional.
//!
//! ```toml
//! [solve]            # a single solver run (keys of SolverConfig)
//! game = "chauffeur"
//! mode = "igamestar"
//! max_staleness = 50
//! max_samples = 4000
//!
//! [comparison]       # error-vs-time study against the benchmark grid
//! igame_trials = 3
//! thresholds = [0.1, 0.08]
//!
//! [fence]            # iGame snapshots against the fence oracle
//! counts = [100, 500, 1000, 2000, 6000]
//!
//! [outcomes]         # outcome maps of successive pursuers
//! checkpoints = [500, 1500, 4000]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::SolverConfig;

use super::cache::content_hash;
use super::comparison::ComparisonConfig;
use super::fence::FenceConfig;
use super::outcomes::OutcomeConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub solve: SolverConfig,
    pub comparison: ComparisonConfig,
    pub fence: FenceConfig,
    pub outcomes: OutcomeConfig,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.solve.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Replaces the seed of every solver run.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.solve.seed = seed;
        self.comparison = self.comparison.with_seed(seed);
        self.fence.solver.seed = seed;
        self.outcomes.pursuer.seed = seed;
        self
    }

    /// First 12 hex digits of the configuration's content hash.
    pub fn hash(&self) -> Result<String> {
        Ok(content_hash(self)?[..12].to_string())
    }

    /// `<base>/<hash>`.
    pub fn run_dir(&self, base: &Path) -> Result<PathBuf> {
        Ok(base.join(self.hash()?))
    }
}
