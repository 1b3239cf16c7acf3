//! Content-addressed storage for expensive reference solutions.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::multigrid::GridSolution;

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "IGAME_CACHE_DIR";

/// `$IGAME_CACHE_DIR`, or `igame-cache` under the system temp directory.
pub fn cache_dir() -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => std::env::temp_dir().join("igame-cache"),
    }
}

/// Hex SHA-256 of the JSON encoding of `value`.
pub fn content_hash<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let json = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&json)))
}

/// Loads `<dir>/<key>.{csv,json}` if present, otherwise computes and stores
/// it. Files are written under a private name and renamed into place, so
/// concurrent callers never observe a partial entry.
pub fn cached_grid<F>(dir: &Path, key: &str, compute: F) -> Result<GridSolution>
where
    F: FnOnce() -> Result<GridSolution>,
{
    if dir.join(format!("{key}.json")).exists() {
        if let Ok(sol) = GridSolution::load(dir, key) {
            return Ok(sol);
        }
    }
    let sol = compute()?;
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let staging = dir.join(format!(".{key}.{}.{}", std::process::id(), NEXT.fetch_add(1, Ordering::Relaxed)));
    sol.save(&staging, key)?;
    // The metadata file goes last: its presence marks a complete entry.
    for ext in ["csv", "json"] {
        std::fs::rename(staging.join(format!("{key}.{ext}")), dir.join(format!("{key}.{ext}")))?;
    }
    let _ = std::fs::remove_dir(&staging);
    Ok(sol)
}
