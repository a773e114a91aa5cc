//! Resolved run configuration echoed into every output file.

use serde::Serialize;

/// Fully resolved configuration for one run. Serialized into every
/// prediction CSV summary and JSON report so outputs are
/// self-describing and reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub train_path: Option<String>,
    pub test_path: Option<String>,
    pub format: String,
    pub backend: String,
    pub level: Option<u32>,
    pub k: usize,
    pub scoring: String,
    pub tie_policy: String,
    pub shots: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub workers: usize,
    pub test_sample: Option<usize>,
    pub out: Option<String>,
    pub matrix_cache: Option<String>,
    pub version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
}

impl RunConfig {
    pub fn timestamp(no_timestamp: bool) -> Option<u64> {
        if no_timestamp {
            None
        } else {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .ok()
                .map(|d| d.as_secs())
        }
    }
}

/// Worker count resolution: flag, then NCD_WORKERS, then all cores.
pub fn resolve_workers(flag: Option<usize>) -> usize {
    if let Some(w) = flag {
        return w.max(1);
    }
    if let Ok(env) = std::env::var("NCD_WORKERS") {
        if let Ok(w) = env.parse::<usize>() {
            return w.max(1);
        }
    }
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}
