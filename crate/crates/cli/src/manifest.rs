use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::io::sha256_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to repeat a run: the resolved configuration, the
/// seed and the digests of inputs and outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub status: String,
    pub exit_code: u8,
    /// SHA-256 of the resolved configuration as written in `config`.
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn config_digest(config: &serde_json::Value) -> String {
        sha256_hex(serde_json::to_string(config).unwrap_or_default().as_bytes())
    }

    pub fn input(path: &Path, bytes: &[u8]) -> FileDigest {
        FileDigest { path: path.display().to_string(), sha256: sha256_hex(bytes) }
    }
}
