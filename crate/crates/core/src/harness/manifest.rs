use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;

/// Record of one command run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub base_seed: u64,
    pub config_checksum: String,
    pub config: String,
    /// File name → SHA-256 hex digest of its bytes.
    pub outputs: BTreeMap<String, String>,
    pub duration_ms: u128,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn file_name(command: &str) -> String {
        format!("{command}.manifest.json")
    }

    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| HarnessError::Io(e.to_string()))?;
        let path = dir.join(Self::file_name(&self.command));
        std::fs::write(&path, text + "\n")
            .map_err(|e| HarnessError::Io(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Input(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| HarnessError::Input(format!("bad manifest {}: {e}", path.display())))
    }

    /// Names of listed outputs whose current bytes in `dir` do not match.
    pub fn mismatches(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter(|(name, digest)| {
                std::fs::read(dir.join(name))
                    .map(|bytes| sha256_hex(&bytes) != **digest)
                    .unwrap_or(true)
            })
            .map(|(name, _)| name.clone())
            .collect()
    }
}
