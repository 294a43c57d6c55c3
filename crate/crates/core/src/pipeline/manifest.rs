use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ConfigSnapshot;
use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Digest every artifact of a run refers to: tool version, configuration
/// snapshot and input contents. Paths and timings do not enter it.
pub fn run_digest(config: &ConfigSnapshot, inputs: &[InputDigest]) -> String {
    let mut h = Sha256::new();
    h.update(format!("fhcorr {TOOL_VERSION}\n"));
    h.update(serde_json::to_string(config).expect("snapshot serialises"));
    for i in inputs {
        h.update(format!("\n{} {}", i.role, i.sha256));
    }
    hex::encode(h.finalize())
}

/// Digest recorded in the first lines of an artifact, whatever its comment
/// syntax (`# manifest`, `// manifest`, `<!-- manifest ... -->`).
pub fn artifact_manifest_ref(text: &str) -> Option<&str> {
    text.lines().take(4).find_map(|l| {
        let l = l.trim();
        l.strip_prefix("# manifest ")
            .or_else(|| l.strip_prefix("// manifest "))
            .or_else(|| l.strip_prefix("<!-- manifest ").and_then(|r| r.strip_suffix("-->")))
            .map(str::trim)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Complete,
    /// Outputs already on disk under the same digest.
    Reused,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub status: StageStatus,
    pub seconds: f64,
    pub counters: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArtifactStatus {
    Complete,
    /// Some files missing or written under a different digest.
    Partial,
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactFile {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub status: ArtifactStatus,
    pub files: Vec<ArtifactFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub digest: String,
    pub config: ConfigSnapshot,
    pub inputs: Vec<InputDigest>,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(config: ConfigSnapshot, inputs: Vec<InputDigest>) -> Self {
        let digest = run_digest(&config, &inputs);
        Self {
            tool: "fhcorr".into(),
            version: TOOL_VERSION.into(),
            digest,
            config,
            inputs,
            stages: Vec::new(),
            artifacts: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("manifest: {e}")))
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// Replace or append the record for `record.name`.
    pub fn record_stage(&mut self, record: StageRecord) {
        match self.stages.iter_mut().find(|s| s.name == record.name) {
            Some(s) => *s = record,
            None => self.stages.push(record),
        }
    }

    pub fn warn(&mut self, message: String) {
        log::warn!("{message}");
        if !self.warnings.contains(&message) {
            self.warnings.push(message);
        }
    }
}
