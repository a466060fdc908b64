//! Run manifests: every command writes `manifest.json` recording what ran,
//! a digest of the canonicalized parameters, the master seed, and the
//! output files. Timestamps live only here, keeping the data outputs
//! byte-reproducible.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use goggin::Result;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 (hex) of the canonical parameter JSON.
    pub config_digest: String,
    pub master_seed: u64,
    pub tool_version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// File names in the output directory, each described here and nowhere
    /// else; JSON outputs point back via a `manifest` field.
    pub outputs: Vec<String>,
}

pub fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn now_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub struct ManifestBuilder {
    command: String,
    config_digest: String,
    master_seed: u64,
    started_unix: u64,
    outputs: Vec<String>,
}

impl ManifestBuilder {
    /// `canonical` is the canonical parameter JSON the digest commits to.
    pub fn new(command: &str, canonical: &str, master_seed: u64) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            config_digest: sha256_hex(canonical),
            master_seed,
            started_unix: now_unix(),
            outputs: Vec::new(),
        }
    }

    pub fn add_output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }

    /// Write `manifest.json` into `dir`.
    pub fn finish(self, dir: &Path) -> Result<()> {
        let manifest = RunManifest {
            command: self.command,
            config_digest: self.config_digest,
            master_seed: self.master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started_unix,
            finished_unix: now_unix(),
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .expect("manifest serialization cannot fail");
        text.push('\n');
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}
