//! Run manifests: a JSON record written next to every output file with the
//! resolved configuration, master seed, library version, wall-clock time,
//! and FNV-1a digests of the outputs. Re-running the recorded command
//! reproduces the outputs bit-exactly (the manifest itself carries the
//! timing and so differs).

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Serialize)]
struct OutputDigest {
    path: String,
    bytes: u64,
    fnv1a64: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    command: String,
    argv: Vec<String>,
    resolved_config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<u64>,
    library_version: String,
    started_unix_s: u64,
    wall_clock_ms: u128,
    outputs: Vec<OutputDigest>,
    #[serde(skip)]
    started: Instant,
    #[serde(skip)]
    extra_outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, started: Instant) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            resolved_config: Value::Null,
            master_seed: None,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            wall_clock_ms: 0,
            outputs: Vec::new(),
            started,
            extra_outputs: Vec::new(),
        }
    }

    pub fn config(mut self, value: Value) -> Self {
        self.resolved_config = value;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.master_seed = Some(seed);
        self
    }

    pub fn extra_output(mut self, path: &Path) -> Self {
        self.extra_outputs.push(path.to_path_buf());
        self
    }

    /// Digests the primary output (and any extras) and writes the manifest
    /// to `<primary>.manifest.json`.
    pub fn write(mut self, primary: &Path) -> Result<(), CliError> {
        let mut paths = vec![primary.to_path_buf()];
        paths.append(&mut self.extra_outputs);
        for path in &paths {
            let bytes = std::fs::read(path)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            self.outputs.push(OutputDigest {
                path: path.display().to_string(),
                bytes: bytes.len() as u64,
                fnv1a64: format!("{:016x}", fnv1a64(&bytes)),
            });
        }
        self.wall_clock_ms = self.started.elapsed().as_millis();
        let manifest_path = manifest_path(primary);
        let text = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Data(format!("manifest serialization: {e}")))?;
        std::fs::write(&manifest_path, text + "\n")
            .map_err(|e| CliError::Data(format!("{}: {e}", manifest_path.display())))?;
        Ok(())
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary.with_file_name(name)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
