use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Provenance record written next to every primary output as `<out>.manifest.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub subcommand: String,
    /// sha256 of the config file, or of the canonical JSON of the arguments.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub versions: BTreeMap<String, String>,
    pub started: String,
    pub finished: String,
    pub status: String,
    pub outputs: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn versions() -> BTreeMap<String, String> {
    [
        ("dp-hierarchy", env!("CARGO_PKG_VERSION")),
        ("dp-core", dp_core::VERSION),
        ("dp-spectral", dp_spectral::VERSION),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// `<out>` with `suffix` appended to the file stem, keeping the directory: `run.csv` -> `run.drift.csv`.
pub fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{}{}", stem, suffix))
}

/// Collects written files for the manifest.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
}

impl Outputs {
    pub fn write(&mut self, path: &Path, content: &[u8]) -> Result<(), CliError> {
        fs::write(path, content).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        self.files.push(path.to_path_buf());
        Ok(())
    }
}
