//! Run manifests: what was run, on which bytes, producing which bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Collects file digests for one invocation.
pub struct Run {
    manifest: RunManifest,
    primary: Option<PathBuf>,
}

impl Run {
    pub fn new(subcommand: &str, params: impl Serialize, seed: Option<u64>) -> Self {
        Run {
            manifest: RunManifest {
                subcommand: subcommand.to_string(),
                params: serde_json::to_value(params).expect("arguments serialize"),
                seed,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
            },
            primary: None,
        }
    }

    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.manifest
            .inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|_| CliError::usage(format!("{} is not UTF-8", path.display())))
    }

    /// Writes to `path`, or prints when there is none.
    pub fn write(&mut self, path: Option<&Path>, text: &str) -> Result<(), CliError> {
        let Some(path) = path else {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            return Ok(());
        };
        fs::write(path, text).map_err(|e| CliError::io(path, e))?;
        self.manifest
            .outputs
            .insert(path.display().to_string(), sha256_hex(text.as_bytes()));
        self.primary.get_or_insert_with(|| path.to_path_buf());
        Ok(())
    }

    /// Writes `<first output>.manifest.json` when any file was produced.
    pub fn finish(self) -> Result<(), CliError> {
        let Some(primary) = self.primary else {
            return Ok(());
        };
        let mut name = primary.into_os_string();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n";
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))
    }
}
