//! Run manifests: what went in (with content hashes), what parameters were
//! used and what came out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{read_bytes, read_text, CliError, Result};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRecord {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub parameters: serde_json::Value,
    pub inputs: BTreeMap<String, InputRecord>,
    /// Output file name to content hash.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn file_name(command: &str) -> String {
        format!("manifest_{command}.json")
    }

    pub fn load(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_text(path)?).map_err(|e| CliError::InFile {
            path: path.to_path_buf(),
            source: e.into(),
        })
    }

    pub fn input(&self, name: &str) -> Option<&InputRecord> {
        self.inputs.get(name)
    }
}

/// Input files read by a command, hashed as they are loaded.
#[derive(Debug, Default)]
pub struct Inputs {
    records: BTreeMap<String, InputRecord>,
}

impl Inputs {
    pub fn read(&mut self, name: &str, path: &Path) -> Result<Vec<u8>> {
        let bytes = read_bytes(path)?;
        self.records.insert(
            name.to_string(),
            InputRecord {
                path: path.to_path_buf(),
                sha256: sha256_hex(&bytes),
            },
        );
        Ok(bytes)
    }

    pub fn read_text(&mut self, name: &str, path: &Path) -> Result<String> {
        let bytes = self.read(name, path)?;
        String::from_utf8(bytes).map_err(|e| CliError::InFile {
            path: path.to_path_buf(),
            source: conjoint_core::Error::Invalid(format!("not UTF-8: {e}")),
        })
    }

    pub fn into_records(self) -> BTreeMap<String, InputRecord> {
        self.records
    }
}

/// Writes every output and then the manifest into `dir`.
pub fn write_outputs(
    dir: &Path,
    command: &str,
    seed: u64,
    parameters: serde_json::Value,
    inputs: Inputs,
    files: &[(String, Vec<u8>)],
) -> Result<PathBuf> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut outputs = BTreeMap::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(io(&path))?;
        outputs.insert(name.clone(), sha256_hex(bytes));
    }
    let manifest = Manifest {
        command: command.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        parameters,
        inputs: inputs.into_records(),
        outputs,
    };
    let path = dir.join(Manifest::file_name(command));
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Core(e.into()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(io(&path))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
