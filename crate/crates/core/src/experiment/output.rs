use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;

/// Named in-memory file destined for an output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self { name: name.into(), bytes }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub config_version: u32,
    pub config_sha256: String,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Serializes rows of displayable fields into CSV bytes.
pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Writes the artifacts, the resolved config as `config.json` and a
/// `manifest.json` listing every file with its digest.
pub fn write_bundle(dir: &Path, experiment: &str, cfg: &ExperimentConfig, artifacts: &[Artifact]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let config_json = cfg.to_json()?;
    let mut entries = Vec::with_capacity(artifacts.len() + 1);
    std::fs::write(dir.join("config.json"), &config_json)?;
    entries.push(ManifestEntry { path: "config.json".into(), sha256: sha256_hex(config_json.as_bytes()) });
    for a in artifacts {
        std::fs::write(dir.join(&a.name), &a.bytes)?;
        entries.push(ManifestEntry { path: a.name.clone(), sha256: sha256_hex(&a.bytes) });
    }
    let manifest = Manifest {
        experiment: experiment.into(),
        config_version: cfg.version,
        config_sha256: sha256_hex(config_json.as_bytes()),
        master_seed: cfg.master_seed,
        seeds: cfg.cell_seeds(),
        artifacts: entries,
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

/// Empty for `None`, otherwise the value.
pub fn opt_field<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
