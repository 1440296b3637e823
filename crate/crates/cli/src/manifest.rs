use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to re-run a command and check its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileDigest>,
    pub wall_time_secs: f64,
    pub summary: serde_json::Value,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| casc_core::Error::Ingest { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Digests of the given files; directories contribute every file inside, sorted.
pub fn digest_inputs(paths: &[PathBuf]) -> CliResult<Vec<FileDigest>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = fs::read_dir(p)
                .map_err(casc_core::Error::from)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    files.iter().map(|f| Ok(FileDigest { path: f.display().to_string(), sha256: sha256_file(f)? })).collect()
}

pub fn digest_outputs(out_dir: &Path, rel: &[PathBuf]) -> CliResult<Vec<FileDigest>> {
    rel.iter().map(|r| Ok(FileDigest { path: r.display().to_string(), sha256: sha256_file(&out_dir.join(r))? })).collect()
}

impl RunManifest {
    pub fn write(&self, out_dir: &Path) -> CliResult<PathBuf> {
        let path = out_dir.join(MANIFEST_NAME);
        let mut text = serde_json::to_string_pretty(self).map_err(casc_core::Error::from)?;
        text.push('\n');
        fs::write(&path, text).map_err(casc_core::Error::from)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read manifest {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("manifest {}: {e}", path.display())))
    }
}
