use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use sclab_core::experiments::ExperimentConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(name: &str, content: &[u8]) -> FileDigest {
        FileDigest {
            name: name.to_string(),
            bytes: content.len(),
            sha256: hex::encode(Sha256::digest(content)),
        }
    }
}

/// Record of one run. Only the listed files are covered by the
/// reproducibility contract; `wall_time_seconds` naturally varies.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_path: Option<String>,
    pub config: ExperimentConfig,
    pub output_dir: String,
    pub files: Vec<FileDigest>,
    pub version: &'static str,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn path_text(p: &Path) -> String {
    p.display().to_string()
}
