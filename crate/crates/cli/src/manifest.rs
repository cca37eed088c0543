//! Run manifests: enough to re-run a command and reproduce its outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use crate::commands::Invocation;
use crate::settings::Setting;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub input: Vec<PathBuf>,
    pub out_dir: PathBuf,
    /// Effective settings with their source.
    pub overrides: BTreeMap<String, Setting>,
    pub version: String,
    /// Wall-clock time in seconds; the only field that changes between replays.
    pub duration_seconds: f64,
    pub outputs: Vec<String>,
    pub invocation: Invocation,
}

impl RunManifest {
    pub fn read(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
    }
}
