//! Batch front end for `halfplane-rbm-core`.
//!
//! Every command reads a model file (`{"sigma", "mu", "r_plus", "r_minus"}`),
//! writes its CSV tables and JSON reports into one output directory and
//! records a [`RunManifest`] next to them. [`replay`] re-runs a manifest.
//!
//! Exit codes: 0 success, 2 invalid model or input, 3 numerical failure,
//! 4 I/O, 1 anything else (including a replay that does not reproduce).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use halfplane_rbm_core::Error as CoreError;

pub mod commands;
pub mod manifest;
pub mod output;
pub mod settings;

pub use commands::{execute, Invocation, Outcome};
pub use manifest::{RunManifest, MANIFEST_FILE};
pub use settings::{AxisSpec, GridSpec, Resolver, Setting, Source};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "HALFPLANE_RBM_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("bad grid spec `{0}`: expected min:max:count with min < max and count > 0")]
    Grid(String),
    #[error("grid needs {expected} axes, got {got}")]
    GridAxes { expected: usize, got: usize },
    #[error("unknown setting `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{0}`: {1}")]
    Setting(String, String),
    #[error("{0} does not contain a JSON object")]
    NotAnObject(String),
    #[error("invalid model file {path}: {reason}")]
    Model { path: String, reason: String },
    #[error("invalid {0}")]
    Value(&'static str),
}

#[derive(Debug, thiserror::Error)]
#[error("replay differs from the recorded run in: {}", .0.join(", "))]
pub struct ReplayMismatch(pub Vec<String>);

/// Process exit code for a failed run.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return core_exit_code(e);
        }
        if cause.is::<InputError>() {
            return 2;
        }
        if cause.is::<std::io::Error>() || cause.is::<csv::Error>() || cause.is::<serde_json::Error>() {
            return 4;
        }
    }
    1
}

fn core_exit_code(e: &CoreError) -> i32 {
    use CoreError::*;
    match e {
        NotPositiveDefinite | NotRecurrent(_) | InvalidConfig(_) | NegativeHeight(_)
        | DomainMismatch(_) | OriginSingular | GridMismatch(_) | WrongHalfPlane { .. }
        | OnRealAxis(_) => 2,
        _ => 3,
    }
}

/// Caps the global rayon pool from [`THREADS_ENV`].
pub fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| InputError::Value("thread count"))?;
        if n == 0 {
            return Err(InputError::Value("thread count").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Executes an invocation, writes its outputs and manifest into `out_dir`.
pub fn run(
    inv: &Invocation,
    out_dir: &Path,
    overrides: BTreeMap<String, Setting>,
) -> anyhow::Result<(RunManifest, String)> {
    let start = Instant::now();
    let outcome = execute(inv)?;
    outcome.outputs.write_all(out_dir)?;
    let manifest = RunManifest {
        command: inv.name().to_string(),
        input: inv.inputs(),
        out_dir: out_dir.to_path_buf(),
        overrides,
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        outputs: outcome.outputs.names(),
        invocation: inv.clone(),
    };
    manifest.write(out_dir)?;
    Ok((manifest, outcome.summary))
}

/// Re-runs a manifest into `out_dir` (default: its own directory) and, when
/// that differs from the recorded directory, compares every output byte for
/// byte.
pub fn replay(manifest_path: &Path, out_dir: Option<PathBuf>) -> anyhow::Result<(RunManifest, String)> {
    let recorded = RunManifest::read(manifest_path)?;
    let target = out_dir.unwrap_or_else(|| recorded.out_dir.clone());
    let (manifest, summary) = run(&recorded.invocation, &target, recorded.overrides.clone())?;
    if target == recorded.out_dir {
        return Ok((manifest, summary));
    }
    let mut differing = Vec::new();
    for name in &recorded.outputs {
        let old = fs::read(recorded.out_dir.join(name));
        let new = fs::read(target.join(name));
        match (old, new) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => differing.push(name.clone()),
        }
    }
    if manifest.outputs != recorded.outputs {
        differing.push("<output list>".to_string());
    }
    if !differing.is_empty() {
        return Err(ReplayMismatch(differing).into());
    }
    let summary = format!("{summary}\nreplay identical: {} files", recorded.outputs.len());
    Ok((manifest, summary))
}
