//! Run directories: loss history, solution table, checkpoint and a
//! manifest that lists every file in the directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use pikan::csv::{loss_history_table, solution_table};
use pikan::kan::{Checkpoint, KanNetwork};
use pikan::oracle::{ReferenceSolution, SolverInfo};
use pikan::problems::{LossBreakdown, ProblemSpec};
use pikan::train::{Metrics, RunRecord, RunStatus};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const LOSS_HISTORY: &str = "loss_history.csv";
pub const SOLUTION: &str = "solution.csv";
pub const CHECKPOINT: &str = "checkpoint.json";
pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    /// Absent for the manifest itself.
    pub sha256: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleProvenance {
    pub method: String,
    pub info: SolverInfo,
    pub points: usize,
    pub slices: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: RunConfig,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub wall_seconds: f64,
    pub status: RunStatus,
    pub final_loss: LossBreakdown,
    pub metrics: Metrics,
    pub data_fraction: Option<f64>,
    pub data_points: usize,
    pub oracle: OracleProvenance,
    pub config_hash: String,
    pub files: Vec<FileEntry>,
}

pub fn unix_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

pub fn provenance(reference: &ReferenceSolution) -> OracleProvenance {
    OracleProvenance {
        method: reference.method.name().to_string(),
        info: reference.info.clone(),
        points: reference.len(),
        slices: reference.slices.iter().map(|s| s.t).collect(),
    }
}

/// Everything a finished run writes.
pub struct RunOutput<'a> {
    pub config: &'a RunConfig,
    pub spec: &'a ProblemSpec,
    pub reference: &'a ReferenceSolution,
    pub network: &'a KanNetwork,
    pub record: &'a RunRecord,
    pub metrics: &'a Metrics,
    pub data_points: usize,
    pub started_unix_ms: u128,
}

/// Write the run into `out`. The files are produced in a sibling staging
/// directory and moved in only once all of them exist.
pub fn write_run(out: &Path, run: &RunOutput) -> Result<RunManifest> {
    let staging = staging_dir(out);
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir_all(&staging)
        .with_context(|| format!("cannot create {}", staging.display()))?;
    let result = (|| -> Result<()> {
        loss_history_table(&run.record.rows).write(staging.join(LOSS_HISTORY))?;
        solution_table(run.spec, run.reference, |x| run.network.predict(x))?
            .write(staging.join(SOLUTION))?;
        Checkpoint::from_network(run.network).save(&staging.join(CHECKPOINT))?;
        Ok(())
    })();
    if let Err(e) = result {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    for name in [LOSS_HISTORY, SOLUTION, CHECKPOINT] {
        fs::rename(staging.join(name), out.join(name))?;
    }
    fs::remove_dir_all(&staging)?;

    let mut manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: run.config.clone(),
        started_unix_ms: run.started_unix_ms,
        finished_unix_ms: unix_ms(),
        wall_seconds: run.record.wall_seconds,
        status: run.record.status.clone(),
        final_loss: run.record.final_loss,
        metrics: run.metrics.clone(),
        data_fraction: run.spec.data.map(|d| d.fraction),
        data_points: run.data_points,
        oracle: provenance(run.reference),
        config_hash: run.record.config_hash.clone(),
        files: Vec::new(),
    };
    manifest.files = inventory(out)?;
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(out.join(MANIFEST), text)?;
    Ok(manifest)
}

fn staging_dir(out: &Path) -> PathBuf {
    let name = out
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    out.with_file_name(format!(".{name}.partial-{}", std::process::id()))
}

/// Sorted listing of the regular files in `dir`, with the manifest entry
/// included whether or not it exists yet.
pub fn inventory(dir: &Path) -> Result<Vec<FileEntry>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        if !entry.file_type()?.is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        if name == MANIFEST {
            continue;
        }
        let bytes = fs::read(entry.path())?;
        files.push(FileEntry {
            name,
            bytes: bytes.len() as u64,
            sha256: Some(hex(&Sha256::digest(&bytes))),
        });
    }
    files.push(FileEntry {
        name: MANIFEST.to_string(),
        bytes: 0,
        sha256: None,
    });
    files.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(files)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Whether a status means the loop stopped on a non-finite value.
pub fn aborted(status: &RunStatus) -> Option<String> {
    match status {
        RunStatus::Completed => None,
        RunStatus::Aborted { epoch, reason } => Some(format!("stopped at epoch {epoch}: {reason}")),
    }
}
