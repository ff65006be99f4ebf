//! File layout and digest chaining between stages.
//!
//! Every stage writes `<stage>.manifest.json` next to its outputs. Before a
//! stage reads a file it looks at the manifests in that file's directory; if
//! one of them produced the file, the current digest must match the recorded
//! one. Files no manifest claims (external producers) are accepted as is.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use lif_core::manifest::{RunManifest, MANIFEST_SUFFIX};
use lif_core::matrix::file_digest;
use lif_core::{read_matrix, write_matrix, Matrix};

use crate::error::{CliError, CliResult};

pub const LATENTS: &str = "W.lidm";
pub const EMBEDDINGS: &str = "F.lidm";
pub const SIMILARITY: &str = "similarity.lidm";
pub const LABELS: &str = "labels.lidm";
pub const THRESHOLDS: &str = "thresholds.lidm";
pub const SIMILARITY_CSV: &str = "similarity.csv";
pub const BOUNDARIES: &str = "boundaries.lidm";
pub const BOUNDARY_STATS: &str = "boundaries.stats.json";
pub const DATASET: &str = "dataset.lidm";
pub const RECORDS: &str = "records.jsonl";
pub const DATASET_EMBEDDINGS: &str = "E.lidm";
pub const TOY_MANIFEST: &str = "toy.manifest.json";
pub const SUMMARY: &str = "summary.json";

/// `explicit` if given, else `dir/name`.
pub fn resolve(explicit: &Option<PathBuf>, dir: &Path, name: &str) -> PathBuf {
    explicit.clone().unwrap_or_else(|| dir.join(name))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

/// Rejects `path` if a sibling manifest recorded a different digest for it.
pub fn check_input(path: &Path) -> CliResult<()> {
    if !path.exists() {
        return Err(CliError::Io(format!("{}: no such file", path.display())));
    }
    let Some(name) = path.file_name().map(|n| n.to_string_lossy().into_owned()) else {
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let entries =
        fs::read_dir(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut manifests: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .is_some_and(|n| n.to_string_lossy().ends_with(MANIFEST_SUFFIX))
        })
        .collect();
    manifests.sort();

    let mut current: Option<String> = None;
    for mpath in manifests {
        let manifest = RunManifest::read(&mpath)?;
        if let Some(recorded) = manifest.outputs.get(&name) {
            let digest = match &current {
                Some(d) => d.clone(),
                None => {
                    let d = file_digest(path)?;
                    current = Some(d.clone());
                    d
                }
            };
            if &digest != recorded {
                return Err(CliError::validation(format!(
                    "stale input {}: digest does not match the one recorded by stage {:?} in {}",
                    path.display(),
                    manifest.stage,
                    mpath.display()
                )));
            }
        }
    }
    Ok(())
}

pub fn read_input_matrix(path: &Path) -> CliResult<Matrix> {
    check_input(path)?;
    Ok(read_matrix(path)?)
}

pub fn read_input_text(path: &Path) -> CliResult<String> {
    check_input(path)?;
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_output_matrix(manifest: &mut RunManifest, path: &Path, mat: &Matrix) -> CliResult<()> {
    write_matrix(path, mat)?;
    manifest.record_output(path)?;
    Ok(())
}

pub fn write_output_text(manifest: &mut RunManifest, path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    manifest.record_output(path)?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}
