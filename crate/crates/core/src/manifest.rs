//! Per-stage JSON run manifests (`<stage>.manifest.json`).

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::file_digest;

pub const MANIFEST_SUFFIX: &str = ".manifest.json";

/// Configuration and file digests of one pipeline stage.
///
/// Files are keyed by file name, not full path, so manifests written into two
/// different workspaces by the same run are byte-identical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub master_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<usize>,
    pub params: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(stage: impl Into<String>, master_seed: u64) -> Self {
        RunManifest {
            stage: stage.into(),
            master_seed,
            d: None,
            l: None,
            m: None,
            params: BTreeMap::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn with_dims(mut self, d: Option<usize>, l: Option<usize>, m: Option<usize>) -> Self {
        self.d = d;
        self.l = l;
        self.m = m;
        self
    }

    pub fn param(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn record_input(&mut self, path: impl AsRef<Path>) -> Result<&mut Self> {
        let (name, digest) = name_and_digest(path.as_ref())?;
        self.inputs.insert(name, digest);
        Ok(self)
    }

    pub fn record_output(&mut self, path: impl AsRef<Path>) -> Result<&mut Self> {
        let (name, digest) = name_and_digest(path.as_ref())?;
        self.outputs.insert(name, digest);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: Option<usize>, min: usize| match v {
            Some(v) if v < min => Err(Error::InvalidArgument(format!(
                "manifest {}: {name} = {v}, must be at least {min}",
                self.stage
            ))),
            _ => Ok(()),
        };
        check("d", self.d, 2)?;
        check("l", self.l, 2)?;
        check("m", self.m, 3)
    }

    pub fn file_name(&self) -> String {
        format!("{}{MANIFEST_SUFFIX}", self.stage)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    /// Writes `<dir>/<stage>.manifest.json` and returns its path.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        self.validate()?;
        let path = dir.as_ref().join(self.file_name());
        fs::write(&path, self.to_json()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

fn name_and_digest(path: &Path) -> Result<(String, String)> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no file name", path.display())))?;
    Ok((name, file_digest(path)?))
}
