//! Job specifications.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_r0() -> f64 {
    1.0
}

fn default_grid() -> usize {
    64
}

/// One entry of a user-supplied sup-norm table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormEntry {
    pub alpha: usize,
    pub beta: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub function: String,
    #[serde(default)]
    pub point: [f64; 2],
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norms: Option<Vec<NormEntry>>,
    /// Points per axis of the sup-norm estimation grid.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub classify_only: bool,
    /// Expected type label, e.g. `"E6"` or `"A3"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<String>,
    #[serde(default)]
    pub outputs: Outputs,
}

impl JobSpec {
    pub fn new(function: impl Into<String>) -> Self {
        Self {
            name: None,
            function: function.into(),
            point: [0.0, 0.0],
            r0: default_r0(),
            norms: None,
            grid: default_grid(),
            seed: 0,
            classify_only: false,
            expect: None,
            outputs: Outputs::default(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.r0 > 0.0) || !self.r0.is_finite() {
            return Err(CliError::InvalidSpec(
                "r0 must be positive and finite".into(),
            ));
        }
        if self.grid < 8 {
            return Err(CliError::InvalidSpec("grid must be at least 8".into()));
        }
        if !self.point.iter().all(|v| v.is_finite()) {
            return Err(CliError::InvalidSpec("point must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: JobSpec =
            serde_json::from_str(text).map_err(|e| CliError::SpecSyntax(e.to_string()))?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(path.display().to_string(), e))?;
        let mut spec = Self::from_json(&text)?;
        if spec.name.is_none() {
            spec.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        }
        Ok(spec)
    }
}
