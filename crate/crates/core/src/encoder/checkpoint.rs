//! Versioned JSON checkpoints.
//!
//! A checkpoint stores the model configuration, every parameter matrix as a
//! flat number list in canonical order, and the training RNG position.
//! Loading validates the version and rebuilds the expected layout from the
//! stored configuration, rejecting files whose parameters do not match it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::mat::Mat;
use super::params::{init_params, ModelConfig, ModelParams, ParamSet};
use crate::error::{Error, Result};

const CHECKPOINT_VERSION: u32 = 1;

/// Position of the derived-seed training stream, enough to reproduce or
/// resume a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub step: u64,
}

#[derive(Serialize, Deserialize)]
struct ParamEntry {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    config: ModelConfig,
    rng_state: RngState,
    params: Vec<ParamEntry>,
}

pub fn save_checkpoint(
    params: &ModelParams,
    rng_state: RngState,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        config: params.config.clone(),
        rng_state,
        params: params
            .set
            .iter()
            .map(|(name, mat)| ParamEntry {
                name: name.to_string(),
                rows: mat.rows,
                cols: mat.cols,
                data: mat.data.clone(),
            })
            .collect(),
    };
    let json = serde_json::to_string(&file).expect("checkpoint serializes");
    fs::write(path, json).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(ModelParams, RngState)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: CheckpointFile = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("malformed checkpoint {}: {e}", path.display())))?;
    if file.version != CHECKPOINT_VERSION {
        return Err(Error::ConfigMismatch(format!(
            "checkpoint version {} (supported: {CHECKPOINT_VERSION})",
            file.version
        )));
    }
    file.config.validate()?;

    // The stored config dictates an exact parameter layout; anything else is
    // a corrupt or incompatible file.
    let reference = init_params(&file.config, 0)?;
    let expected: Vec<(String, usize, usize)> = reference
        .set
        .iter()
        .map(|(name, mat)| (name.to_string(), mat.rows, mat.cols))
        .collect();
    if file.params.len() != expected.len() {
        return Err(Error::ConfigMismatch(format!(
            "{} parameters, expected {}",
            file.params.len(),
            expected.len()
        )));
    }

    let mut set = ParamSet::default();
    for (entry, (name, rows, cols)) in file.params.into_iter().zip(expected) {
        if entry.name != name || entry.rows != rows || entry.cols != cols {
            return Err(Error::ConfigMismatch(format!(
                "parameter {} with shape {}x{}, expected {} with shape {rows}x{cols}",
                entry.name, entry.rows, entry.cols, name
            )));
        }
        if entry.data.len() != rows * cols {
            return Err(Error::ConfigMismatch(format!(
                "parameter {} has {} values, expected {}",
                entry.name,
                entry.data.len(),
                rows * cols
            )));
        }
        if entry.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "checkpoint parameter {}",
                entry.name
            )));
        }
        set.insert(entry.name, Mat::from_vec(rows, cols, entry.data));
    }

    Ok((
        ModelParams {
            config: file.config,
            set,
        },
        file.rng_state,
    ))
}
