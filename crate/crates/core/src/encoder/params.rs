//! Model configuration, named parameter storage, and initialization.
//!
//! Parameters live in a [`ParamSet`]: an insertion-ordered list of named
//! matrices. The canonical order backs flattening (for the optimizer),
//! checkpointing, and gradient extraction, while names give the forward pass
//! and diagnostics stable lookup paths like `t_s.l0.attn.h1.wq`.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mat::Mat;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded_rng};

/// Sizes of the stack. The defaults are deliberately small: the point is to
/// exercise every mechanism, not to be big.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Model width shared by all towers.
    pub dim: usize,
    pub heads: usize,
    /// Token-level transformer depth.
    pub sentence_layers: usize,
    /// Sentence-level (document) transformer depth.
    pub doc_layers: usize,
    /// Depth of each weight-predictor tower.
    pub predictor_layers: usize,
    pub ffn_dim: usize,
    /// Tokens hash into this many embedding buckets; one extra row holds the
    /// sentence-boundary marker.
    pub vocab_buckets: usize,
    /// Whole-sentence truncation budget, boundary markers included.
    pub max_tokens: usize,
    /// Dropout rate applied to sublayer outputs during training.
    pub dropout: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 32,
            heads: 2,
            sentence_layers: 2,
            doc_layers: 2,
            predictor_layers: 2,
            ffn_dim: 128,
            vocab_buckets: 4096,
            max_tokens: 512,
            dropout: 0.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.heads == 0 || !self.dim.is_multiple_of(self.heads) {
            return Err(Error::invalid(format!(
                "model width {} must be a positive multiple of {} heads",
                self.dim, self.heads
            )));
        }
        if self.vocab_buckets == 0 || self.max_tokens == 0 || self.ffn_dim == 0 {
            return Err(Error::invalid("model dimensions must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid(format!(
                "dropout {} must be in [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }

    pub fn head_dim(&self) -> usize {
        self.dim / self.heads
    }

    /// Embedding row used for the sentence-boundary marker.
    pub fn marker_id(&self) -> usize {
        self.vocab_buckets
    }
}

/// Insertion-ordered named matrices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    names: Vec<String>,
    mats: Vec<Mat>,
    index: HashMap<String, usize>,
}

impl ParamSet {
    pub fn insert(&mut self, name: impl Into<String>, mat: Mat) {
        let name = name.into();
        assert!(
            !self.index.contains_key(&name),
            "duplicate parameter {name}"
        );
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.mats.push(mat);
    }

    pub fn get(&self, name: &str) -> &Mat {
        let idx = *self
            .index
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"));
        &self.mats[idx]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Mat)> {
        self.names.iter().map(String::as_str).zip(self.mats.iter())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn total_len(&self) -> usize {
        self.mats.iter().map(|m| m.data.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.total_len());
        for mat in &self.mats {
            flat.extend_from_slice(&mat.data);
        }
        flat
    }

    pub fn assign_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.total_len(), "flat length mismatch");
        let mut offset = 0;
        for mat in &mut self.mats {
            let len = mat.data.len();
            mat.data.copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
    }

    /// `(name, start, end)` spans of each matrix inside the flat vector.
    pub fn flat_spans(&self) -> Vec<(&str, usize, usize)> {
        let mut spans = Vec::with_capacity(self.names.len());
        let mut offset = 0;
        for (name, mat) in self.iter() {
            spans.push((name, offset, offset + mat.data.len()));
            offset += mat.data.len();
        }
        spans
    }
}

/// Model parameters plus their configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub set: ParamSet,
}

/// Coarse parameter group a matrix belongs to, by name prefix.
pub fn param_group(name: &str) -> &'static str {
    if name == "embedding" {
        "embedding"
    } else if name.starts_with("t_s.") {
        "t_s"
    } else if name.starts_with("t_d.") {
        "t_d"
    } else if name.starts_with("clf.") {
        "classifier"
    } else if name.starts_with("t_alpha.") {
        "t_alpha"
    } else if name.starts_with("t_beta.") {
        "t_beta"
    } else {
        "other"
    }
}

pub const PARAM_GROUPS: [&str; 6] = ["embedding", "t_s", "t_d", "classifier", "t_alpha", "t_beta"];

fn xavier(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Mat::from_vec(
        rows,
        cols,
        (0..rows * cols)
            .map(|_| rng.random_range(-limit..limit))
            .collect(),
    )
}

fn insert_named(set: &mut ParamSet, seed: u64, name: &str, rows: usize, cols: usize) {
    let mut rng = seeded_rng(derive_seed(seed, &["init", name]));
    set.insert(name, xavier(&mut rng, rows, cols));
}

fn insert_tower(set: &mut ParamSet, seed: u64, prefix: &str, layers: usize, cfg: &ModelConfig) {
    let d = cfg.dim;
    let hd = cfg.head_dim();
    for layer in 0..layers {
        let base = format!("{prefix}.l{layer}");
        set.insert(
            format!("{base}.ln1.gain"),
            Mat::from_vec(1, d, vec![1.0; d]),
        );
        set.insert(format!("{base}.ln1.bias"), Mat::zeros(1, d));
        for h in 0..cfg.heads {
            insert_named(set, seed, &format!("{base}.attn.h{h}.wq"), d, hd);
            set.insert(format!("{base}.attn.h{h}.bq"), Mat::zeros(1, hd));
            insert_named(set, seed, &format!("{base}.attn.h{h}.wk"), d, hd);
            set.insert(format!("{base}.attn.h{h}.bk"), Mat::zeros(1, hd));
            insert_named(set, seed, &format!("{base}.attn.h{h}.wv"), d, hd);
            set.insert(format!("{base}.attn.h{h}.bv"), Mat::zeros(1, hd));
        }
        insert_named(set, seed, &format!("{base}.attn.wo"), d, d);
        set.insert(format!("{base}.attn.bo"), Mat::zeros(1, d));
        set.insert(
            format!("{base}.ln2.gain"),
            Mat::from_vec(1, d, vec![1.0; d]),
        );
        set.insert(format!("{base}.ln2.bias"), Mat::zeros(1, d));
        insert_named(set, seed, &format!("{base}.ffn.w1"), d, cfg.ffn_dim);
        set.insert(format!("{base}.ffn.b1"), Mat::zeros(1, cfg.ffn_dim));
        insert_named(set, seed, &format!("{base}.ffn.w2"), cfg.ffn_dim, d);
        set.insert(format!("{base}.ffn.b2"), Mat::zeros(1, d));
    }
    set.insert(
        format!("{prefix}.final.gain"),
        Mat::from_vec(1, d, vec![1.0; d]),
    );
    set.insert(format!("{prefix}.final.bias"), Mat::zeros(1, d));
}

/// Fresh randomly initialized parameters: Xavier-uniform weights, zero
/// biases, unit layer-norm gains. Each matrix draws from its own
/// name-derived stream, so the layout can evolve without reshuffling
/// everything else.
pub fn init_params(config: &ModelConfig, seed: u64) -> Result<ModelParams> {
    config.validate()?;
    let mut set = ParamSet::default();
    let d = config.dim;

    {
        // Comparable in scale to the positional encodings, so content can
        // compete with position from the first steps.
        let mut rng = seeded_rng(derive_seed(seed, &["init", "embedding"]));
        let rows = config.vocab_buckets + 1;
        let data = (0..rows * d).map(|_| rng.random_range(-0.5..0.5)).collect();
        set.insert("embedding", Mat::from_vec(rows, d, data));
    }

    insert_tower(&mut set, seed, "t_s", config.sentence_layers, config);
    insert_tower(&mut set, seed, "t_d", config.doc_layers, config);
    insert_named(&mut set, seed, "clf.w", d, 1);
    set.insert("clf.b", Mat::zeros(1, 1));
    insert_tower(&mut set, seed, "t_alpha", config.predictor_layers, config);
    insert_named(&mut set, seed, "t_alpha.head.w", d, 1);
    set.insert("t_alpha.head.b", Mat::zeros(1, 1));
    insert_tower(&mut set, seed, "t_beta", config.predictor_layers, config);
    insert_named(&mut set, seed, "t_beta.head.w", d, 1);
    set.insert("t_beta.head.b", Mat::zeros(1, 1));

    Ok(ModelParams {
        config: config.clone(),
        set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_and_finite() {
        let cfg = ModelConfig::default();
        let a = init_params(&cfg, 11).unwrap();
        let b = init_params(&cfg, 11).unwrap();
        assert_eq!(a.set, b.set);
        for (_, mat) in a.set.iter() {
            assert!(mat.is_finite());
        }
        let c = init_params(&cfg, 12).unwrap();
        assert_ne!(a.set, c.set);
    }

    #[test]
    fn flat_round_trip() {
        let cfg = ModelConfig::default();
        let mut params = init_params(&cfg, 5).unwrap();
        let flat = params.set.to_flat();
        assert_eq!(flat.len(), params.set.total_len());
        let mut perturbed = flat.clone();
        perturbed[0] += 1.0;
        params.set.assign_flat(&perturbed);
        assert_eq!(params.set.to_flat(), perturbed);
    }

    #[test]
    fn every_group_is_present() {
        let cfg = ModelConfig::default();
        let params = init_params(&cfg, 0).unwrap();
        let mut seen: std::collections::HashSet<&str> = Default::default();
        for (name, _) in params.set.iter() {
            let group = param_group(name);
            assert_ne!(group, "other", "unclassified parameter {name}");
            seen.insert(group);
        }
        for group in PARAM_GROUPS {
            assert!(seen.contains(group), "missing group {group}");
        }
    }

    #[test]
    fn config_validation_rejects_bad_shapes() {
        let cfg = ModelConfig {
            dim: 30,
            heads: 4,
            ..ModelConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ModelConfig {
            dropout: 1.0,
            ..ModelConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
