//! Joint optimization of the summarizer and the two weight predictors.
//!
//! Each step samples a target language, draws the next shuffled batch of
//! documents, applies dynamic word replacement to the inputs, runs the
//! forward pass, converts predictor outputs into soft labels, and applies one
//! Adam update of the summed four-term objective under a linear
//! warmup/decay schedule. The whole run is a pure function of (corpus,
//! labels, config): random streams derive from the seed, epoch, and document
//! id, never from global state.

mod adam;
pub mod loss;
pub mod targets;

pub use loss::{
    attach_loss, bce_mean_values, joint_loss, AttachedLoss, LossSpec, LossTerms, PredictorTargets,
};
pub use targets::{make_alpha_targets, make_beta_examples, BetaExamples};

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::augment::{word_replace, WrConfig};
use crate::corpus::{tokenize, BilingualDictionary, SummaryPair, TokenSeq};
use crate::encoder::forward::{layout_document, ForwardOptions, PredictorFeed, SetRequest};
use crate::encoder::{build_forward, init_params, ModelConfig, ModelParams, RngState};
use crate::error::{Error, Result};
use crate::labelsearch::compute_weights;
use crate::labelsets::MultilingualLabels;
use crate::rng::{derive_seed, seeded_rng};
use adam::Adam;

/// What supervises the summarizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    /// Learned label weights, one model for all configured languages.
    Nlssum,
    /// Learned label weights, a single target language.
    NlssumSep,
    /// All label sets with a fixed weight for non-original sets; the weight
    /// predictors are skipped entirely.
    FixedWeight,
    /// Original-pair labels only.
    EnglishOnly,
}

impl std::str::FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nlssum" => Ok(TrainMode::Nlssum),
            "nlssum-sep" => Ok(TrainMode::NlssumSep),
            "fixed-weight" => Ok(TrainMode::FixedWeight),
            "english-only" => Ok(TrainMode::EnglishOnly),
            other => Err(Error::invalid(format!(
                "unknown training mode {other:?} (expected nlssum, nlssum-sep, fixed-weight, or english-only)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: TrainMode,
    /// Target languages; label sets must exist for every (document, language).
    pub languages: Vec<String>,
    pub steps: usize,
    pub batch_size: usize,
    /// Micro-batches accumulated per optimizer step.
    pub accumulation: usize,
    pub peak_lr: f64,
    pub warmup_steps: usize,
    pub seed: u64,
    /// Dynamic word-replacement rate applied to input documents.
    pub wr_rate: f64,
    /// Weight of non-original label sets in fixed-weight mode.
    pub fixed_weight: f64,
    /// Global gradient-norm ceiling; 0 disables clipping.
    pub clip_norm: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: TrainMode::Nlssum,
            languages: vec!["fr".to_string()],
            steps: 300,
            batch_size: 4,
            accumulation: 2,
            peak_lr: 1e-2,
            warmup_steps: 30,
            seed: 42,
            wr_rate: 0.5,
            fixed_weight: 0.8,
            clip_norm: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 || self.batch_size == 0 || self.accumulation == 0 {
            return Err(Error::invalid(
                "steps, batch size, and accumulation must be positive",
            ));
        }
        if self.warmup_steps > self.steps {
            return Err(Error::invalid(format!(
                "warmup ({}) exceeds total steps ({})",
                self.warmup_steps, self.steps
            )));
        }
        if !(0.0..=1.0).contains(&self.wr_rate) {
            return Err(Error::invalid(format!(
                "wr rate {} not in [0, 1]",
                self.wr_rate
            )));
        }
        if !(self.peak_lr.is_finite() && self.peak_lr > 0.0) {
            return Err(Error::invalid("peak learning rate must be positive"));
        }
        if !(self.clip_norm.is_finite() && self.clip_norm >= 0.0) {
            return Err(Error::invalid("gradient clip norm must be non-negative"));
        }
        if self.languages.is_empty() {
            return Err(Error::invalid("at least one target language is required"));
        }
        if self.mode == TrainMode::NlssumSep && self.languages.len() != 1 {
            return Err(Error::invalid(
                "nlssum-sep trains one language per model; configure exactly one",
            ));
        }
        if self.mode == TrainMode::FixedWeight
            && !(self.fixed_weight > 0.0 && self.fixed_weight <= 1.0)
        {
            return Err(Error::invalid(format!(
                "fixed weight {} must be in (0, 1]",
                self.fixed_weight
            )));
        }
        Ok(())
    }
}

/// Piecewise-linear schedule: 0 to peak over the warmup, then linear decay to
/// 0 at the final step. `step` is 1-based.
pub fn learning_rate(cfg: &TrainConfig, step: usize) -> f64 {
    debug_assert!(step >= 1 && step <= cfg.steps);
    if cfg.warmup_steps > 0 && step <= cfg.warmup_steps {
        cfg.peak_lr * step as f64 / cfg.warmup_steps as f64
    } else if cfg.steps == cfg.warmup_steps {
        cfg.peak_lr
    } else {
        cfg.peak_lr * (cfg.steps - step) as f64 / (cfg.steps - cfg.warmup_steps) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepLog {
    pub step: usize,
    pub lr: f64,
    pub terms: LossTerms,
}

impl StepLog {
    pub fn loss(&self) -> f64 {
        self.terms.total()
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub rng_state: RngState,
    pub log: Vec<StepLog>,
}

/// Shuffled epoch iteration over document indices.
struct DocSampler {
    seed: u64,
    len: usize,
    epoch: u64,
    order: Vec<usize>,
    cursor: usize,
}

impl DocSampler {
    fn new(len: usize, seed: u64) -> Self {
        let mut sampler = DocSampler {
            seed,
            len,
            epoch: 0,
            order: Vec::new(),
            cursor: 0,
        };
        sampler.reshuffle();
        sampler
    }

    fn reshuffle(&mut self) {
        let mut rng = seeded_rng(derive_seed(self.seed, &["order", &self.epoch.to_string()]));
        self.order = (0..self.len).collect();
        self.order.shuffle(&mut rng);
        self.cursor = 0;
    }

    fn next(&mut self) -> (usize, u64) {
        if self.cursor == self.len {
            self.epoch += 1;
            self.reshuffle();
        }
        let idx = self.order[self.cursor];
        self.cursor += 1;
        (idx, self.epoch)
    }
}

struct LabelIndex<'a> {
    by_key: HashMap<(&'a str, &'a str), &'a MultilingualLabels>,
}

impl<'a> LabelIndex<'a> {
    fn build(
        corpus: &'a [SummaryPair],
        labels: &'a [MultilingualLabels],
        languages: &'a [String],
    ) -> Result<Self> {
        let mut by_key = HashMap::new();
        for record in labels {
            by_key.insert(
                (record.id.as_str(), record.target_language.as_str()),
                record,
            );
        }
        for pair in corpus {
            for lang in languages {
                let record = by_key
                    .get(&(pair.document.id.as_str(), lang.as_str()))
                    .ok_or_else(|| {
                        Error::invalid(format!(
                            "no label sets for document {:?} and language {lang:?}",
                            pair.document.id
                        ))
                    })?;
                if record.doc_len != pair.document.len() {
                    return Err(Error::invalid(format!(
                        "label sets for {:?} cover {} sentences but the document has {}",
                        pair.document.id,
                        record.doc_len,
                        pair.document.len()
                    )));
                }
            }
        }
        Ok(LabelIndex { by_key })
    }

    fn get(&self, id: &str, lang: &str) -> &MultilingualLabels {
        self.by_key[&(id, lang)]
    }
}

/// Per-document forward, loss, and gradients.
fn doc_gradients(
    params: &ModelParams,
    pair: &SummaryPair,
    record: &MultilingualLabels,
    cfg: &TrainConfig,
    wr_dicts: &HashMap<String, BilingualDictionary>,
    lang: &str,
    epoch: u64,
) -> Result<(LossTerms, Vec<f64>)> {
    let doc = &pair.document;
    let epoch_label = epoch.to_string();

    let sentences: Vec<String> = if cfg.wr_rate > 0.0 {
        let dict = &wr_dicts[lang];
        let wr_seed = derive_seed(cfg.seed, &["wr", &epoch_label, &doc.id]);
        word_replace(&doc.sentences, &WrConfig::new(cfg.wr_rate, wr_seed, dict)?)
    } else {
        doc.sentences.clone()
    };
    let tokens: Vec<TokenSeq> = sentences.iter().map(|s| tokenize(s)).collect();

    let n = layout_document(&params.config, &doc.id, &tokens)?.kept_sentences;
    let sets: [Vec<usize>; 4] = record
        .sets()
        .map(|set| set.iter().copied().filter(|&i| i < n).collect());
    let union: Vec<usize> = record.union().into_iter().filter(|&i| i < n).collect();
    let mut hard_labels = vec![0.0; n];
    for &i in &sets[0] {
        hard_labels[i] = 1.0;
    }

    let mut dropout_rng = (params.config.dropout > 0.0)
        .then(|| seeded_rng(derive_seed(cfg.seed, &["dropout", &epoch_label, &doc.id])));

    let (mut bundle, attached) = match cfg.mode {
        TrainMode::EnglishOnly => {
            let mut bundle = build_forward(
                params,
                &doc.id,
                &tokens,
                ForwardOptions {
                    trainable: true,
                    predictors: None,
                    feed: PredictorFeed::FromEncoder,
                    dropout_rng: dropout_rng.as_mut(),
                },
            )?;
            let attached = attach_loss(
                &mut bundle,
                &LossSpec {
                    hard_labels: &hard_labels,
                    soft_labels: None,
                    predictors: None,
                },
            )?;
            (bundle, attached)
        }
        TrainMode::FixedWeight => {
            let mut soft = vec![0.0; n];
            for &i in &union {
                soft[i] = cfg.fixed_weight;
            }
            for &i in &sets[0] {
                soft[i] = 1.0;
            }
            let mut bundle = build_forward(
                params,
                &doc.id,
                &tokens,
                ForwardOptions {
                    trainable: true,
                    predictors: None,
                    feed: PredictorFeed::FromEncoder,
                    dropout_rng: dropout_rng.as_mut(),
                },
            )?;
            let attached = attach_loss(
                &mut bundle,
                &LossSpec {
                    hard_labels: &hard_labels,
                    soft_labels: Some(&soft),
                    predictors: None,
                },
            )?;
            (bundle, attached)
        }
        TrainMode::Nlssum | TrainMode::NlssumSep => {
            let pool: Vec<usize> = (0..n).filter(|i| union.binary_search(i).is_err()).collect();
            let mut beta_rng = seeded_rng(derive_seed(cfg.seed, &["beta", &epoch_label, &doc.id]));
            let set_refs: [&[usize]; 4] = [&sets[0], &sets[1], &sets[2], &sets[3]];
            let examples = make_beta_examples(set_refs, &pool, &mut beta_rng);

            let mut bundle = build_forward(
                params,
                &doc.id,
                &tokens,
                ForwardOptions {
                    trainable: true,
                    predictors: Some(SetRequest {
                        sets: set_refs,
                        negatives: &examples.negatives,
                    }),
                    feed: PredictorFeed::FromEncoder,
                    dropout_rng: dropout_rng.as_mut(),
                },
            )?;

            let alpha_hat = bundle.column_values(bundle.alpha_probs.expect("predictors built"));
            let beta_vals = bundle.column_values(bundle.beta_probs.expect("predictors built"));
            let truncated = MultilingualLabels::new(
                record.id.clone(),
                record.target_language.clone(),
                n.max(1),
                sets.clone(),
            )?;
            let weighted = compute_weights(
                &alpha_hat,
                [beta_vals[0], beta_vals[1], beta_vals[2], beta_vals[3]],
                &truncated,
            )?;

            let mut union_mask = vec![0.0; n];
            let mut alpha_labels = vec![0.0; n];
            for &i in &union {
                union_mask[i] = 1.0;
                alpha_labels[i] = 1.0;
            }
            let beta_labels = examples.targets();
            let attached = attach_loss(
                &mut bundle,
                &LossSpec {
                    hard_labels: &hard_labels,
                    soft_labels: Some(&weighted.weights),
                    predictors: Some(PredictorTargets {
                        union_mask: &union_mask,
                        alpha_labels: &alpha_labels,
                        positive_sets: &examples.positive_sets,
                        beta_labels: &beta_labels,
                    }),
                },
            )?;
            (bundle, attached)
        }
    };

    if !attached.terms.is_finite() {
        return Err(Error::NanLoss(doc.id.clone()));
    }
    bundle.tape.backward(attached.total);
    let grads = bundle.flat_gradients(params);
    Ok((attached.terms, grads))
}

fn sample_language(cfg: &TrainConfig, step: usize, micro: usize) -> &str {
    match cfg.mode {
        TrainMode::Nlssum | TrainMode::FixedWeight if cfg.languages.len() > 1 => {
            let mut rng = seeded_rng(derive_seed(
                cfg.seed,
                &["lang", &step.to_string(), &micro.to_string()],
            ));
            use rand::Rng;
            let idx = rng.random_range(0..cfg.languages.len());
            &cfg.languages[idx]
        }
        _ => &cfg.languages[0],
    }
}

/// Trains a fresh model. Deterministic: identical inputs and configuration
/// produce an identical checkpoint and log.
pub fn train(
    corpus: &[SummaryPair],
    labels: &[MultilingualLabels],
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
    wr_dicts: &HashMap<String, BilingualDictionary>,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    model_cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::invalid("training corpus is empty"));
    }
    if cfg.wr_rate > 0.0 {
        for lang in &cfg.languages {
            if !wr_dicts.contains_key(lang) {
                return Err(Error::invalid(format!(
                    "word replacement is enabled but no dictionary was provided for {lang:?}"
                )));
            }
        }
    }
    let index = LabelIndex::build(corpus, labels, &cfg.languages)?;

    let mut params = init_params(model_cfg, cfg.seed)?;
    let mut flat = params.set.to_flat();
    let mut optimizer = Adam::new(flat.len());
    let mut sampler = DocSampler::new(corpus.len(), cfg.seed);
    let mut log = Vec::with_capacity(cfg.steps);

    for step in 1..=cfg.steps {
        let lr = learning_rate(cfg, step);
        let mut grad_sum = vec![0.0; flat.len()];
        let mut term_sum = LossTerms::default();
        let mut docs_seen = 0usize;

        for micro in 0..cfg.accumulation {
            let lang = sample_language(cfg, step, micro);
            for _ in 0..cfg.batch_size {
                let (doc_idx, epoch) = sampler.next();
                let pair = &corpus[doc_idx];
                let record = index.get(&pair.document.id, lang);
                let (terms, grads) =
                    doc_gradients(&params, pair, record, cfg, wr_dicts, lang, epoch)?;
                for (acc, g) in grad_sum.iter_mut().zip(&grads) {
                    *acc += g;
                }
                term_sum.add_assign(&terms);
                docs_seen += 1;
            }
        }

        let inv = 1.0 / docs_seen as f64;
        for g in &mut grad_sum {
            *g *= inv;
        }
        if cfg.clip_norm > 0.0 {
            let norm = grad_sum.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm > cfg.clip_norm {
                let scale = cfg.clip_norm / norm;
                for g in &mut grad_sum {
                    *g *= scale;
                }
            }
        }
        optimizer.step(&mut flat, &grad_sum, lr);
        params.set.assign_flat(&flat);
        log.push(StepLog {
            step,
            lr,
            terms: term_sum.scale(inv),
        });
    }

    Ok(TrainOutcome {
        params,
        rng_state: RngState {
            seed: cfg.seed,
            step: cfg.steps as u64,
        },
        log,
    })
}
