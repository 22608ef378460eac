//! Compact trainable transformer stack.
//!
//! A token-level tower encodes the flat token sequence (boundary marker
//! prepended to each sentence), marker outputs become sentence vectors, a
//! document-level tower contextualizes them, and a linear+sigmoid classifier
//! scores each sentence. Two further towers predict sentence-level and
//! set-level label weights from stop-gradient copies of the sentence vectors.
//! Everything trains with exact analytic gradients from [`tape`].

pub mod checkpoint;
pub mod forward;
pub mod mat;
pub mod params;
pub mod tape;

pub use checkpoint::{load_checkpoint, save_checkpoint, RngState};
pub use forward::{build_forward, ForwardBundle, ForwardOptions, PredictorFeed, SetRequest};
pub use mat::Mat;
pub use params::{init_params, param_group, ModelConfig, ModelParams, ParamSet, PARAM_GROUPS};

use crate::corpus::TokenSeq;
use crate::error::Result;

/// Forward-pass outputs for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDoc {
    /// Token-level vectors, boundary markers included (`T x d`).
    pub token_vectors: Mat,
    /// Sentence vectors: the marker output per kept sentence (`N x d`).
    pub sentence_vectors: Mat,
    /// Contextual sentence vectors from the document tower (`N x d`).
    pub contextual_vectors: Mat,
    /// Sentences kept after whole-sentence truncation.
    pub kept_sentences: usize,
    pub total_tokens: usize,
}

/// Encodes a tokenized document. Whole sentences are truncated from the tail
/// when the token budget would be exceeded; a document whose first sentence
/// does not fit is an error.
pub fn encode_document(
    params: &ModelParams,
    doc_id: &str,
    sentences: &[TokenSeq],
) -> Result<EncodedDoc> {
    let bundle = build_forward(params, doc_id, sentences, ForwardOptions::default())?;
    Ok(EncodedDoc {
        token_vectors: bundle.tape.value(bundle.token_states).clone(),
        sentence_vectors: bundle.tape.value(bundle.sentence_states).clone(),
        contextual_vectors: bundle.tape.value(bundle.contextual_states).clone(),
        kept_sentences: bundle.kept_sentences,
        total_tokens: bundle.total_tokens,
    })
}

/// Sentence selection probabilities from contextual vectors:
/// `sigmoid(W_o v_i + b_o)` per row.
pub fn predict_scores(params: &ModelParams, contextual_vectors: &Mat) -> Vec<f64> {
    let logits = contextual_vectors.matmul(params.set.get("clf.w"));
    let bias = params.set.get("clf.b").at(0, 0);
    logits
        .data
        .iter()
        .map(|&v| 1.0 / (1.0 + (-(v + bias)).exp()))
        .collect()
}

/// Sentence-level weight probabilities from sentence vectors.
pub fn predict_alpha(params: &ModelParams, sentence_vectors: &Mat) -> Vec<f64> {
    forward::predictor_scores(params, sentence_vectors, "t_alpha", true)
}

/// Set-level weight probabilities for the four label-set mean vectors. An
/// empty set is represented by the zero vector (see [`set_means`]).
pub fn predict_beta(params: &ModelParams, set_mean_vectors: &Mat) -> [f64; 4] {
    assert_eq!(set_mean_vectors.rows, 4, "expected four set means");
    let scores = forward::predictor_scores(params, set_mean_vectors, "t_beta", false);
    [scores[0], scores[1], scores[2], scores[3]]
}

/// Set-level probabilities for arbitrarily many pooled set vectors,
/// processed as one sequence (used for negative pseudo-sets).
pub fn predict_set_scores(params: &ModelParams, set_mean_vectors: &Mat) -> Vec<f64> {
    forward::predictor_scores(params, set_mean_vectors, "t_beta", false)
}

/// Mean-pools sentence vectors per label set; empty sets yield zero rows.
pub fn set_means(sentence_vectors: &Mat, sets: [&[usize]; 4]) -> Mat {
    forward::pooling_matrix(&sets, sentence_vectors.rows).matmul(sentence_vectors)
}
