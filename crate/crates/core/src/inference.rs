//! Zero-shot extraction: rank sentences by predicted score and keep the top k
//! with trigram blocking.

use std::collections::HashSet;

use crate::corpus::{tokenize, Document, TokenSeq};
use crate::encoder::{encode_document, predict_scores, ModelParams};
use crate::error::{Error, Result};

/// Token trigram used for redundancy blocking.
pub type Trigram = [String; 3];

/// All contiguous token trigrams of a sequence.
pub fn trigram_set(seq: &TokenSeq) -> HashSet<Trigram> {
    seq.tokens
        .windows(3)
        .map(|w| [w[0].clone(), w[1].clone(), w[2].clone()])
        .collect()
}

/// True when any contiguous trigram of `candidate` appears in the set.
/// Sentences with fewer than three tokens never match.
pub fn shares_trigram(candidate: &TokenSeq, selected_union: &HashSet<Trigram>) -> bool {
    candidate
        .tokens
        .windows(3)
        .any(|w| selected_union.contains(&[w[0].clone(), w[1].clone(), w[2].clone()]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    /// Selected sentence indices in document order.
    pub selected_indices: Vec<usize>,
    /// Predicted probability per scored sentence.
    pub scores: Vec<f64>,
    /// Candidates skipped by trigram blocking, in visit order.
    pub blocked_indices: Vec<usize>,
}

/// Greedy top-k selection over predicted scores (ties toward the lower
/// index). With blocking on, a candidate is skipped iff it shares a token
/// trigram with the union of already-selected sentences. Selection stops at
/// `k` sentences or when candidates run out.
pub fn select_top_k(
    sentence_tokens: &[TokenSeq],
    scores: &[f64],
    k: usize,
    blocking: bool,
) -> Result<ExtractionResult> {
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    assert_eq!(sentence_tokens.len(), scores.len());

    let mut ranked: Vec<usize> = (0..scores.len()).collect();
    ranked.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });

    let mut selected = Vec::new();
    let mut blocked = Vec::new();
    let mut seen_trigrams: HashSet<Trigram> = HashSet::new();
    for idx in ranked {
        if selected.len() == k {
            break;
        }
        if blocking && shares_trigram(&sentence_tokens[idx], &seen_trigrams) {
            blocked.push(idx);
            continue;
        }
        if blocking {
            seen_trigrams.extend(trigram_set(&sentence_tokens[idx]));
        }
        selected.push(idx);
    }
    selected.sort_unstable();

    Ok(ExtractionResult {
        selected_indices: selected,
        scores: scores.to_vec(),
        blocked_indices: blocked,
    })
}

/// Scores a document with the trained model and extracts a summary.
/// Sentences beyond the encoder's token budget are never candidates.
pub fn extract_summary(
    params: &ModelParams,
    document: &Document,
    k: usize,
    blocking: bool,
) -> Result<ExtractionResult> {
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let tokens: Vec<TokenSeq> = document.sentences.iter().map(|s| tokenize(s)).collect();
    let encoded = encode_document(params, &document.id, &tokens)?;
    let scores = predict_scores(params, &encoded.contextual_vectors);
    select_top_k(&tokens[..encoded.kept_sentences], &scores, k, blocking)
}
