//! Greedy extraction-label heuristic.
//!
//! Converts a (document, abstractive summary) pair into binary sentence
//! labels: sentences are added one at a time, each time picking the sentence
//! whose addition maximizes the ROUGE objective of the selected set against
//! the concatenated summary, stopping when no addition strictly improves it.

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Document, TokenSeq};
use crate::error::{Error, Result};
use crate::rouge::{oracle_gain_score, rouge_l};

/// Scoring objective for the greedy search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleObjective {
    /// Mean of ROUGE-1 F1 and ROUGE-2 F1 (the usual convention).
    #[default]
    MeanRouge12,
    /// ROUGE-L F1.
    RougeL,
}

#[derive(Debug, Clone, Default)]
pub struct OracleConfig {
    pub objective: OracleObjective,
}

/// Output of the greedy search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleLabels {
    /// Sorted 0-based indices of positive-labeled sentences.
    pub positive_indices: Vec<usize>,
    /// `(added_index, objective_after_adding)` in selection order. Scores are
    /// strictly increasing.
    pub objective_trace: Vec<(usize, f64)>,
}

impl OracleLabels {
    pub fn final_score(&self) -> f64 {
        self.objective_trace.last().map_or(0.0, |&(_, s)| s)
    }
}

fn objective(cfg: &OracleConfig, sentences: &[&TokenSeq], reference: &TokenSeq) -> f64 {
    match cfg.objective {
        OracleObjective::MeanRouge12 => oracle_gain_score(sentences.iter().copied(), reference),
        OracleObjective::RougeL => {
            let joined = TokenSeq::concat(sentences.iter().copied());
            rouge_l(&joined, reference).f1
        }
    }
}

/// Runs the greedy heuristic. Ties are broken toward the lowest sentence
/// index and there is no cap on the number of selected sentences; a summary
/// that tokenizes to nothing yields an empty label set.
pub fn get_pos_label(document: &Document, summary: &[String], cfg: &OracleConfig) -> OracleLabels {
    let sentence_tokens: Vec<TokenSeq> = document.sentences.iter().map(|s| tokenize(s)).collect();
    let reference = TokenSeq::concat(&summary.iter().map(|s| tokenize(s)).collect::<Vec<_>>());
    greedy_from_tokens(&sentence_tokens, &reference, cfg)
}

/// Greedy search over pre-tokenized sentences. Selected sentences are always
/// evaluated as a concatenation in document order.
pub fn greedy_from_tokens(
    sentences: &[TokenSeq],
    reference: &TokenSeq,
    cfg: &OracleConfig,
) -> OracleLabels {
    let n = sentences.len();
    let mut selected: Vec<usize> = Vec::new();
    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut current = 0.0f64;

    if reference.is_empty() {
        return OracleLabels {
            positive_indices: selected,
            objective_trace: trace,
        };
    }

    loop {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if selected.binary_search(&i).is_ok() {
                continue;
            }
            let insert_at = selected.partition_point(|&j| j < i);
            let mut candidate: Vec<&TokenSeq> = selected.iter().map(|&j| &sentences[j]).collect();
            candidate.insert(insert_at, &sentences[i]);
            let score = objective(cfg, &candidate, reference);
            // Strict > keeps ties resolved toward the lowest index.
            if score > current && best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        match best {
            Some((i, score)) => {
                let insert_at = selected.partition_point(|&j| j < i);
                selected.insert(insert_at, i);
                trace.push((i, score));
                current = score;
            }
            None => break,
        }
        if selected.len() == n {
            break;
        }
    }

    OracleLabels {
        positive_indices: selected,
        objective_trace: trace,
    }
}

/// Expands positive indices into a binary vector of length `n`.
pub fn labels_from_indices(positive_indices: &[usize], n: usize) -> Result<Vec<u8>> {
    let mut labels = vec![0u8; n];
    for &i in positive_indices {
        let slot = labels.get_mut(i).ok_or_else(|| {
            Error::invalid(format!("label index {i} out of range for {n} sentences"))
        })?;
        *slot = 1;
    }
    Ok(labels)
}
