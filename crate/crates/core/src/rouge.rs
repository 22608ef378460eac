//! ROUGE-N and ROUGE-L scorers.
//!
//! Used both inside the greedy oracle and for final evaluation. All functions
//! are pure; degenerate inputs (empty sequences, no n-grams) score zero rather
//! than erroring. ROUGE-L is plain token-level LCS with a balanced F-score.

use std::collections::HashMap;

use crate::corpus::TokenSeq;

/// Precision/recall/F1 triple, all in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    fn from_overlap(overlap: usize, candidate_total: usize, reference_total: usize) -> Self {
        if candidate_total == 0 || reference_total == 0 {
            return RougeScore::default();
        }
        let precision = overlap as f64 / candidate_total as f64;
        let recall = overlap as f64 / reference_total as f64;
        RougeScore {
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }
}

fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// ROUGE-N: clipped n-gram overlap (multiset intersection) between candidate
/// and reference.
pub fn rouge_n(candidate: &TokenSeq, reference: &TokenSeq, n: usize) -> RougeScore {
    assert!(n >= 1, "n-gram order must be at least 1");
    let cand = &candidate.tokens;
    let reference = &reference.tokens;
    if cand.len() < n || reference.len() < n {
        return RougeScore::default();
    }
    let mut ref_counts: HashMap<&[String], usize> = HashMap::new();
    for gram in reference.windows(n) {
        *ref_counts.entry(gram).or_default() += 1;
    }
    let mut overlap = 0;
    for gram in cand.windows(n) {
        if let Some(count) = ref_counts.get_mut(gram) {
            if *count > 0 {
                *count -= 1;
                overlap += 1;
            }
        }
    }
    RougeScore::from_overlap(overlap, cand.len() - n + 1, reference.len() - n + 1)
}

/// Longest common subsequence length in O(|a|·|b|) time, O(min) space.
pub fn lcs_length(a: &TokenSeq, b: &TokenSeq) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; short.len() + 1];
    let mut curr = vec![0usize; short.len() + 1];
    for long_tok in &long.tokens {
        for (j, short_tok) in short.tokens.iter().enumerate() {
            curr[j + 1] = if long_tok == short_tok {
                prev[j] + 1
            } else {
                curr[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// ROUGE-L: LCS-based precision/recall with a balanced F-score.
pub fn rouge_l(candidate: &TokenSeq, reference: &TokenSeq) -> RougeScore {
    RougeScore::from_overlap(
        lcs_length(candidate, reference),
        candidate.len(),
        reference.len(),
    )
}

/// Objective used by the greedy oracle: candidate sentences are concatenated
/// in document order and scored as the mean of ROUGE-1 F1 and ROUGE-2 F1
/// against the reference.
pub fn oracle_gain_score<'a>(
    candidate_sentences: impl IntoIterator<Item = &'a TokenSeq>,
    reference: &TokenSeq,
) -> f64 {
    let joined = TokenSeq::concat(candidate_sentences);
    let r1 = rouge_n(&joined, reference, 1);
    let r2 = rouge_n(&joined, reference, 2);
    (r1.f1 + r2.f1) / 2.0
}
