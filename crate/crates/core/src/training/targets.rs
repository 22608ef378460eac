//! Supervision targets built from label sets.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::labelsets::MultilingualLabels;

/// Binary targets for the sentence-level weight predictor: 1 for sentences in
/// the union of the four label sets, restricted to the first `n` sentences.
pub fn make_alpha_targets(labels: &MultilingualLabels, n: usize) -> Vec<f64> {
    let mut targets = vec![0.0; n];
    for i in labels.union() {
        if i < n {
            targets[i] = 1.0;
        }
    }
    targets
}

/// Training examples for the set-level predictor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaExamples {
    /// Non-empty label sets, as row indices into the four pooled set means;
    /// each is one positive example.
    pub positive_sets: Vec<usize>,
    /// Sampled zero-label index triples, one negative example per positive
    /// (empty when there are no zero-label sentences).
    pub negatives: Vec<Vec<usize>>,
}

impl BetaExamples {
    /// Targets aligned with positives followed by negatives.
    pub fn targets(&self) -> Vec<f64> {
        let mut t = vec![1.0; self.positive_sets.len()];
        t.extend(std::iter::repeat_n(0.0, self.negatives.len()));
        t
    }
}

/// Builds positive and negative examples for the set-level predictor.
///
/// Every non-empty label set is a positive example. For each positive, three
/// indices are sampled from `zero_label_pool` as one negative pseudo-set:
/// without replacement when the pool allows it, with replacement otherwise,
/// and not at all when the pool is empty (keeping the counts 1:1 whenever
/// negatives exist).
pub fn make_beta_examples(
    sets: [&[usize]; 4],
    zero_label_pool: &[usize],
    rng: &mut ChaCha12Rng,
) -> BetaExamples {
    let positive_sets: Vec<usize> = (0..4).filter(|&j| !sets[j].is_empty()).collect();
    let mut negatives = Vec::new();
    if !zero_label_pool.is_empty() {
        for _ in 0..positive_sets.len() {
            let members = if zero_label_pool.len() >= 3 {
                let mut pool = zero_label_pool.to_vec();
                let mut picked = Vec::with_capacity(3);
                for _ in 0..3 {
                    let k = rng.random_range(0..pool.len());
                    picked.push(pool.swap_remove(k));
                }
                picked
            } else {
                (0..3)
                    .map(|_| zero_label_pool[rng.random_range(0..zero_label_pool.len())])
                    .collect()
            };
            negatives.push(members);
        }
    }
    BetaExamples {
        positive_sets,
        negatives,
    }
}
