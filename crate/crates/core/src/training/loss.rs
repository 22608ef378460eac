//! The four-term joint objective.
//!
//! `L = BCE(scores, hard labels) + BCE(scores, soft weights) +
//!  BCE(masked alpha, union labels) + BCE(beta examples, set labels)`
//!
//! Each term is a mean over its own items and the terms sum unweighted. The
//! soft weights enter as constants: the summarizer cannot lower its loss by
//! dragging the predictors toward its own outputs, and the predictors learn
//! only from their dedicated terms.

use serde::Serialize;

use crate::encoder::forward::ForwardBundle;
use crate::encoder::mat::Mat;
use crate::encoder::tape::Var;
use crate::error::{Error, Result};

/// Per-term loss values; absent terms are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LossTerms {
    pub main: f64,
    pub soft: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.main + self.soft + self.alpha + self.beta
    }

    pub fn add_assign(&mut self, other: &LossTerms) {
        self.main += other.main;
        self.soft += other.soft;
        self.alpha += other.alpha;
        self.beta += other.beta;
    }

    pub fn scale(&self, factor: f64) -> LossTerms {
        LossTerms {
            main: self.main * factor,
            soft: self.soft * factor,
            alpha: self.alpha * factor,
            beta: self.beta * factor,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.total().is_finite()
    }
}

/// Targets for one document's loss. Which terms exist depends on the
/// training mode: `soft` adds the weighted-label term, `predictors` adds the
/// two predictor terms (the forward pass must have built the towers).
pub struct LossSpec<'a> {
    pub hard_labels: &'a [f64],
    pub soft_labels: Option<&'a [f64]>,
    pub predictors: Option<PredictorTargets<'a>>,
}

pub struct PredictorTargets<'a> {
    /// 1.0 at union members, 0.0 elsewhere; multiplies the alpha predictions
    /// before their BCE so non-union entries contribute nothing.
    pub union_mask: &'a [f64],
    pub alpha_labels: &'a [f64],
    /// Rows of the pooled positive set means that are real (non-empty) sets.
    pub positive_sets: &'a [usize],
    /// Targets for positive rows followed by negative pseudo-sets.
    pub beta_labels: &'a [f64],
}

pub struct AttachedLoss {
    pub total: Var,
    pub terms: LossTerms,
}

/// Appends the loss terms to a document's graph and returns the scalar total.
pub fn attach_loss(bundle: &mut ForwardBundle, spec: &LossSpec) -> Result<AttachedLoss> {
    let n = bundle.kept_sentences;
    if spec.hard_labels.len() != n {
        return Err(Error::invalid(format!(
            "{} hard labels for {n} sentences",
            spec.hard_labels.len()
        )));
    }

    let tape = &mut bundle.tape;
    let mut terms = LossTerms::default();

    let main = tape.bce_mean(bundle.score_probs, spec.hard_labels);
    terms.main = tape.value(main).at(0, 0);
    let mut total = main;

    if let Some(soft) = spec.soft_labels {
        if soft.len() != n {
            return Err(Error::invalid(format!(
                "{} soft labels for {n} sentences",
                soft.len()
            )));
        }
        let soft_term = tape.bce_mean(bundle.score_probs, soft);
        terms.soft = tape.value(soft_term).at(0, 0);
        total = tape.add(total, soft_term);
    }

    if let Some(pred) = &spec.predictors {
        let alpha_probs = bundle.alpha_probs.ok_or_else(|| {
            Error::invalid("loss requests predictor terms but the forward pass built no predictors")
        })?;
        let beta_probs = bundle.beta_probs.ok_or_else(|| {
            Error::invalid("loss requests predictor terms but the forward pass built no predictors")
        })?;
        if pred.union_mask.len() != n || pred.alpha_labels.len() != n {
            return Err(Error::invalid("predictor target length mismatch"));
        }

        let mask = tape.constant(Mat::column(pred.union_mask));
        let masked_alpha = tape.hadamard(alpha_probs, mask);
        let alpha_term = tape.bce_mean(masked_alpha, pred.alpha_labels);
        terms.alpha = tape.value(alpha_term).at(0, 0);
        total = tape.add(total, alpha_term);

        let positives = tape.gather_rows(beta_probs, pred.positive_sets);
        let examples = match bundle.beta_neg_probs {
            Some(negatives) => tape.concat_rows(positives, negatives),
            None => positives,
        };
        let example_count = tape.value(examples).rows;
        if pred.beta_labels.len() != example_count {
            return Err(Error::invalid(format!(
                "{} beta targets for {example_count} examples",
                pred.beta_labels.len()
            )));
        }
        let beta_term = tape.bce_mean(examples, pred.beta_labels);
        terms.beta = tape.value(beta_term).at(0, 0);
        total = tape.add(total, beta_term);
    }

    Ok(AttachedLoss { total, terms })
}

/// Guarded mean binary cross-entropy over plain values; soft targets allowed.
pub fn bce_mean_values(probs: &[f64], targets: &[f64]) -> f64 {
    assert_eq!(probs.len(), targets.len());
    if probs.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for (&p, &t) in probs.iter().zip(targets) {
        if t > 0.0 {
            total -= t * p.ln();
        }
        if t < 1.0 {
            total -= (1.0 - t) * (1.0 - p).ln();
        }
    }
    total / probs.len() as f64
}

/// Pure-value version of the joint objective, mirroring [`attach_loss`].
/// `alpha` pairs masked predictions with union labels; `beta` pairs example
/// probabilities with their binary targets.
pub fn joint_loss(
    scores: &[f64],
    hard_labels: &[f64],
    soft_labels: Option<&[f64]>,
    alpha: Option<(&[f64], &[f64])>,
    beta: Option<(&[f64], &[f64])>,
) -> LossTerms {
    LossTerms {
        main: bce_mean_values(scores, hard_labels),
        soft: soft_labels.map_or(0.0, |l| bce_mean_values(scores, l)),
        alpha: alpha.map_or(0.0, |(p, t)| bce_mean_values(p, t)),
        beta: beta.map_or(0.0, |(p, t)| bce_mean_values(p, t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_sentence_hand_example() {
        // scores=0.8 vs hard 1: -ln 0.8 = 0.22314; soft 0.9: -(0.9 ln 0.8 +
        // 0.1 ln 0.2) = 0.36177; alpha 0.8 vs 1: 0.22314; beta 0.9 vs 1:
        // -ln 0.9 = 0.10536.
        let terms = joint_loss(
            &[0.8],
            &[1.0],
            Some(&[0.9]),
            Some((&[0.8], &[1.0])),
            Some((&[0.9], &[1.0])),
        );
        assert!((terms.main - 0.223_143_551_3).abs() < 1e-9);
        assert!((terms.soft - 0.361_772_987_4).abs() < 1e-9);
        assert!((terms.alpha - 0.223_143_551_3).abs() < 1e-9);
        assert!((terms.beta - 0.105_360_515_7).abs() < 1e-9);
        let expected_total = 0.223_143_551_3 + 0.361_772_987_4 + 0.223_143_551_3 + 0.105_360_515_7;
        assert!((terms.total() - expected_total).abs() < 1e-9);
    }

    #[test]
    fn saturated_predictions_leave_only_soft_entropy() {
        // Predictions at their hard targets' limits: terms 1, 3, 4 vanish and
        // term 2 becomes the binary entropy of the soft label.
        let p = 1.0 - 1e-15;
        let terms = joint_loss(
            &[p],
            &[1.0],
            Some(&[0.7]),
            Some((&[p], &[1.0])),
            Some((&[p, 1e-15], &[1.0, 0.0])),
        );
        assert!(terms.main < 1e-12);
        assert!(terms.alpha < 1e-12);
        assert!(terms.beta < 1e-12);
        let entropy = -(0.7f64 * p.ln() + 0.3 * (1.0 - p).ln());
        assert!((terms.soft - entropy).abs() < 1e-9);
    }

    #[test]
    fn soft_equal_to_hard_duplicates_term_one() {
        let scores = [0.8, 0.3, 0.6];
        let hard = [1.0, 0.0, 1.0];
        let terms = joint_loss(&scores, &hard, Some(&hard), None, None);
        assert!((terms.main - terms.soft).abs() < 1e-12);
    }
}
