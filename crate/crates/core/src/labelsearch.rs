//! Combines sentence-level and set-level weight predictions into per-sentence
//! soft supervision.
//!
//! For a sentence in the union of label sets, its raw weight is the predicted
//! sentence weight times the average of the set weights over the sets that
//! contain it. Raw weights are then affinely rescaled per document so that
//! the maximum lands at 1.0 and the minimum at 0.5; sentences outside the
//! union stay at exactly 0.

use crate::error::{Error, Result};
use crate::labelsets::MultilingualLabels;

/// Tolerance under which the raw weight spread counts as degenerate.
const DEGENERATE_SPREAD: f64 = 1e-12;

/// Weight assigned to every union sentence when all raw weights are equal
/// (midpoint of the target interval).
const DEGENERATE_WEIGHT: f64 = 0.75;

/// Full soft-label computation for one document.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedLabels {
    /// Masked sentence weights: prediction inside the union, 0 outside.
    pub alpha: Vec<f64>,
    /// Set weights in set order (a, b, c, d).
    pub beta: [f64; 4],
    /// Number of sets containing each sentence.
    pub membership: Vec<usize>,
    pub raw: Vec<f64>,
    /// Rescaled weights: in `[0.5, 1.0]` inside the union, 0 outside.
    pub weights: Vec<f64>,
    pub raw_min: f64,
    pub raw_max: f64,
}

/// Zeroes predictions outside the union.
pub fn mask_alpha(alpha_hat: &[f64], union: &[usize], n: usize) -> Result<Vec<f64>> {
    if alpha_hat.len() != n {
        return Err(Error::invalid(format!(
            "alpha has {} entries for {n} sentences",
            alpha_hat.len()
        )));
    }
    let mut masked = vec![0.0; n];
    for &i in union {
        let value = alpha_hat
            .get(i)
            .ok_or_else(|| Error::invalid(format!("union index {i} out of range for {n}")))?;
        masked[i] = *value;
    }
    Ok(masked)
}

/// Raw combined weight per sentence: `alpha_i * mean(beta_j over sets
/// containing i)`, zero outside the union.
pub fn combine_weights(alpha: &[f64], beta: &[f64; 4], labels: &MultilingualLabels) -> Vec<f64> {
    let n = alpha.len();
    let mut raw = vec![0.0; n];
    for i in 0..n {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (j, set) in labels.sets().iter().enumerate() {
            if set.binary_search(&i).is_ok() {
                sum += beta[j];
                count += 1;
            }
        }
        if count > 0 {
            raw[i] = alpha[i] * sum / count as f64;
        }
    }
    raw
}

/// Affine rescale of union weights into `[0.5, 1.0]`; equal raw weights all
/// map to 0.75. An empty union is a no-op returning zeros.
pub fn rescale_weights(raw: &[f64], union: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; raw.len()];
    if union.is_empty() {
        return out;
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &i in union {
        lo = lo.min(raw[i]);
        hi = hi.max(raw[i]);
    }
    let spread = hi - lo;
    for &i in union {
        out[i] = if spread < DEGENERATE_SPREAD {
            DEGENERATE_WEIGHT
        } else {
            (raw[i] - lo) / (2.0 * spread) + 0.5
        };
    }
    out
}

/// Runs the whole chain: mask, combine, rescale.
pub fn compute_weights(
    alpha_hat: &[f64],
    beta: [f64; 4],
    labels: &MultilingualLabels,
) -> Result<WeightedLabels> {
    let n = alpha_hat.len();
    let union = labels.union();
    let alpha = mask_alpha(alpha_hat, &union, n)?;
    let raw = combine_weights(&alpha, &beta, labels);
    let weights = rescale_weights(&raw, &union);
    let membership = (0..n).map(|i| labels.membership_count(i)).collect();
    let (mut raw_min, mut raw_max) = (0.0, 0.0);
    if !union.is_empty() {
        raw_min = union.iter().map(|&i| raw[i]).fold(f64::INFINITY, f64::min);
        raw_max = union
            .iter()
            .map(|&i| raw[i])
            .fold(f64::NEG_INFINITY, f64::max);
    }
    Ok(WeightedLabels {
        alpha,
        beta,
        membership,
        raw,
        weights,
        raw_min,
        raw_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_labels() -> MultilingualLabels {
        MultilingualLabels::new("x", "fr", 4, [vec![0], vec![0, 2], vec![2], vec![3]]).unwrap()
    }

    #[test]
    fn mask_alpha_examples() {
        let alpha_hat = [0.8, 0.5, 0.6, 0.4];
        assert_eq!(
            mask_alpha(&alpha_hat, &[0, 1, 2, 3], 4).unwrap(),
            alpha_hat.to_vec()
        );
        assert_eq!(mask_alpha(&alpha_hat, &[], 4).unwrap(), vec![0.0; 4]);
        assert_eq!(
            mask_alpha(&alpha_hat, &[0, 2, 3], 4).unwrap(),
            vec![0.8, 0.0, 0.6, 0.4]
        );
        assert!(mask_alpha(&alpha_hat, &[4], 4).is_err());
    }

    #[test]
    fn combine_weights_hand_example() {
        // alpha (masked) = [.8, 0, .6, .4]; beta = (.9, .7, .5, .3)
        // l_0 = .8 * (.9 + .7)/2 = .64; l_2 = .6 * (.7 + .5)/2 = .36;
        // l_3 = .4 * .3 = .12
        let labels = example_labels();
        let alpha = mask_alpha(&[0.8, 0.5, 0.6, 0.4], &labels.union(), 4).unwrap();
        let raw = combine_weights(&alpha, &[0.9, 0.7, 0.5, 0.3], &labels);
        let expected = [0.64, 0.0, 0.36, 0.12];
        for (got, want) in raw.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{raw:?}");
        }
    }

    #[test]
    fn single_membership_multiplies_directly() {
        let labels =
            MultilingualLabels::new("x", "fr", 2, [vec![0], vec![], vec![], vec![1]]).unwrap();
        let raw = combine_weights(&[0.8, 0.4], &[0.9, 0.7, 0.5, 0.3], &labels);
        assert!((raw[0] - 0.8 * 0.9).abs() < 1e-12);
        assert!((raw[1] - 0.4 * 0.3).abs() < 1e-12);
    }

    #[test]
    fn constant_beta_averages_out() {
        let labels = example_labels();
        let alpha = mask_alpha(&[0.8, 0.5, 0.6, 0.4], &labels.union(), 4).unwrap();
        let raw = combine_weights(&alpha, &[0.6; 4], &labels);
        for &i in &labels.union() {
            assert!((raw[i] - 0.6 * alpha[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rescale_hand_example() {
        let raw = [0.64, 0.0, 0.36, 0.12];
        let out = rescale_weights(&raw, &[0, 2, 3]);
        assert!((out[0] - 1.0).abs() < 1e-9);
        assert_eq!(out[1], 0.0);
        assert!((out[2] - 0.730_769_230_769_230_8).abs() < 1e-9);
        assert!((out[3] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rescale_endpoints_and_degenerate() {
        let out = rescale_weights(&[0.2, 0.9, 0.5], &[0, 1, 2]);
        assert_eq!(out[0], 0.5);
        assert_eq!(out[1], 1.0);

        let flat = rescale_weights(&[0.4, 0.4, 0.4], &[0, 1, 2]);
        assert!(flat.iter().all(|&w| w == DEGENERATE_WEIGHT));

        assert_eq!(rescale_weights(&[0.3, 0.4], &[]), vec![0.0, 0.0]);
    }

    #[test]
    fn rescale_preserves_order_and_range() {
        use rand::Rng;
        let mut rng = crate::rng::seeded_rng(99);
        for _ in 0..200 {
            let n = rng.random_range(1..12usize);
            let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let union: Vec<usize> = (0..n).collect();
            let out = rescale_weights(&raw, &union);
            for i in 0..n {
                assert!((0.5..=1.0).contains(&out[i]));
                for j in 0..n {
                    if raw[i] < raw[j] {
                        assert!(out[i] <= out[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn beta_scale_is_absorbed_by_rescaling() {
        let labels = example_labels();
        let alpha = mask_alpha(&[0.8, 0.5, 0.6, 0.4], &labels.union(), 4).unwrap();
        let beta = [0.9, 0.7, 0.5, 0.3];
        let raw = combine_weights(&alpha, &beta, &labels);
        let scaled_beta = [0.9 * 0.55, 0.7 * 0.55, 0.5 * 0.55, 0.3 * 0.55];
        let raw_scaled = combine_weights(&alpha, &scaled_beta, &labels);
        for &i in &labels.union() {
            assert!((raw_scaled[i] - 0.55 * raw[i]).abs() < 1e-12);
        }
        let union = labels.union();
        assert_eq!(
            rescale_weights(&raw, &union),
            rescale_weights(&raw_scaled, &union)
        );
    }

    #[test]
    fn compute_weights_full_chain() {
        let labels = example_labels();
        let weighted =
            compute_weights(&[0.8, 0.5, 0.6, 0.4], [0.9, 0.7, 0.5, 0.3], &labels).unwrap();
        assert_eq!(weighted.membership, vec![2, 0, 2, 1]);
        assert!((weighted.raw_min - 0.12).abs() < 1e-12);
        assert!((weighted.raw_max - 0.64).abs() < 1e-12);
        assert!((weighted.weights[0] - 1.0).abs() < 1e-9);
        assert_eq!(weighted.weights[1], 0.0);
        assert_eq!(weighted.alpha[1], 0.0);
    }
}
