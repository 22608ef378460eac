//! ROUGE-L evaluation with bootstrap confidence intervals, plus lead and
//! oracle baselines.
//!
//! A system is a map from document id to selected sentence indices. Each
//! document scores the ROUGE-L F1 of its concatenated selected sentences
//! against the concatenated gold summary; reports aggregate per language with
//! a percentile-bootstrap confidence interval around the mean.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{tokenize, Document, SummaryPair, TokenSeq};
use crate::error::{Error, Result};
use crate::oracle::{get_pos_label, OracleConfig};
use crate::rng::{derive_seed, fnv1a, seeded_rng};
use crate::rouge::rouge_l;

/// Bootstrap settings; `level` is the two-sided confidence level.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub system: String,
    pub seed: u64,
    pub n_resamples: usize,
    pub level: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            system: "system".to_string(),
            seed: 0,
            n_resamples: 1000,
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LanguageStats {
    pub mean: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_docs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub system: String,
    pub config_hash: String,
    /// Keyed by language code; ordered for stable serialization.
    pub languages: BTreeMap<String, LanguageStats>,
}

impl EvalReport {
    /// Mean over all documents regardless of language.
    pub fn overall_mean(&self) -> f64 {
        let (mut total, mut count) = (0.0, 0usize);
        for stats in self.languages.values() {
            total += stats.mean * stats.n_docs as f64;
            count += stats.n_docs;
        }
        if count == 0 {
            0.0
        } else {
            total / count as f64
        }
    }
}

/// ROUGE-L F1 of one selection against the gold summary.
pub fn score_selection(pair: &SummaryPair, selected: &[usize]) -> Result<f64> {
    let doc = &pair.document;
    let mut chosen: Vec<TokenSeq> = Vec::with_capacity(selected.len());
    let mut sorted = selected.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &i in &sorted {
        let sentence = doc.sentences.get(i).ok_or_else(|| {
            Error::invalid(format!(
                "selection index {i} out of range for document {:?}",
                doc.id
            ))
        })?;
        chosen.push(tokenize(sentence));
    }
    let candidate = TokenSeq::concat(&chosen);
    let reference = TokenSeq::concat(&pair.summary.iter().map(|s| tokenize(s)).collect::<Vec<_>>());
    Ok(rouge_l(&candidate, &reference).f1)
}

/// Per-document scores in corpus order. Every document must have a selection.
pub fn per_doc_scores(
    selections: &HashMap<String, Vec<usize>>,
    corpus: &[SummaryPair],
) -> Result<Vec<f64>> {
    corpus
        .par_iter()
        .map(|pair| {
            let selected = selections
                .get(&pair.document.id)
                .ok_or_else(|| Error::MissingSelection(pair.document.id.clone()))?;
            score_selection(pair, selected)
        })
        .collect()
}

/// Full evaluation report grouped by document language.
pub fn evaluate(
    selections: &HashMap<String, Vec<usize>>,
    corpus: &[SummaryPair],
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let scores = per_doc_scores(selections, corpus)?;
    let mut by_language: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (pair, score) in corpus.iter().zip(&scores) {
        by_language
            .entry(pair.document.language.clone())
            .or_default()
            .push(*score);
    }

    let mut languages = BTreeMap::new();
    for (lang, scores) in by_language {
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let lang_seed = derive_seed(cfg.seed, &["eval", &lang]);
        let (ci_lo, ci_hi) = bootstrap_ci(&scores, cfg.n_resamples, cfg.level, lang_seed);
        languages.insert(
            lang,
            LanguageStats {
                mean,
                ci_lo,
                ci_hi,
                n_docs: scores.len(),
            },
        );
    }

    let config_hash = format!(
        "{:016x}",
        fnv1a(
            format!(
                "{}|{}|{}|{}",
                cfg.system, cfg.seed, cfg.n_resamples, cfg.level
            )
            .as_bytes()
        )
    );
    Ok(EvalReport {
        system: cfg.system.clone(),
        config_hash,
        languages,
    })
}

/// First `min(k, N)` sentence indices.
pub fn lead_k(document: &Document, k: usize) -> Vec<usize> {
    (0..document.len().min(k)).collect()
}

/// Evaluates greedy oracle selections: the extractive upper bound.
pub fn oracle_upper_bound(
    corpus: &[SummaryPair],
    oracle_cfg: &OracleConfig,
    cfg: &EvalConfig,
) -> Result<EvalReport> {
    let selections: HashMap<String, Vec<usize>> = corpus
        .par_iter()
        .map(|pair| {
            let labels = get_pos_label(&pair.document, &pair.summary, oracle_cfg);
            (pair.document.id.clone(), labels.positive_indices)
        })
        .collect();
    evaluate(&selections, corpus, cfg)
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Percentile-bootstrap confidence interval for the mean. Deterministic:
/// every resample draws from its own seed derived from `seed` and the
/// resample index.
pub fn bootstrap_ci(scores: &[f64], n_resamples: usize, level: f64, seed: u64) -> (f64, f64) {
    assert!(!scores.is_empty(), "bootstrap needs at least one score");
    assert!((0.0..1.0).contains(&level) || level == 0.0 || level < 1.0);
    let n = scores.len();
    let mut means: Vec<f64> = (0..n_resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = seeded_rng(derive_seed(seed, &["boot", &r.to_string()]));
            let mut total = 0.0;
            for _ in 0..n {
                total += scores[rng.random_range(0..n)];
            }
            total / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    (percentile(&means, alpha), percentile(&means, 1.0 - alpha))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceResult {
    pub mean_difference: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// The confidence interval of the paired difference excludes zero.
    pub significant: bool,
}

/// Paired bootstrap test on per-document score differences (`b - a`).
/// Both systems must cover exactly the same document ids.
pub fn significance(
    scores_a: &HashMap<String, f64>,
    scores_b: &HashMap<String, f64>,
    n_resamples: usize,
    level: f64,
    seed: u64,
) -> Result<SignificanceResult> {
    if scores_a.len() != scores_b.len() {
        return Err(Error::invalid(format!(
            "paired systems cover {} vs {} documents",
            scores_a.len(),
            scores_b.len()
        )));
    }
    let mut ids: Vec<&String> = scores_a.keys().collect();
    ids.sort();
    let mut diffs = Vec::with_capacity(ids.len());
    for id in ids {
        let b = scores_b
            .get(id)
            .ok_or_else(|| Error::invalid(format!("document {id:?} missing from one system")))?;
        diffs.push(b - scores_a[id]);
    }
    let mean_difference = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let (ci_lo, ci_hi) = bootstrap_ci(&diffs, n_resamples, level, seed);
    Ok(SignificanceResult {
        mean_difference,
        ci_lo,
        ci_hi,
        significant: !(ci_lo <= 0.0 && 0.0 <= ci_hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: &str, lang: &str, sentences: &[&str], summary: &[&str]) -> SummaryPair {
        let doc =
            Document::new(id, lang, sentences.iter().map(|s| s.to_string()).collect()).unwrap();
        SummaryPair::new(doc, summary.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn verbatim_selection_scores_one() {
        let p = pair(
            "a",
            "en",
            &["the cat sat", "dogs bark loudly"],
            &["the cat sat"],
        );
        assert!((score_selection(&p, &[0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(score_selection(&p, &[]).unwrap(), 0.0);
    }

    #[test]
    fn three_doc_fixture_mean() {
        // Hand scores: doc a: cand [a b c d] vs ref [a c d] -> 6/7;
        // doc b: identical -> 1.0; doc c: disjoint -> 0.0.
        let corpus = vec![
            pair("a", "en", &["a b c d"], &["a c d"]),
            pair("b", "en", &["same words here"], &["same words here"]),
            pair("c", "en", &["totally different"], &["nothing shared"]),
        ];
        let mut selections = HashMap::new();
        for id in ["a", "b", "c"] {
            selections.insert(id.to_string(), vec![0]);
        }
        let scores = per_doc_scores(&selections, &corpus).unwrap();
        let mean = scores.iter().sum::<f64>() / 3.0;
        assert!((scores[0] - 6.0 / 7.0).abs() < 1e-9);
        assert!((mean - 0.619_047_619).abs() < 1e-6);
    }

    #[test]
    fn missing_selection_is_an_error() {
        let corpus = vec![pair("a", "en", &["x y"], &["x"])];
        let selections = HashMap::new();
        assert!(matches!(
            per_doc_scores(&selections, &corpus),
            Err(Error::MissingSelection(id)) if id == "a"
        ));
    }

    #[test]
    fn evaluate_groups_by_language() {
        let corpus = vec![
            pair("a", "en", &["one two"], &["one two"]),
            pair("b", "de", &["drei vier"], &["drei vier"]),
            pair("c", "de", &["funf sechs"], &["nicht da"]),
        ];
        let mut selections = HashMap::new();
        for id in ["a", "b", "c"] {
            selections.insert(id.to_string(), vec![0]);
        }
        let report = evaluate(&selections, &corpus, &EvalConfig::default()).unwrap();
        assert_eq!(report.languages.len(), 2);
        assert_eq!(report.languages["en"].n_docs, 1);
        assert_eq!(report.languages["de"].n_docs, 2);
        assert!((report.languages["en"].mean - 1.0).abs() < 1e-12);
        assert!((report.languages["de"].mean - 0.5).abs() < 1e-12);
        let de = &report.languages["de"];
        assert!(de.ci_lo <= de.mean && de.mean <= de.ci_hi);
    }

    #[test]
    fn evaluate_is_permutation_invariant() {
        let corpus = vec![
            pair("a", "en", &["one two"], &["one two"]),
            pair("b", "en", &["three four"], &["three five"]),
        ];
        let mut selections = HashMap::new();
        selections.insert("a".to_string(), vec![0]);
        selections.insert("b".to_string(), vec![0]);
        let cfg = EvalConfig::default();
        let report = evaluate(&selections, &corpus, &cfg).unwrap();
        let mut reversed = corpus.clone();
        reversed.reverse();
        let report_rev = evaluate(&selections, &reversed, &cfg).unwrap();
        assert_eq!(report, report_rev);
    }

    #[test]
    fn lead_k_examples() {
        let doc = Document::new(
            "a",
            "en",
            vec!["1".into(), "2".into(), "3".into(), "4".into(), "5".into()],
        )
        .unwrap();
        assert_eq!(lead_k(&doc, 2), vec![0, 1]);
        assert_eq!(lead_k(&doc, 5), vec![0, 1, 2, 3, 4]);
        let short = Document::new("b", "en", vec!["only".into()]).unwrap();
        assert_eq!(lead_k(&short, 3), vec![0]);
    }

    #[test]
    fn oracle_upper_bound_hits_one_on_verbatim_corpus() {
        let corpus = vec![
            pair(
                "a",
                "en",
                &["pick me now", "not this one"],
                &["pick me now"],
            ),
            pair(
                "b",
                "en",
                &["skip this", "choose this instead"],
                &["choose this instead"],
            ),
        ];
        let report =
            oracle_upper_bound(&corpus, &OracleConfig::default(), &EvalConfig::default()).unwrap();
        assert!((report.languages["en"].mean - 1.0).abs() < 1e-12);

        // Self-consistency: evaluating the oracle's own selections again
        // reproduces the report.
        let selections: HashMap<String, Vec<usize>> = corpus
            .iter()
            .map(|p| {
                let labels = get_pos_label(&p.document, &p.summary, &OracleConfig::default());
                (p.document.id.clone(), labels.positive_indices)
            })
            .collect();
        let again = evaluate(&selections, &corpus, &EvalConfig::default()).unwrap();
        assert_eq!(report.languages, again.languages);
    }

    #[test]
    fn bootstrap_constant_scores_zero_width() {
        let (lo, hi) = bootstrap_ci(&[0.4; 20], 200, 0.95, 7);
        assert_eq!(lo, hi, "interval must have exactly zero width");
        assert!((lo - 0.4).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_brackets_the_sample_mean_and_is_deterministic() {
        let scores: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin().abs()).collect();
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        let (lo, hi) = bootstrap_ci(&scores, 1000, 0.95, 11);
        assert!(lo <= mean && mean <= hi);
        assert!(lo < hi);
        assert_eq!((lo, hi), bootstrap_ci(&scores, 1000, 0.95, 11));
        assert_ne!((lo, hi), bootstrap_ci(&scores, 1000, 0.95, 12));
    }

    #[test]
    fn significance_identical_and_shifted() {
        let mut a = HashMap::new();
        let mut b = HashMap::new();
        let mut c = HashMap::new();
        for i in 0..30 {
            let score = 0.3 + 0.01 * (i as f64 % 7.0);
            a.insert(format!("doc-{i}"), score);
            b.insert(format!("doc-{i}"), score);
            c.insert(format!("doc-{i}"), score + 0.1);
        }
        let same = significance(&a, &b, 500, 0.95, 3).unwrap();
        assert!(!same.significant);
        assert!(same.ci_lo <= 0.0 && 0.0 <= same.ci_hi);

        let shifted = significance(&a, &c, 500, 0.95, 3).unwrap();
        assert!(shifted.significant);
        assert!((shifted.mean_difference - 0.1).abs() < 1e-12);

        let mut unpaired = a.clone();
        unpaired.remove("doc-0");
        assert!(significance(&unpaired, &b, 100, 0.95, 3).is_err());
    }
}
