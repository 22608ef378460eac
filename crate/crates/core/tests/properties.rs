//! Property tests for the text-processing and weighting invariants.

use proptest::collection::vec;
use proptest::prelude::*;

use polysum_core::*;

fn token() -> impl Strategy<Value = String> {
    "[a-z]{1,6}"
}

proptest! {
    /// Tokenization is idempotent on its own joined output.
    #[test]
    fn tokenize_idempotent(text in "[ -~]{0,60}") {
        let once = tokenize(&text);
        let twice = tokenize(&once.join());
        prop_assert_eq!(once, twice);
    }

    /// Word replacement never changes per-sentence token counts and is a
    /// pure function of its seed.
    #[test]
    fn word_replace_preserves_counts(
        sentences in vec(vec(token(), 1..8), 1..5),
        rate in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let mut dict = BilingualDictionary::new("en", "fr");
        for sentence in &sentences {
            for word in sentence {
                // Cover roughly half the vocabulary.
                if word.len() % 2 == 0 {
                    dict.insert(word, &format!("xx_{word}")).unwrap();
                }
            }
        }
        let joined: Vec<String> = sentences.iter().map(|s| s.join(" ")).collect();
        let cfg = WrConfig::new(rate, seed, &dict).unwrap();
        let replaced = word_replace(&joined, &cfg);
        prop_assert_eq!(replaced.len(), joined.len());
        for (before, after) in joined.iter().zip(&replaced) {
            prop_assert_eq!(
                before.split_whitespace().count(),
                after.split_whitespace().count()
            );
        }
        prop_assert_eq!(&replaced, &word_replace(&joined, &cfg));
    }

    /// ROUGE F1 is symmetric under swapping candidate and reference, and
    /// precision/recall swap roles.
    #[test]
    fn rouge_swap_symmetry(a in vec(token(), 0..12), b in vec(token(), 0..12)) {
        let sa = TokenSeq::new(a);
        let sb = TokenSeq::new(b);
        for n in 1..=2 {
            let ab = rouge_n(&sa, &sb, n);
            let ba = rouge_n(&sb, &sa, n);
            prop_assert!((ab.f1 - ba.f1).abs() < 1e-12);
            prop_assert!((ab.precision - ba.recall).abs() < 1e-12);
        }
        let ab = rouge_l(&sa, &sb);
        let ba = rouge_l(&sb, &sa);
        prop_assert!((ab.f1 - ba.f1).abs() < 1e-12);
    }

    /// All ROUGE scores stay in [0, 1] and F1 hits 1 on identical sequences.
    #[test]
    fn rouge_bounds(a in vec(token(), 0..12)) {
        let s = TokenSeq::new(a);
        let identity = rouge_l(&s, &s);
        if s.is_empty() {
            prop_assert_eq!(identity.f1, 0.0);
        } else {
            prop_assert!((identity.f1 - 1.0).abs() < 1e-12);
        }
        prop_assert!((0.0..=1.0).contains(&identity.precision));
    }

    /// Rescaled weights stay in range, preserve order, and ignore global
    /// scaling of the set weights.
    #[test]
    fn weight_rescaling_invariants(
        alpha in vec(0.001f64..1.0, 1..10),
        beta in [0.001f64..1.0, 0.001f64..1.0, 0.001f64..1.0, 0.001f64..1.0],
        scale in 0.1f64..1.0,
        mask in vec(0u8..16, 1..10),
    ) {
        let n = alpha.len().min(mask.len());
        let alpha = &alpha[..n];
        let mut sets: [Vec<usize>; 4] = Default::default();
        for (i, &bits) in mask[..n].iter().enumerate() {
            for (j, set) in sets.iter_mut().enumerate() {
                if bits & (1 << j) != 0 {
                    set.push(i);
                }
            }
        }
        let labels = MultilingualLabels::new("p", "fr", n, sets).unwrap();
        let union = labels.union();
        let weighted = compute_weights(alpha, beta, &labels).unwrap();
        for i in 0..n {
            if union.binary_search(&i).is_ok() {
                prop_assert!((0.5..=1.0).contains(&weighted.weights[i]));
            } else {
                prop_assert_eq!(weighted.weights[i], 0.0);
            }
        }
        for &i in &union {
            for &j in &union {
                if weighted.raw[i] < weighted.raw[j] {
                    prop_assert!(weighted.weights[i] <= weighted.weights[j]);
                }
            }
        }

        // Scaling all set weights by a positive constant scales raw weights
        // and leaves the rescaled weights unchanged.
        let scaled_beta = [beta[0] * scale, beta[1] * scale, beta[2] * scale, beta[3] * scale];
        let scaled = compute_weights(alpha, scaled_beta, &labels).unwrap();
        for &i in &union {
            prop_assert!((scaled.raw[i] - scale * weighted.raw[i]).abs() < 1e-12);
            prop_assert!((scaled.weights[i] - weighted.weights[i]).abs() < 1e-9);
        }
    }

    /// Corpus records survive a save/load round trip unchanged.
    #[test]
    fn corpus_round_trip(
        ids in vec("[a-z0-9]{1,8}", 1..6),
        sentence in "[a-zA-Z ,.]{1,40}",
    ) {
        let pairs: Vec<SummaryPair> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let doc = Document::new(
                    format!("{id}-{i}"),
                    "en",
                    vec![format!("{sentence} {i}")],
                )
                .unwrap();
                SummaryPair::new(doc, vec![format!("summary {i}")]).unwrap()
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        save_corpus(&pairs, &path).unwrap();
        prop_assert_eq!(load_corpus(&path).unwrap(), pairs);
    }

    /// Selected sentences never share a trigram when blocking is on.
    #[test]
    fn blocking_excludes_shared_trigrams(
        sentences in vec(vec(token(), 3..8), 2..8),
        scores_seed in any::<u64>(),
        k in 1usize..5,
    ) {
        let seqs: Vec<TokenSeq> = sentences.iter().map(|s| TokenSeq::new(s.clone())).collect();
        let mut rng = polysum_core::rng::seeded_rng(scores_seed);
        use rand::Rng;
        let scores: Vec<f64> = (0..seqs.len()).map(|_| rng.random()).collect();
        let result = select_top_k(&seqs, &scores, k, true).unwrap();
        for (ai, &a) in result.selected_indices.iter().enumerate() {
            let set = trigram_set(&seqs[a]);
            for &b in result.selected_indices.iter().skip(ai + 1) {
                prop_assert!(!shares_trigram(&seqs[b], &set));
            }
        }
    }
}

#[test]
fn synthetic_unflipped_docs_are_memory_collisions() {
    use std::collections::HashMap;
    let corpus = synthetic::generate(&synthetic::SynthConfig::default()).unwrap();
    let provider = MemoryProvider::new(corpus.memory.clone());
    let cfg = LabelSetsConfig::default();
    let mut summary_counts: HashMap<&str, usize> = HashMap::new();
    for pair in corpus.train.iter().chain(&corpus.test_source) {
        *summary_counts.entry(pair.summary[0].as_str()).or_default() += 1;
    }
    for pair in &corpus.train {
        let labels =
            build_label_sets(pair, &provider, &corpus.dict_fwd, &corpus.dict_rev, &cfg).unwrap();
        if labels.set_a == labels.set_b {
            // Only documents whose summary string collides with another
            // document's (last-wins in the memory) may fail to flip.
            assert!(
                summary_counts[pair.summary[0].as_str()] > 1,
                "{} failed to flip without a summary collision",
                pair.document.id
            );
        }
    }
}
