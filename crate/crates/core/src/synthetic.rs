//! Deterministic synthetic bilingual corpus with a planted signal.
//!
//! Every document has eight sentences: one lead-topic sentence (early
//! position, marked by a lead keyword), one tail-topic sentence (late
//! position, tail keyword), and six noise sentences drawn from a disjoint
//! filler pool. The English summary is a verbatim span of the lead sentence,
//! so original-pair oracle labels select exactly the lead sentence.
//!
//! The "translation" is a token-wise prefix transform for documents, but the
//! summary translation additionally appends a span of the tail sentence —
//! the way real translation shifts n-gram overlap. Labels recomputed on the
//! translated pair therefore select both topic sentences: a controlled,
//! corpus-wide instance of labels flipping between languages, with the extra
//! positives pushed toward the document tail.

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use crate::corpus::{BilingualDictionary, Document, SummaryPair, TranslationMemory};
use crate::error::Result;
use crate::rng::{derive_seed, seeded_rng};

pub const SENTENCES_PER_DOC: usize = 8;
/// Lead sentences land in the first half, tail sentences in the second.
const LEAD_REGION: std::ops::Range<usize> = 0..4;
const TAIL_REGION: std::ops::Range<usize> = 4..8;

const PREFIX: &str = "xx_";

fn lead_words() -> Vec<String> {
    (0..8).map(|i| format!("lead{i}")).collect()
}

fn tail_words() -> Vec<String> {
    (0..8).map(|i| format!("tail{i}")).collect()
}

fn content_fillers() -> Vec<String> {
    (0..15).map(|i| format!("word{i:02}")).collect()
}

fn noise_fillers() -> Vec<String> {
    (0..15).map(|i| format!("noise{i:02}")).collect()
}

/// Every token the generator can emit (source language side).
pub fn vocabulary() -> Vec<String> {
    let mut v = lead_words();
    v.extend(tail_words());
    v.extend(content_fillers());
    v.extend(noise_fillers());
    v
}

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub train_docs: usize,
    pub test_docs: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            train_docs: 200,
            test_docs: 50,
            seed: 1,
        }
    }
}

#[derive(Debug)]
pub struct SynthCorpus {
    /// English training pairs.
    pub train: Vec<SummaryPair>,
    /// English test pairs (the pre-translation originals).
    pub test_source: Vec<SummaryPair>,
    /// Target-language test pairs: translated documents and summaries, the
    /// zero-shot evaluation input.
    pub test_target: Vec<SummaryPair>,
    /// Sentence-exact translation covering every document and summary.
    pub memory: TranslationMemory,
    /// Token-wise source-to-target dictionary.
    pub dict_fwd: BilingualDictionary,
    /// Token-wise target-to-source dictionary.
    pub dict_rev: BilingualDictionary,
}

fn prefix_tokens(sentence: &str) -> String {
    sentence
        .split_whitespace()
        .map(|t| format!("{PREFIX}{t}"))
        .collect::<Vec<_>>()
        .join(" ")
}

struct DocParts {
    sentences: Vec<String>,
    summary: String,
    summary_translated: String,
}

fn pick(rng: &mut ChaCha12Rng, pool: &[String], len: usize) -> Vec<String> {
    (0..len)
        .map(|_| pool[rng.random_range(0..pool.len())].clone())
        .collect()
}

/// Sample without replacement, so the two topic sentences of one document
/// never share content words (keeps their summary overlap disjoint).
fn pick_distinct(rng: &mut ChaCha12Rng, pool: &[String], len: usize) -> Vec<String> {
    assert!(len <= pool.len());
    let mut remaining: Vec<&String> = pool.iter().collect();
    (0..len)
        .map(|_| {
            remaining
                .swap_remove(rng.random_range(0..remaining.len()))
                .clone()
        })
        .collect()
}

fn generate_doc(rng: &mut ChaCha12Rng) -> DocParts {
    let leads = lead_words();
    let tails = tail_words();
    let noise = noise_fillers();

    let lead_pos = rng.random_range(LEAD_REGION);
    let tail_pos = rng.random_range(TAIL_REGION);

    // Content words are distinct within a document, so the two topic
    // sentences never overlap each other's summary span.
    let doc_content = pick_distinct(rng, &content_fillers(), 10);
    let mut lead_sentence = vec![leads[rng.random_range(0..leads.len())].clone()];
    lead_sentence.extend(doc_content[..5].iter().cloned());
    let mut tail_sentence = vec![tails[rng.random_range(0..tails.len())].clone()];
    tail_sentence.extend(doc_content[5..].iter().cloned());

    let mut sentences = Vec::with_capacity(SENTENCES_PER_DOC);
    for pos in 0..SENTENCES_PER_DOC {
        let sentence = if pos == lead_pos {
            lead_sentence.join(" ")
        } else if pos == tail_pos {
            tail_sentence.join(" ")
        } else {
            pick(rng, &noise, 6).join(" ")
        };
        sentences.push(sentence);
    }

    // The summary quotes the lead sentence's first four tokens; its
    // "translation" also quotes the tail sentence's first three.
    let summary = lead_sentence[..4].join(" ");
    let summary_translated = format!(
        "{} {}",
        prefix_tokens(&summary),
        prefix_tokens(&tail_sentence[..3].join(" "))
    );

    DocParts {
        sentences,
        summary,
        summary_translated,
    }
}

/// Generates the corpus, translation memory, and dictionaries.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    let mut memory = TranslationMemory::new("en", "fr");
    let mut dict_fwd = BilingualDictionary::new("en", "fr");
    let mut dict_rev = BilingualDictionary::new("fr", "en");
    for token in vocabulary() {
        dict_fwd.insert(&token, &format!("{PREFIX}{token}"))?;
        dict_rev.insert(&format!("{PREFIX}{token}"), &token)?;
    }

    let build_split = |split: &str, count: usize| -> Result<Vec<(SummaryPair, DocParts)>> {
        let mut pairs = Vec::with_capacity(count);
        for idx in 0..count {
            let mut rng = seeded_rng(derive_seed(cfg.seed, &["synth", split, &idx.to_string()]));
            let parts = generate_doc(&mut rng);
            let id = format!("{split}-{idx:03}");
            let document = Document::new(id, "en", parts.sentences.clone())?;
            let pair = SummaryPair::new(document, vec![parts.summary.clone()])?;
            pairs.push((pair, parts));
        }
        Ok(pairs)
    };

    let train_parts = build_split("train", cfg.train_docs)?;
    let test_parts = build_split("test", cfg.test_docs)?;

    let register = |parts: &[(SummaryPair, DocParts)], memory: &mut TranslationMemory| {
        for (pair, parts) in parts {
            for sentence in &pair.document.sentences {
                memory.insert(sentence, &prefix_tokens(sentence)).unwrap();
            }
            memory
                .insert(&parts.summary, &parts.summary_translated)
                .unwrap();
        }
    };
    register(&train_parts, &mut memory);
    register(&test_parts, &mut memory);

    let test_target: Vec<SummaryPair> = test_parts
        .iter()
        .map(|(pair, parts)| {
            let translated: Vec<String> = pair
                .document
                .sentences
                .iter()
                .map(|s| prefix_tokens(s))
                .collect();
            let document = Document::new(pair.document.id.clone(), "fr", translated)?;
            SummaryPair::new(document, vec![parts.summary_translated.clone()])
        })
        .collect::<Result<_>>()?;

    Ok(SynthCorpus {
        train: train_parts.iter().map(|(p, _)| p.clone()).collect(),
        test_source: test_parts.iter().map(|(p, _)| p.clone()).collect(),
        test_target,
        memory,
        dict_fwd,
        dict_rev,
    })
}

/// File paths written by [`write_corpus_files`].
#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub train_corpus: std::path::PathBuf,
    pub test_corpus_source: std::path::PathBuf,
    pub test_corpus_target: std::path::PathBuf,
    pub dict_fwd: std::path::PathBuf,
    pub dict_rev: std::path::PathBuf,
    pub memory: std::path::PathBuf,
}

fn write_dictionary(
    dict: &BilingualDictionary,
    path: &std::path::Path,
) -> crate::error::Result<()> {
    let mut entries: Vec<(&str, &[String])> = dict.iter().collect();
    entries.sort_by_key(|(k, _)| *k);
    let mut text = String::new();
    for (source, targets) in entries {
        for target in targets {
            text.push_str(source);
            text.push(' ');
            text.push_str(target);
            text.push('\n');
        }
    }
    std::fs::write(path, text).map_err(|source| crate::error::Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_memory(memory: &TranslationMemory, path: &std::path::Path) -> crate::error::Result<()> {
    let mut entries: Vec<(&str, &str)> = memory.iter().collect();
    entries.sort();
    let mut text = String::new();
    for (source, target) in entries {
        text.push_str(source);
        text.push('\t');
        text.push_str(target);
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|source| crate::error::Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the corpus splits, dictionaries, and translation memory under
/// `dir` in the pipeline's file formats (entries sorted, so outputs are
/// byte-stable).
pub fn write_corpus_files(
    corpus: &SynthCorpus,
    dir: &std::path::Path,
) -> crate::error::Result<SynthFiles> {
    let files = SynthFiles {
        train_corpus: dir.join("train.jsonl"),
        test_corpus_source: dir.join("test.en.jsonl"),
        test_corpus_target: dir.join("test.fr.jsonl"),
        dict_fwd: dir.join("dict.en-fr.txt"),
        dict_rev: dir.join("dict.fr-en.txt"),
        memory: dir.join("tm.en-fr.tsv"),
    };
    crate::corpus::save_corpus(&corpus.train, &files.train_corpus)?;
    crate::corpus::save_corpus(&corpus.test_source, &files.test_corpus_source)?;
    crate::corpus::save_corpus(&corpus.test_target, &files.test_corpus_target)?;
    write_dictionary(&corpus.dict_fwd, &files.dict_fwd)?;
    write_dictionary(&corpus.dict_rev, &files.dict_rev)?;
    write_memory(&corpus.memory, &files.memory)?;
    Ok(files)
}
