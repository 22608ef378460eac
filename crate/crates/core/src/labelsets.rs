//! The four multilingual label-set variants and their persistence.
//!
//! For an English pair (D, S) and a target language, the variants are:
//!
//! - set A: greedy labels on the original pair (D, S);
//! - set B: labels on the fully translated pair (D_mt, S_mt);
//! - set C: labels on the translated document against a summary produced by
//!   full-rate word replacement of S with the source-to-target dictionary;
//! - set D: labels on the original document against a back-translated
//!   (paraphrased) summary.
//!
//! Translation is sentence-by-sentence, so every variant sees exactly the
//! original number of document sentences and all index sets refer to the
//! original sentence order.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::augment::{
    back_translate_summary, mt_translate, word_replace, TranslationProvider, WrConfig,
};
use crate::corpus::{BilingualDictionary, Document, SummaryPair};
use crate::error::{Error, Result};
use crate::oracle::{get_pos_label, OracleConfig};
use crate::rng::derive_seed;

/// The four positive-index sets for one document and target language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultilingualLabels {
    pub id: String,
    pub target_language: String,
    /// Sentence count of the source document; all indices are `< doc_len`.
    pub doc_len: usize,
    pub set_a: Vec<usize>,
    pub set_b: Vec<usize>,
    pub set_c: Vec<usize>,
    pub set_d: Vec<usize>,
}

impl MultilingualLabels {
    pub fn new(
        id: impl Into<String>,
        target_language: impl Into<String>,
        doc_len: usize,
        mut sets: [Vec<usize>; 4],
    ) -> Result<Self> {
        for set in &mut sets {
            set.sort_unstable();
            set.dedup();
            if let Some(&bad) = set.iter().find(|&&i| i >= doc_len) {
                return Err(Error::invalid(format!(
                    "label index {bad} out of range for document of {doc_len} sentences"
                )));
            }
        }
        let [set_a, set_b, set_c, set_d] = sets;
        Ok(MultilingualLabels {
            id: id.into(),
            target_language: target_language.into(),
            doc_len,
            set_a,
            set_b,
            set_c,
            set_d,
        })
    }

    pub fn sets(&self) -> [&[usize]; 4] {
        [&self.set_a, &self.set_b, &self.set_c, &self.set_d]
    }

    /// Sorted union of the four sets.
    pub fn union(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.sets().concat();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Set sizes `(n_a, n_b, n_c, n_d)`.
    pub fn sizes(&self) -> [usize; 4] {
        [
            self.set_a.len(),
            self.set_b.len(),
            self.set_c.len(),
            self.set_d.len(),
        ]
    }

    /// Number of sets containing sentence `i`.
    pub fn membership_count(&self, i: usize) -> usize {
        self.sets()
            .iter()
            .filter(|set| set.binary_search(&i).is_ok())
            .count()
    }
}

#[derive(Debug, Clone)]
pub struct LabelSetsConfig {
    pub oracle: OracleConfig,
    /// Error on sentences the provider does not cover instead of passing them
    /// through.
    pub strict: bool,
    /// Master seed; candidate draws for full-rate word replacement derive
    /// per-document streams from it.
    pub seed: u64,
}

impl Default for LabelSetsConfig {
    fn default() -> Self {
        LabelSetsConfig {
            oracle: OracleConfig::default(),
            strict: true,
            seed: 0,
        }
    }
}

/// Builds all four label sets for one pair.
///
/// `mt_dict` maps source-language words to the target language, `rev_dict`
/// maps target-language words back. The provider must keep the document
/// sentence count unchanged; a merging/splitting translation is an error.
pub fn build_label_sets(
    pair: &SummaryPair,
    mt: &dyn TranslationProvider,
    mt_dict: &BilingualDictionary,
    rev_dict: &BilingualDictionary,
    cfg: &LabelSetsConfig,
) -> Result<MultilingualLabels> {
    let doc = &pair.document;
    let n = doc.len();

    let doc_mt = mt_translate(&doc.sentences, mt, cfg.strict)?;
    if doc_mt.sentences.len() != n {
        return Err(Error::Misaligned {
            expected: n,
            got: doc_mt.sentences.len(),
        });
    }
    let translated_doc = Document::new(doc.id.clone(), mt.target_lang(), doc_mt.sentences)?;

    let summary_mt = mt_translate(&pair.summary, mt, cfg.strict)?;

    let wr_seed = derive_seed(cfg.seed, &["labelsets-wr", &doc.id]);
    let summary_wr = word_replace(&pair.summary, &WrConfig::new(1.0, wr_seed, mt_dict)?);

    let bt_seed = derive_seed(cfg.seed, &["labelsets-bt", &doc.id]);
    let summary_back = back_translate_summary(&pair.summary, mt, rev_dict, cfg.strict, bt_seed)?;

    let set_a = get_pos_label(doc, &pair.summary, &cfg.oracle).positive_indices;
    let set_b = get_pos_label(&translated_doc, &summary_mt.sentences, &cfg.oracle).positive_indices;
    let set_c = get_pos_label(&translated_doc, &summary_wr, &cfg.oracle).positive_indices;
    let set_d = get_pos_label(doc, &summary_back, &cfg.oracle).positive_indices;

    MultilingualLabels::new(
        doc.id.clone(),
        mt.target_lang(),
        n,
        [set_a, set_b, set_c, set_d],
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRecord {
    id: String,
    lang: String,
    n: usize,
    #[serde(rename = "U_a")]
    set_a: Vec<usize>,
    #[serde(rename = "U_b")]
    set_b: Vec<usize>,
    #[serde(rename = "U_c")]
    set_c: Vec<usize>,
    #[serde(rename = "U_d")]
    set_d: Vec<usize>,
}

/// Writes label sets as JSON lines.
pub fn save_label_sets(labels: &[MultilingualLabels], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = BufWriter::new(file);
    for label in labels {
        let record = LabelRecord {
            id: label.id.clone(),
            lang: label.target_language.clone(),
            n: label.doc_len,
            set_a: label.set_a.clone(),
            set_b: label.set_b.clone(),
            set_c: label.set_c.clone(),
            set_d: label.set_d.clone(),
        };
        let line = serde_json::to_string(&record).expect("label record serializes");
        writeln!(out, "{line}").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    out.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Loads label sets, validating every index against the stored sentence
/// count.
pub fn load_label_sets(path: impl AsRef<Path>) -> Result<Vec<MultilingualLabels>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let record: LabelRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, idx + 1, format!("malformed record: {e}")))?;
        let parsed = MultilingualLabels::new(
            record.id,
            record.lang,
            record.n,
            [record.set_a, record.set_b, record.set_c, record.set_d],
        )
        .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        labels.push(parsed);
    }
    Ok(labels)
}
