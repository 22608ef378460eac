//! Data model and ingestion: documents, summaries, bilingual dictionaries,
//! translation memories, and deterministic tokenization.
//!
//! Corpora arrive pre-segmented into sentences; no segmentation is performed
//! here. All types are immutable after load and safe to share across threads.
//!
//! File formats (all UTF-8):
//! - corpus: JSON lines, one record per line:
//!   `{"id": str, "language": str, "sentences": [str], "summary": [str]}`
//! - dictionary: plain text, `src tgt` per line (MUSE-style; extra fields are
//!   ignored, repeated sources accumulate an ordered candidate list)
//! - translation memory: TSV, `src\ttgt` per line (exact-match semantics)

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sentence-segmented article. Sentence order is preserved from the source
/// and indices are 0-based everywhere, including serialized label files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    /// ISO-639-1 code, lowercased.
    pub language: String,
    pub sentences: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, language: &str, sentences: Vec<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::invalid("document id must not be empty"));
        }
        let language = validate_language(language)?;
        if sentences.is_empty() {
            return Err(Error::invalid(format!("document {id:?} has no sentences")));
        }
        if let Some(pos) = sentences.iter().position(|s| s.trim().is_empty()) {
            return Err(Error::invalid(format!(
                "document {id:?}: sentence {pos} is empty"
            )));
        }
        Ok(Document {
            id,
            language,
            sentences,
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// A document together with its human-written abstractive summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryPair {
    pub document: Document,
    pub summary: Vec<String>,
}

impl SummaryPair {
    pub fn new(document: Document, summary: Vec<String>) -> Result<Self> {
        if summary.is_empty() {
            return Err(Error::invalid(format!(
                "document {:?} has an empty summary",
                document.id
            )));
        }
        Ok(SummaryPair { document, summary })
    }
}

fn validate_language(code: &str) -> Result<String> {
    let lower = code.to_lowercase();
    if lower.len() != 2 || !lower.bytes().all(|b| b.is_ascii_lowercase()) {
        return Err(Error::invalid(format!(
            "language {code:?} is not a two-letter ISO-639-1 code"
        )));
    }
    Ok(lower)
}

/// Lowercased token sequence, the granularity all ROUGE scores operate on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
}

impl TokenSeq {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenSeq { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Joins tokens with single spaces.
    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }

    /// Concatenates several sequences in order.
    pub fn concat<'a>(seqs: impl IntoIterator<Item = &'a TokenSeq>) -> TokenSeq {
        let mut tokens = Vec::new();
        for seq in seqs {
            tokens.extend(seq.tokens.iter().cloned());
        }
        TokenSeq { tokens }
    }
}

/// Deterministic tokenization: lowercase, split on whitespace, and strip
/// leading/trailing punctuation into separate tokens. A character counts as
/// punctuation when it is not alphanumeric. Interior punctuation is kept, so
/// `don't` and `well-known` stay single tokens.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut tokens = Vec::new();
    for word in text.to_lowercase().split_whitespace() {
        let chars: Vec<char> = word.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        while start < end && !chars[start].is_alphanumeric() {
            start += 1;
        }
        while end > start && !chars[end - 1].is_alphanumeric() {
            end -= 1;
        }
        for &c in &chars[..start] {
            tokens.push(c.to_string());
        }
        if start < end {
            tokens.push(chars[start..end].iter().collect());
        }
        for &c in &chars[end..] {
            tokens.push(c.to_string());
        }
    }
    TokenSeq { tokens }
}

/// Word-to-translations map with case-insensitive lookup on lowercased keys.
#[derive(Debug, Clone, Default)]
pub struct BilingualDictionary {
    pub source_lang: String,
    pub target_lang: String,
    entries: HashMap<String, Vec<String>>,
}

impl BilingualDictionary {
    pub fn new(source_lang: &str, target_lang: &str) -> Self {
        BilingualDictionary {
            source_lang: source_lang.to_lowercase(),
            target_lang: target_lang.to_lowercase(),
            entries: HashMap::new(),
        }
    }

    /// Appends a candidate translation. Keys and values are lowercased;
    /// repeated inserts for one source accumulate an ordered list.
    pub fn insert(&mut self, source: &str, target: &str) -> Result<()> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::invalid("dictionary entries must not be empty"));
        }
        self.entries
            .entry(source.to_lowercase())
            .or_default()
            .push(target.to_lowercase());
        Ok(())
    }

    /// Candidate translations for a word, matched case-insensitively.
    pub fn lookup(&self, word: &str) -> Option<&[String]> {
        self.entries.get(&word.to_lowercase()).map(|v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Exact-match sentence-to-sentence table standing in for an MT system.
#[derive(Debug, Clone, Default)]
pub struct TranslationMemory {
    pub source_lang: String,
    pub target_lang: String,
    entries: HashMap<String, String>,
    /// Number of duplicate sources overwritten while loading (last wins).
    pub duplicates_overwritten: usize,
}

impl TranslationMemory {
    pub fn new(source_lang: &str, target_lang: &str) -> Self {
        TranslationMemory {
            source_lang: source_lang.to_lowercase(),
            target_lang: target_lang.to_lowercase(),
            entries: HashMap::new(),
            duplicates_overwritten: 0,
        }
    }

    pub fn insert(&mut self, source: &str, target: &str) -> Result<()> {
        if target.is_empty() {
            return Err(Error::invalid(
                "translation memory values must not be empty",
            ));
        }
        if self
            .entries
            .insert(source.to_string(), target.to_string())
            .is_some()
        {
            self.duplicates_overwritten += 1;
        }
        Ok(())
    }

    pub fn lookup(&self, sentence: &str) -> Option<&str> {
        self.entries.get(sentence).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusRecord {
    id: String,
    language: String,
    sentences: Vec<String>,
    summary: Vec<String>,
}

/// Loads a JSON-lines corpus, one record per line, order preserved.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<SummaryPair>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let record: CorpusRecord = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, lineno, format!("malformed record: {e}")))?;
        let document = Document::new(record.id, &record.language, record.sentences)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        let pair = SummaryPair::new(document, record.summary)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Writes a corpus as JSON lines. `load_corpus(save_corpus(x)) == x`.
pub fn save_corpus(pairs: &[SummaryPair], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = BufWriter::new(file);
    for pair in pairs {
        let record = CorpusRecord {
            id: pair.document.id.clone(),
            language: pair.document.language.clone(),
            sentences: pair.document.sentences.clone(),
            summary: pair.summary.clone(),
        };
        let line = serde_json::to_string(&record).expect("corpus record serializes");
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

/// Loads a MUSE-style dictionary: whitespace-separated `src tgt` pairs, first
/// two fields per line, empty lines skipped.
pub fn load_dictionary(
    path: impl AsRef<Path>,
    source_lang: &str,
    target_lang: &str,
) -> Result<BilingualDictionary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut dict = BilingualDictionary::new(source_lang, target_lang);
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(src), Some(tgt)) = (fields.next(), fields.next()) else {
            return Err(Error::parse(
                path,
                idx + 1,
                "expected at least two whitespace-separated fields",
            ));
        };
        dict.insert(src, tgt)
            .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
    }
    Ok(dict)
}

/// Loads a TSV translation memory. Duplicate sources keep the last target and
/// are counted in [`TranslationMemory::duplicates_overwritten`].
pub fn load_translation_memory(
    path: impl AsRef<Path>,
    source_lang: &str,
    target_lang: &str,
) -> Result<TranslationMemory> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut memory = TranslationMemory::new(source_lang, target_lang);
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((src, tgt)) = line.split_once('\t') else {
            return Err(Error::parse(path, idx + 1, "expected a tab separator"));
        };
        memory
            .insert(src, tgt)
            .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
    }
    Ok(memory)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write as _;
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn tokenize_strips_edge_punctuation() {
        assert_eq!(tokenize("The cat sat.").tokens, ["the", "cat", "sat", "."]);
    }

    #[test]
    fn tokenize_empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   ").is_empty());
    }

    #[test]
    fn tokenize_plain_words() {
        assert_eq!(
            tokenize("Er wurde nie angeklagt").tokens,
            ["er", "wurde", "nie", "angeklagt"]
        );
    }

    #[test]
    fn tokenize_keeps_interior_punctuation() {
        assert_eq!(
            tokenize("\"don't stop,\" he said").tokens,
            ["\"", "don't", "stop", ",", "\"", "he", "said"]
        );
    }

    #[test]
    fn tokenize_punctuation_only_word() {
        assert_eq!(tokenize("wait ...").tokens, ["wait", ".", ".", "."]);
    }

    #[test]
    fn tokenize_idempotent_on_joined_output() {
        for text in ["The cat sat.", "a-b c! (d)", "Ëlan geht's 42x"] {
            let once = tokenize(text);
            let twice = tokenize(&once.join());
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn load_corpus_two_records() {
        let file = write_temp(concat!(
            "{\"id\":\"a\",\"language\":\"en\",\"sentences\":[\"One.\"],\"summary\":[\"S.\"]}\n",
            "{\"id\":\"b\",\"language\":\"de\",\"sentences\":[\"Zwei.\"],\"summary\":[\"Z.\"]}\n",
        ));
        let pairs = load_corpus(file.path()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].document.id, "a");
        assert_eq!(pairs[1].document.id, "b");
        assert_eq!(pairs[1].document.language, "de");
    }

    #[test]
    fn load_corpus_reports_line_of_empty_summary() {
        let file = write_temp(concat!(
            "{\"id\":\"a\",\"language\":\"en\",\"sentences\":[\"One.\"],\"summary\":[\"S.\"]}\n",
            "{\"id\":\"b\",\"language\":\"en\",\"sentences\":[\"Two.\"],\"summary\":[]}\n",
        ));
        let err = load_corpus(file.path()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn load_corpus_missing_file() {
        assert!(matches!(
            load_corpus("/nonexistent/corpus.jsonl"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn corpus_round_trip_is_byte_identical() {
        let pairs: Vec<SummaryPair> = (0..200)
            .map(|i| {
                let doc = Document::new(
                    format!("doc-{i}"),
                    "en",
                    vec![format!("Sentence {i} one."), format!("Sentence {i} two.")],
                )
                .unwrap();
                SummaryPair::new(doc, vec![format!("Summary {i}.")]).unwrap()
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let first = dir.path().join("first.jsonl");
        let second = dir.path().join("second.jsonl");
        save_corpus(&pairs, &first).unwrap();
        let loaded = load_corpus(&first).unwrap();
        assert_eq!(loaded, pairs);
        save_corpus(&loaded, &second).unwrap();
        assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
    }

    #[test]
    fn dictionary_accumulates_candidates_in_order() {
        let file = write_temp("cat chat\ncat félin\n");
        let dict = load_dictionary(file.path(), "en", "fr").unwrap();
        assert_eq!(dict.lookup("cat").unwrap(), ["chat", "félin"]);
    }

    #[test]
    fn dictionary_lookup_is_case_insensitive() {
        let file = write_temp("Cat chat\n");
        let dict = load_dictionary(file.path(), "en", "fr").unwrap();
        assert_eq!(dict.lookup("CAT").unwrap(), ["chat"]);
        assert_eq!(dict.lookup("cAt").unwrap(), ["chat"]);
    }

    #[test]
    fn dictionary_empty_file_is_valid() {
        let file = write_temp("");
        let dict = load_dictionary(file.path(), "en", "fr").unwrap();
        assert!(dict.is_empty());
    }

    #[test]
    fn dictionary_single_field_line_fails_with_line_number() {
        let file = write_temp("cat chat\ncat\n");
        match load_dictionary(file.path(), "en", "fr").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn translation_memory_basic_lookup() {
        let file = write_temp("the cat sat\tle chat était assis\n");
        let memory = load_translation_memory(file.path(), "en", "fr").unwrap();
        assert_eq!(memory.len(), 1);
        assert_eq!(memory.lookup("the cat sat").unwrap(), "le chat était assis");
    }

    #[test]
    fn translation_memory_duplicate_source_last_wins() {
        let file = write_temp("src\tfirst\nsrc\tsecond\n");
        let memory = load_translation_memory(file.path(), "en", "fr").unwrap();
        assert_eq!(memory.len(), 1);
        assert_eq!(memory.lookup("src").unwrap(), "second");
        assert_eq!(memory.duplicates_overwritten, 1);
    }

    #[test]
    fn translation_memory_missing_tab_fails() {
        let file = write_temp("no tab here\n");
        match load_translation_memory(file.path(), "en", "fr").unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn translation_memory_fixture_round_trip() {
        let mut content = String::new();
        for i in 0..50 {
            content.push_str(&format!("source {i}\ttarget {i}\n"));
        }
        let file = write_temp(&content);
        let memory = load_translation_memory(file.path(), "en", "fr").unwrap();
        assert_eq!(memory.len(), 50);
        for i in 0..50 {
            assert_eq!(
                memory.lookup(&format!("source {i}")).unwrap(),
                format!("target {i}")
            );
        }
    }

    #[test]
    fn document_rejects_bad_language_and_empty_sentences() {
        assert!(Document::new("a", "english", vec!["x".into()]).is_err());
        assert!(Document::new("a", "en", vec![]).is_err());
        assert!(Document::new("a", "en", vec!["ok".into(), "  ".into()]).is_err());
        assert!(Document::new("a", "EN", vec!["ok".into()]).is_ok());
    }
}
