//! Multilingual data augmentation: dictionary word replacement and pluggable
//! sentence translation.
//!
//! Word replacement (code-switching) swaps tokens for dictionary translations
//! at a configurable rate with a seeded generator, so the same configuration
//! always produces the same output. Translation is abstracted behind
//! [`TranslationProvider`]; an exact-match [`MemoryProvider`] stands in for a
//! real MT system, and the synthetic [`PrefixProvider`]/[`IdentityProvider`]
//! give invertible transforms for pipeline checks.

use rand::Rng;

use crate::corpus::{tokenize, BilingualDictionary, TranslationMemory};
use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// A deterministic sentence-level translator.
pub trait TranslationProvider: Send + Sync {
    fn source_lang(&self) -> &str;
    fn target_lang(&self) -> &str;
    /// Returns `None` when the provider does not cover the sentence.
    fn translate_sentence(&self, sentence: &str) -> Option<String>;
}

/// Passes sentences through unchanged.
#[derive(Debug, Clone)]
pub struct IdentityProvider {
    pub source_lang: String,
    pub target_lang: String,
}

impl IdentityProvider {
    pub fn new(source_lang: &str, target_lang: &str) -> Self {
        IdentityProvider {
            source_lang: source_lang.to_lowercase(),
            target_lang: target_lang.to_lowercase(),
        }
    }
}

impl TranslationProvider for IdentityProvider {
    fn source_lang(&self) -> &str {
        &self.source_lang
    }

    fn target_lang(&self) -> &str {
        &self.target_lang
    }

    fn translate_sentence(&self, sentence: &str) -> Option<String> {
        Some(sentence.to_string())
    }
}

/// Token-wise synthetic translator: every token `t` becomes `<prefix>t`.
/// Invertible with a matching reverse dictionary, which makes it useful for
/// composition checks.
#[derive(Debug, Clone)]
pub struct PrefixProvider {
    pub source_lang: String,
    pub target_lang: String,
    pub prefix: String,
}

impl PrefixProvider {
    pub fn new(source_lang: &str, target_lang: &str, prefix: &str) -> Self {
        PrefixProvider {
            source_lang: source_lang.to_lowercase(),
            target_lang: target_lang.to_lowercase(),
            prefix: prefix.to_string(),
        }
    }
}

impl TranslationProvider for PrefixProvider {
    fn source_lang(&self) -> &str {
        &self.source_lang
    }

    fn target_lang(&self) -> &str {
        &self.target_lang
    }

    fn translate_sentence(&self, sentence: &str) -> Option<String> {
        let tokens = tokenize(sentence);
        Some(
            tokens
                .tokens
                .iter()
                .map(|t| format!("{}{}", self.prefix, t))
                .collect::<Vec<_>>()
                .join(" "),
        )
    }
}

/// Exact-match lookup in a [`TranslationMemory`].
#[derive(Debug, Clone)]
pub struct MemoryProvider {
    memory: TranslationMemory,
}

impl MemoryProvider {
    pub fn new(memory: TranslationMemory) -> Self {
        MemoryProvider { memory }
    }
}

impl TranslationProvider for MemoryProvider {
    fn source_lang(&self) -> &str {
        &self.memory.source_lang
    }

    fn target_lang(&self) -> &str {
        &self.memory.target_lang
    }

    fn translate_sentence(&self, sentence: &str) -> Option<String> {
        self.memory.lookup(sentence).map(str::to_string)
    }
}

/// Word replacement configuration.
#[derive(Debug, Clone, Copy)]
pub struct WrConfig<'d> {
    /// Probability of attempting to replace each token, in `[0, 1]`.
    pub rate: f64,
    pub seed: u64,
    pub dictionary: &'d BilingualDictionary,
}

impl<'d> WrConfig<'d> {
    pub fn new(rate: f64, seed: u64, dictionary: &'d BilingualDictionary) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
            return Err(Error::invalid(format!(
                "word replacement rate {rate} must be in [0, 1]"
            )));
        }
        Ok(WrConfig {
            rate,
            seed,
            dictionary,
        })
    }
}

/// Replaces tokens with dictionary translations.
///
/// Each token independently draws a coin at `config.rate`; on success and
/// when the lowercased token has an entry, one candidate is drawn uniformly.
/// Tokens without an entry are always kept, so per-sentence token counts
/// never change. Output sentences are lowercased tokens rejoined with single
/// spaces.
pub fn word_replace(sentences: &[String], config: &WrConfig) -> Vec<String> {
    let mut rng = seeded_rng(config.seed);
    sentences
        .iter()
        .map(|sentence| {
            let tokens = tokenize(sentence);
            let replaced: Vec<String> = tokens
                .tokens
                .into_iter()
                .map(|token| {
                    let draw: f64 = rng.random();
                    if draw < config.rate {
                        if let Some(candidates) = config.dictionary.lookup(&token) {
                            let pick = rng.random_range(0..candidates.len());
                            return candidates[pick].clone();
                        }
                    }
                    token
                })
                .collect();
            replaced.join(" ")
        })
        .collect()
}

/// Result of translating a batch of sentences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtTranslation {
    pub sentences: Vec<String>,
    /// Sentences the provider did not cover and that were passed through
    /// unchanged (only possible in non-strict mode).
    pub passthrough_count: usize,
}

/// Translates sentences one by one, preserving order and count.
///
/// In strict mode a missing translation is an error naming the sentence; in
/// non-strict mode the original sentence is kept and counted.
pub fn mt_translate(
    sentences: &[String],
    provider: &dyn TranslationProvider,
    strict: bool,
) -> Result<MtTranslation> {
    let mut out = Vec::with_capacity(sentences.len());
    let mut passthrough_count = 0;
    for sentence in sentences {
        match provider.translate_sentence(sentence) {
            Some(translated) => out.push(translated),
            None if strict => return Err(Error::MissingTranslation(sentence.clone())),
            None => {
                passthrough_count += 1;
                out.push(sentence.clone());
            }
        }
    }
    Ok(MtTranslation {
        sentences: out,
        passthrough_count,
    })
}

/// Paraphrases a summary by round-tripping it: translate with `mt_provider`,
/// then map every covered token back with `wr_dict` (full-rate word
/// replacement; uncovered tokens survive unchanged).
pub fn back_translate_summary(
    summary: &[String],
    mt_provider: &dyn TranslationProvider,
    wr_dict: &BilingualDictionary,
    strict: bool,
    seed: u64,
) -> Result<Vec<String>> {
    let translated = mt_translate(summary, mt_provider, strict)?;
    let config = WrConfig::new(1.0, seed, wr_dict)?;
    Ok(word_replace(&translated.sentences, &config))
}
