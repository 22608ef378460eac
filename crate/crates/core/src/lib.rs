//! Zero-shot multilingual extractive summarization with learned label weights.
//!
//! The pipeline turns abstractive (document, summary) pairs into extractive
//! training signal and transfers it across languages:
//!
//! 1. [`oracle`] converts each pair into binary sentence labels with a greedy
//!    ROUGE-maximizing heuristic.
//! 2. [`augment`] provides code-switching word replacement and pluggable
//!    sentence translation (translation memories and synthetic providers).
//! 3. [`labelsets`] builds four label variants per document: from the original
//!    pair, the fully translated pair, the translated document with a
//!    word-replaced summary, and the back-translated summary.
//! 4. [`encoder`] is a compact randomly initialized transformer stack with a
//!    sentence classifier and two weight predictor towers, trained with exact
//!    analytic gradients.
//! 5. [`labelsearch`] combines predicted sentence-level and set-level weights
//!    into per-sentence soft supervision in `[0.5, 1.0]`.
//! 6. [`training`] optimizes the joint four-term objective with Adam and a
//!    linear warmup/decay schedule.
//! 7. [`inference`] extracts top-k sentences with trigram blocking, and
//!    [`evaluation`] reports ROUGE-L with bootstrap confidence intervals plus
//!    label-position density analysis ([`kde`]).
//!
//! Everything is deterministic for a fixed seed: corpora are immutable after
//! load, random streams are derived per document, and parallel code only maps
//! over documents in index order.

pub mod augment;
pub mod corpus;
pub mod encoder;
pub mod error;
pub mod evaluation;
pub mod inference;
pub mod kde;
pub mod labelsearch;
pub mod labelsets;
pub mod oracle;
pub mod rng;
pub mod rouge;
pub mod synthetic;
pub mod training;

pub use augment::{
    back_translate_summary, mt_translate, word_replace, IdentityProvider, MemoryProvider,
    MtTranslation, PrefixProvider, TranslationProvider, WrConfig,
};
pub use corpus::{
    load_corpus, load_dictionary, load_translation_memory, save_corpus, tokenize,
    BilingualDictionary, Document, SummaryPair, TokenSeq, TranslationMemory,
};
pub use encoder::{
    encode_document, init_params, load_checkpoint, predict_alpha, predict_beta, predict_scores,
    predict_set_scores, save_checkpoint, set_means, EncodedDoc, Mat, ModelConfig, ModelParams,
    RngState,
};
pub use error::{Error, ErrorKind, Result};
pub use evaluation::{
    bootstrap_ci, evaluate, lead_k, oracle_upper_bound, per_doc_scores, score_selection,
    significance, EvalConfig, EvalReport, LanguageStats, SignificanceResult,
};
pub use inference::{extract_summary, select_top_k, shares_trigram, trigram_set, ExtractionResult};
pub use kde::{
    position_density, relative_positions, silverman_bandwidth, DensityCurve, GaussianKde,
    LabelSetChoice,
};
pub use labelsearch::{
    combine_weights, compute_weights, mask_alpha, rescale_weights, WeightedLabels,
};
pub use labelsets::{
    build_label_sets, load_label_sets, save_label_sets, LabelSetsConfig, MultilingualLabels,
};
pub use oracle::{get_pos_label, labels_from_indices, OracleConfig, OracleLabels, OracleObjective};
pub use rouge::{lcs_length, oracle_gain_score, rouge_l, rouge_n, RougeScore};
pub use training::{
    joint_loss, learning_rate, make_alpha_targets, make_beta_examples, train, LossTerms, StepLog,
    TrainConfig, TrainMode, TrainOutcome,
};
