//! Command-line pipeline for multilingual extractive summarization
//! experiments: oracle labels, augmentation, label-set building, training,
//! inference, evaluation, and label-position analysis.
//!
//! Exit codes: 0 success, 1 bad input (missing files, malformed records,
//! invalid flags), 2 internal error. All primary outputs are byte-identical
//! across reruns with the same flags and inputs.

mod config;

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use polysum_core::*;

use config::FileConfig;

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug)]
pub enum CliError {
    User(String),
    Internal(String),
}

impl CliError {
    fn user(message: impl Into<String>) -> Self {
        CliError::User(message.into())
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        match err.kind() {
            ErrorKind::User => CliError::User(err.to_string()),
            ErrorKind::Internal => CliError::Internal(err.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "polysum",
    version,
    about = "Multilingual extractive summarization pipeline"
)]
struct Cli {
    /// Optional flat key/value config file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for per-document parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProviderKind {
    Memory,
    Prefix,
    Identity,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveKind {
    #[value(name = "rouge12")]
    Rouge12,
    #[value(name = "rouge-l")]
    RougeL,
}

impl From<ObjectiveKind> for OracleObjective {
    fn from(kind: ObjectiveKind) -> Self {
        match kind {
            ObjectiveKind::Rouge12 => OracleObjective::MeanRouge12,
            ObjectiveKind::RougeL => OracleObjective::RougeL,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SetChoice {
    A,
    B,
    C,
    D,
    Union,
}

impl From<SetChoice> for LabelSetChoice {
    fn from(choice: SetChoice) -> Self {
        match choice {
            SetChoice::A => LabelSetChoice::A,
            SetChoice::B => LabelSetChoice::B,
            SetChoice::C => LabelSetChoice::C,
            SetChoice::D => LabelSetChoice::D,
            SetChoice::Union => LabelSetChoice::Union,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate greedy extraction labels for a corpus.
    OracleLabels {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "rouge12")]
        objective: ObjectiveKind,
    },
    /// Word-replace and/or translate a corpus.
    Augment {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Word replacement rate in [0, 1]; requires --dict when positive.
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Source-to-target dictionary (MUSE-style text).
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Translation memory (TSV), needed by --provider memory.
        #[arg(long)]
        tm: Option<PathBuf>,
        /// Translate documents and summaries after word replacement.
        #[arg(long, value_enum)]
        provider: Option<ProviderKind>,
        /// Fail on sentences the provider does not cover.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value = "en")]
        source_lang: String,
        #[arg(long, default_value = "fr")]
        target_lang: String,
    },
    /// Build the four multilingual label sets per document.
    Labelsets {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Source-to-target dictionary used for summary word replacement.
        #[arg(long)]
        dict: Option<PathBuf>,
        /// Target-to-source dictionary used for back translation.
        #[arg(long)]
        rev_dict: Option<PathBuf>,
        #[arg(long)]
        tm: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "memory")]
        provider: ProviderKind,
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "rouge12")]
        objective: ObjectiveKind,
        #[arg(long, default_value = "en")]
        source_lang: String,
        #[arg(long, default_value = "fr")]
        target_lang: String,
        /// Also dump per-sentence soft weights computed with this model.
        #[arg(long, requires = "dump_weights")]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "checkpoint")]
        dump_weights: Option<PathBuf>,
    },
    /// Train the summarizer and weight predictors.
    Train {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// nlssum, nlssum-sep, fixed-weight, or english-only.
        #[arg(long)]
        mode: Option<String>,
        /// Comma-separated target languages.
        #[arg(long)]
        langs: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        accum: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        warmup: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        wr_rate: Option<f64>,
        #[arg(long)]
        fixed_weight: Option<f64>,
        /// Word-replacement dictionary per language, as LANG=PATH; repeat for
        /// several languages.
        #[arg(long = "dict", value_name = "LANG=PATH")]
        dicts: Vec<String>,
        /// Checkpoint output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Step-indexed loss log (CSV).
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Extract summaries with a trained model.
    Infer {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        /// Disable trigram blocking.
        #[arg(long)]
        no_blocking: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score selections against gold summaries with bootstrap intervals.
    Evaluate {
        #[arg(long)]
        selections: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Second selections file; adds a paired significance test.
        #[arg(long)]
        compare: Option<PathBuf>,
        #[arg(long)]
        resamples: Option<usize>,
        #[arg(long)]
        system: Option<String>,
    },
    /// Kernel density of positive-label positions, as CSV.
    AnalyzePositions {
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "union")]
        set: SetChoice,
        #[arg(long)]
        bandwidth: Option<f64>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not failures.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::User(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(message)) => {
            eprintln!("internal error: {message}");
            ExitCode::from(2)
        }
    }
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes)
        .map_err(|e| CliError::user(format!("cannot write {}: {e}", path.display())))
}

fn build_provider(
    kind: ProviderKind,
    tm: Option<&PathBuf>,
    source_lang: &str,
    target_lang: &str,
) -> CliResult<Box<dyn TranslationProvider>> {
    Ok(match kind {
        ProviderKind::Memory => {
            let path =
                tm.ok_or_else(|| CliError::user("--tm is required with --provider memory"))?;
            let memory = load_translation_memory(path, source_lang, target_lang)?;
            if memory.duplicates_overwritten > 0 {
                eprintln!(
                    "warning: {} duplicate translation-memory sources overwritten (last wins)",
                    memory.duplicates_overwritten
                );
            }
            Box::new(MemoryProvider::new(memory))
        }
        ProviderKind::Prefix => Box::new(PrefixProvider::new(source_lang, target_lang, "xx_")),
        ProviderKind::Identity => Box::new(IdentityProvider::new(source_lang, target_lang)),
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let file_cfg = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::OracleLabels {
            corpus,
            out,
            objective,
        } => cmd_oracle_labels(&file_cfg, corpus, out, objective),
        Command::Augment {
            corpus,
            out,
            rate,
            seed,
            dict,
            tm,
            provider,
            strict,
            source_lang,
            target_lang,
        } => cmd_augment(
            &file_cfg,
            corpus,
            out,
            rate,
            seed,
            dict,
            tm,
            provider,
            strict,
            &source_lang,
            &target_lang,
        ),
        Command::Labelsets {
            corpus,
            out,
            dict,
            rev_dict,
            tm,
            provider,
            strict,
            seed,
            objective,
            source_lang,
            target_lang,
            checkpoint,
            dump_weights,
        } => cmd_labelsets(
            &file_cfg,
            corpus,
            out,
            dict,
            rev_dict,
            tm,
            provider,
            strict,
            seed,
            objective,
            &source_lang,
            &target_lang,
            checkpoint,
            dump_weights,
        ),
        Command::Train {
            corpus,
            labels,
            mode,
            langs,
            steps,
            batch,
            accum,
            lr,
            warmup,
            seed,
            wr_rate,
            fixed_weight,
            dicts,
            out,
            log,
        } => cmd_train(
            &file_cfg,
            corpus,
            labels,
            mode,
            langs,
            steps,
            batch,
            accum,
            lr,
            warmup,
            seed,
            wr_rate,
            fixed_weight,
            dicts,
            out,
            log,
        ),
        Command::Infer {
            checkpoint,
            corpus,
            k,
            no_blocking,
            out,
        } => cmd_infer(&file_cfg, checkpoint, corpus, k, no_blocking, out),
        Command::Evaluate {
            selections,
            corpus,
            seed,
            out,
            compare,
            resamples,
            system,
        } => cmd_evaluate(
            &file_cfg, selections, corpus, seed, out, compare, resamples, system,
        ),
        Command::AnalyzePositions {
            labels,
            out,
            set,
            bandwidth,
            grid,
        } => cmd_analyze_positions(&file_cfg, labels, out, set, bandwidth, grid),
    }
}

#[derive(Serialize)]
struct OracleRecord<'a> {
    id: &'a str,
    positive: &'a [usize],
}

fn cmd_oracle_labels(
    cfg: &FileConfig,
    corpus: Option<PathBuf>,
    out: Option<PathBuf>,
    objective: ObjectiveKind,
) -> CliResult<()> {
    use rayon::prelude::*;
    let corpus_path = cfg.required_path(corpus, "corpus")?;
    let out_path = cfg.required_path(out, "out")?;
    let pairs = load_corpus(&corpus_path)?;
    let oracle_cfg = OracleConfig {
        objective: objective.into(),
    };
    let labels: Vec<OracleLabels> = pairs
        .par_iter()
        .map(|pair| get_pos_label(&pair.document, &pair.summary, &oracle_cfg))
        .collect();

    let mut buffer = Vec::new();
    for (pair, label) in pairs.iter().zip(&labels) {
        let record = OracleRecord {
            id: &pair.document.id,
            positive: &label.positive_indices,
        };
        serde_json::to_writer(&mut buffer, &record).expect("record serializes");
        buffer.push(b'\n');
    }
    write_file(&out_path, &buffer)
}

#[allow(clippy::too_many_arguments)]
fn cmd_augment(
    cfg: &FileConfig,
    corpus: Option<PathBuf>,
    out: Option<PathBuf>,
    rate: Option<f64>,
    seed: Option<u64>,
    dict: Option<PathBuf>,
    tm: Option<PathBuf>,
    provider: Option<ProviderKind>,
    strict: bool,
    source_lang: &str,
    target_lang: &str,
) -> CliResult<()> {
    let corpus_path = cfg.required_path(corpus, "corpus")?;
    let out_path = cfg.required_path(out, "out")?;
    let rate = cfg.or_default(rate, "rate", 0.0)?;
    let seed = cfg.or_default(seed, "seed", 42)?;
    let dict_path = cfg.optional_path(dict, "dict");
    let pairs = load_corpus(&corpus_path)?;

    let dictionary = match (&dict_path, rate > 0.0) {
        (Some(path), _) => Some(load_dictionary(path, source_lang, target_lang)?),
        (None, true) => return Err(CliError::user("--dict is required when --rate is positive")),
        (None, false) => None,
    };

    let translator = provider
        .map(|kind| build_provider(kind, tm.as_ref(), source_lang, target_lang))
        .transpose()?;

    let mut augmented = Vec::with_capacity(pairs.len());
    let mut passthrough = 0usize;
    for pair in &pairs {
        let mut sentences = pair.document.sentences.clone();
        if rate > 0.0 {
            let dictionary = dictionary.as_ref().expect("checked above");
            let doc_seed = rng::derive_seed(seed, &["augment-wr", &pair.document.id]);
            sentences = word_replace(&sentences, &WrConfig::new(rate, doc_seed, dictionary)?);
        }
        let mut summary = pair.summary.clone();
        let mut language = pair.document.language.clone();
        if let Some(translator) = &translator {
            let doc_mt = mt_translate(&sentences, translator.as_ref(), strict)?;
            let sum_mt = mt_translate(&summary, translator.as_ref(), strict)?;
            passthrough += doc_mt.passthrough_count + sum_mt.passthrough_count;
            sentences = doc_mt.sentences;
            summary = sum_mt.sentences;
            language = translator.target_lang().to_string();
        }
        let document = Document::new(pair.document.id.clone(), &language, sentences)?;
        augmented.push(SummaryPair::new(document, summary)?);
    }
    if passthrough > 0 {
        eprintln!("warning: {passthrough} sentences had no translation and were passed through");
    }
    save_corpus(&augmented, &out_path)?;
    Ok(())
}

#[derive(Serialize)]
struct WeightsRecord<'a> {
    id: &'a str,
    alpha: &'a [f64],
    beta: [f64; 4],
    l_raw: &'a [f64],
    l: &'a [f64],
}

#[allow(clippy::too_many_arguments)]
fn cmd_labelsets(
    cfg: &FileConfig,
    corpus: Option<PathBuf>,
    out: Option<PathBuf>,
    dict: Option<PathBuf>,
    rev_dict: Option<PathBuf>,
    tm: Option<PathBuf>,
    provider: ProviderKind,
    strict: bool,
    seed: Option<u64>,
    objective: ObjectiveKind,
    source_lang: &str,
    target_lang: &str,
    checkpoint: Option<PathBuf>,
    dump_weights: Option<PathBuf>,
) -> CliResult<()> {
    use rayon::prelude::*;
    let corpus_path = cfg.required_path(corpus, "corpus")?;
    let out_path = cfg.required_path(out, "out")?;
    let dict_path = cfg.required_path(dict, "dict")?;
    let rev_dict_path = cfg.required_path(rev_dict, "rev-dict")?;
    let seed = cfg.or_default(seed, "seed", 42)?;

    let pairs = load_corpus(&corpus_path)?;
    let dict_fwd = load_dictionary(&dict_path, source_lang, target_lang)?;
    let dict_rev = load_dictionary(&rev_dict_path, target_lang, source_lang)?;
    let translator = build_provider(provider, tm.as_ref(), source_lang, target_lang)?;
    let sets_cfg = LabelSetsConfig {
        oracle: OracleConfig {
            objective: objective.into(),
        },
        strict,
        seed,
    };

    let labels: Vec<MultilingualLabels> = pairs
        .par_iter()
        .map(|pair| build_label_sets(pair, translator.as_ref(), &dict_fwd, &dict_rev, &sets_cfg))
        .collect::<Result<_>>()?;
    save_label_sets(&labels, &out_path)?;

    if let (Some(ckpt_path), Some(dump_path)) = (checkpoint, dump_weights) {
        let (params, _) = load_checkpoint(&ckpt_path)?;
        let mut buffer = Vec::new();
        for (pair, record) in pairs.iter().zip(&labels) {
            let tokens: Vec<TokenSeq> = pair
                .document
                .sentences
                .iter()
                .map(|s| tokenize(s))
                .collect();
            let encoded = encode_document(&params, &pair.document.id, &tokens)?;
            let n = encoded.kept_sentences;
            let alpha = predict_alpha(&params, &encoded.sentence_vectors);
            let truncated: [Vec<usize>; 4] = record
                .sets()
                .map(|set| set.iter().copied().filter(|&i| i < n).collect());
            let means = set_means(
                &encoded.sentence_vectors,
                [&truncated[0], &truncated[1], &truncated[2], &truncated[3]],
            );
            let beta = predict_beta(&params, &means);
            let bounded = MultilingualLabels::new(
                record.id.clone(),
                record.target_language.clone(),
                n,
                truncated,
            )?;
            let weighted = compute_weights(&alpha, beta, &bounded)?;
            let dump = WeightsRecord {
                id: &pair.document.id,
                alpha: &weighted.alpha,
                beta: weighted.beta,
                l_raw: &weighted.raw,
                l: &weighted.weights,
            };
            serde_json::to_writer(&mut buffer, &dump).expect("record serializes");
            buffer.push(b'\n');
        }
        write_file(&dump_path, &buffer)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_train(
    cfg: &FileConfig,
    corpus: Option<PathBuf>,
    labels: Option<PathBuf>,
    mode: Option<String>,
    langs: Option<String>,
    steps: Option<usize>,
    batch: Option<usize>,
    accum: Option<usize>,
    lr: Option<f64>,
    warmup: Option<usize>,
    seed: Option<u64>,
    wr_rate: Option<f64>,
    fixed_weight: Option<f64>,
    dicts: Vec<String>,
    out: Option<PathBuf>,
    log: Option<PathBuf>,
) -> CliResult<()> {
    let corpus_path = cfg.required_path(corpus, "corpus")?;
    let labels_path = cfg.required_path(labels, "labels")?;
    let out_path = cfg.required_path(out, "out")?;
    let defaults = TrainConfig::default();

    let mode: TrainMode = cfg
        .required(mode, "mode")
        .and_then(|m: String| m.parse().map_err(CliError::from))?;
    let langs = cfg.or_default(langs, "langs", "fr".to_string())?;
    let languages: Vec<String> = langs
        .split(',')
        .map(|s| s.trim().to_lowercase())
        .filter(|s| !s.is_empty())
        .collect();

    let train_cfg = TrainConfig {
        mode,
        languages,
        steps: cfg.or_default(steps, "steps", defaults.steps)?,
        batch_size: cfg.or_default(batch, "batch", defaults.batch_size)?,
        accumulation: cfg.or_default(accum, "accum", defaults.accumulation)?,
        peak_lr: cfg.or_default(lr, "lr", defaults.peak_lr)?,
        warmup_steps: cfg.or_default(warmup, "warmup", defaults.warmup_steps)?,
        seed: cfg.or_default(seed, "seed", defaults.seed)?,
        wr_rate: cfg.or_default(wr_rate, "wr-rate", defaults.wr_rate)?,
        fixed_weight: cfg.or_default(fixed_weight, "fixed-weight", defaults.fixed_weight)?,
        clip_norm: defaults.clip_norm,
    };

    let mut wr_dicts = HashMap::new();
    for spec in &dicts {
        let Some((lang, path)) = spec.split_once('=') else {
            return Err(CliError::user(format!(
                "--dict expects LANG=PATH, got {spec:?}"
            )));
        };
        let lang = lang.trim().to_lowercase();
        let dictionary = load_dictionary(path.trim(), "en", &lang)?;
        wr_dicts.insert(lang, dictionary);
    }

    let pairs = load_corpus(&corpus_path)?;
    let label_records = load_label_sets(&labels_path)?;
    let model_cfg = ModelConfig::default();
    let outcome = train(&pairs, &label_records, &model_cfg, &train_cfg, &wr_dicts)?;

    save_checkpoint(&outcome.params, outcome.rng_state, &out_path)?;
    if let Some(log_path) = cfg.optional_path(log, "log") {
        let mut csv = String::from("step,lr,loss,term1,term2,term3,term4\n");
        for entry in &outcome.log {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                entry.step,
                entry.lr,
                entry.loss(),
                entry.terms.main,
                entry.terms.soft,
                entry.terms.alpha,
                entry.terms.beta
            ));
        }
        write_file(&log_path, csv.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SelectionRecord<'a> {
    id: &'a str,
    selected: &'a [usize],
}

fn cmd_infer(
    cfg: &FileConfig,
    checkpoint: Option<PathBuf>,
    corpus: Option<PathBuf>,
    k: Option<usize>,
    no_blocking: bool,
    out: Option<PathBuf>,
) -> CliResult<()> {
    use rayon::prelude::*;
    let ckpt_path = cfg.required_path(checkpoint, "checkpoint")?;
    let corpus_path = cfg.required_path(corpus, "corpus")?;
    let out_path = cfg.required_path(out, "out")?;
    let k = cfg.or_default(k, "k", 3)?;

    let (params, _) = load_checkpoint(&ckpt_path)?;
    let pairs = load_corpus(&corpus_path)?;
    let results: Vec<ExtractionResult> = pairs
        .par_iter()
        .map(|pair| extract_summary(&params, &pair.document, k, !no_blocking))
        .collect::<Result<_>>()?;

    let mut buffer = Vec::new();
    for (pair, result) in pairs.iter().zip(&results) {
        let record = SelectionRecord {
            id: &pair.document.id,
            selected: &result.selected_indices,
        };
        serde_json::to_writer(&mut buffer, &record).expect("record serializes");
        buffer.push(b'\n');
    }
    write_file(&out_path, &buffer)
}

fn load_selections(path: &PathBuf) -> CliResult<HashMap<String, Vec<usize>>> {
    #[derive(serde::Deserialize)]
    struct Record {
        id: String,
        selected: Vec<usize>,
    }
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::user(format!("cannot read {}: {e}", path.display())))?;
    let mut selections = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        let record: Record = serde_json::from_str(line).map_err(|e| {
            CliError::user(format!(
                "{}:{}: malformed record: {e}",
                path.display(),
                idx + 1
            ))
        })?;
        selections.insert(record.id, record.selected);
    }
    Ok(selections)
}

#[derive(Serialize)]
struct EvalOutput {
    #[serde(flatten)]
    report: EvalReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    significance: Option<SignificanceResult>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_evaluate(
    cfg: &FileConfig,
    selections: Option<PathBuf>,
    corpus: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    compare: Option<PathBuf>,
    resamples: Option<usize>,
    system: Option<String>,
) -> CliResult<()> {
    let selections_path = cfg.required_path(selections, "selections")?;
    let corpus_path = cfg.required_path(corpus, "corpus")?;
    let out_path = cfg.required_path(out, "out")?;
    let seed = cfg.or_default(seed, "seed", 42)?;
    let resamples = cfg.or_default(resamples, "resamples", 1000)?;
    let system = cfg.or_default(system, "system", "system".to_string())?;

    let pairs = load_corpus(&corpus_path)?;
    let selected = load_selections(&selections_path)?;
    let eval_cfg = EvalConfig {
        system,
        seed,
        n_resamples: resamples,
        level: 0.95,
    };
    let report = evaluate(&selected, &pairs, &eval_cfg)?;

    let significance_result = match compare {
        Some(compare_path) => {
            let baseline = load_selections(&compare_path)?;
            let scores_a: HashMap<String, f64> = pairs
                .iter()
                .map(|pair| {
                    let sel = baseline
                        .get(&pair.document.id)
                        .ok_or_else(|| Error::MissingSelection(pair.document.id.clone()))?;
                    Ok((pair.document.id.clone(), score_selection(pair, sel)?))
                })
                .collect::<Result<_>>()?;
            let scores_b: HashMap<String, f64> = pairs
                .iter()
                .map(|pair| {
                    let sel = selected
                        .get(&pair.document.id)
                        .ok_or_else(|| Error::MissingSelection(pair.document.id.clone()))?;
                    Ok((pair.document.id.clone(), score_selection(pair, sel)?))
                })
                .collect::<Result<_>>()?;
            Some(significance(&scores_a, &scores_b, resamples, 0.95, seed)?)
        }
        None => None,
    };

    let output = EvalOutput {
        report,
        significance: significance_result,
    };
    let json = serde_json::to_string_pretty(&output).expect("report serializes");
    write_file(&out_path, json.as_bytes())
}

fn cmd_analyze_positions(
    cfg: &FileConfig,
    labels: Option<PathBuf>,
    out: Option<PathBuf>,
    set: SetChoice,
    bandwidth: Option<f64>,
    grid: usize,
) -> CliResult<()> {
    let labels_path = cfg.required_path(labels, "labels")?;
    let out_path = cfg.required_path(out, "out")?;
    let records = load_label_sets(&labels_path)?;
    let positions = relative_positions(&records, set.into());
    let (curve, _) = position_density(&positions, bandwidth, grid)?;

    let mut csv = String::from("x,density\n");
    for (x, density) in curve.grid.iter().zip(&curve.density) {
        csv.push_str(&format!("{x},{density}\n"));
    }
    write_file(&out_path, csv.as_bytes())
}
