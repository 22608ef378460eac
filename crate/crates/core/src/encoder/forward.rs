//! Builds the full computation graph for one document.
//!
//! Layout: a boundary marker token is prepended to every sentence, the
//! token-level tower runs over the flat sequence, marker output vectors act
//! as sentence representations, and the document-level tower contextualizes
//! them before the sigmoid classifier. The two weight-predictor towers
//! consume sentence vectors behind a stop-gradient, one over all sentences
//! (with positions) and one over mean-pooled label-set vectors (without).

use rand::Rng;
use rand_chacha::ChaCha12Rng;

use super::mat::Mat;
use super::params::{ModelConfig, ModelParams};
use super::tape::{Tape, Var};
use crate::corpus::TokenSeq;
use crate::error::{Error, Result};
use crate::rng::token_bucket;

/// Sinusoidal position encodings, `n x d`. The wavelength base suits
/// sequence lengths in the hundreds; with the textbook base of 10000 most
/// dimensions would stay nearly constant over such short sequences.
pub(crate) fn sinusoidal_encoding(n: usize, d: usize) -> Mat {
    let base: f64 = 100.0;
    let mut out = Mat::zeros(n, d);
    for pos in 0..n {
        for i in 0..d {
            let exponent = 2.0 * ((i / 2) as f64) / d as f64;
            let angle = pos as f64 / base.powf(exponent);
            *out.at_mut(pos, i) = if i % 2 == 0 { angle.sin() } else { angle.cos() };
        }
    }
    out
}

/// Flat token layout for one document after whole-sentence truncation.
#[derive(Debug, Clone)]
pub(crate) struct DocLayout {
    /// Embedding row per position, markers included.
    pub ids: Vec<usize>,
    /// Flat position of each sentence's boundary marker.
    pub marker_positions: Vec<usize>,
    pub kept_sentences: usize,
}

/// Maps sentences onto embedding ids, truncating whole sentences from the
/// tail when the token budget would be exceeded. Never splits a sentence.
pub(crate) fn layout_document(
    cfg: &ModelConfig,
    doc_id: &str,
    sentences: &[TokenSeq],
) -> Result<DocLayout> {
    let mut ids = Vec::new();
    let mut marker_positions = Vec::new();
    let mut kept = 0;
    for sentence in sentences {
        let needed = 1 + sentence.len();
        if ids.len() + needed > cfg.max_tokens {
            break;
        }
        marker_positions.push(ids.len());
        ids.push(cfg.marker_id());
        for token in &sentence.tokens {
            ids.push(token_bucket(token, cfg.vocab_buckets));
        }
        kept += 1;
    }
    if kept == 0 {
        return Err(Error::TokenBudget(doc_id.to_string()));
    }
    Ok(DocLayout {
        ids,
        marker_positions,
        kept_sentences: kept,
    })
}

/// Where the predictor towers read their sentence vectors from.
pub enum PredictorFeed<'a> {
    /// Stop-gradient copy of the live encoder output.
    FromEncoder,
    /// Externally supplied sentence vectors (used by gradient checks to hold
    /// the predictor inputs fixed while parameters are perturbed).
    Frozen(&'a Mat),
}

/// Label-set membership needed to pool set vectors.
pub struct SetRequest<'a> {
    /// The four positive label sets (indices into kept sentences).
    pub sets: [&'a [usize]; 4],
    /// Zero-label index triples acting as negative pseudo-sets.
    pub negatives: &'a [Vec<usize>],
}

pub struct ForwardOptions<'a> {
    /// Bind parameters as trainable leaves.
    pub trainable: bool,
    /// Build the predictor towers.
    pub predictors: Option<SetRequest<'a>>,
    pub feed: PredictorFeed<'a>,
    /// Dropout stream; `None` disables dropout regardless of the configured
    /// rate (inference and gradient checks).
    pub dropout_rng: Option<&'a mut ChaCha12Rng>,
}

impl Default for ForwardOptions<'_> {
    fn default() -> Self {
        ForwardOptions {
            trainable: false,
            predictors: None,
            feed: PredictorFeed::FromEncoder,
            dropout_rng: None,
        }
    }
}

/// One document's graph plus handles to everything downstream code reads.
pub struct ForwardBundle {
    pub tape: Tape,
    /// Parameter leaves in canonical order, for gradient extraction.
    pub param_vars: Vec<Var>,
    pub kept_sentences: usize,
    pub total_tokens: usize,
    /// Token-level tower output, markers included (`T x d`).
    pub token_states: Var,
    /// Marker vectors per kept sentence (`N x d`).
    pub sentence_states: Var,
    /// Document-level tower output (`N x d`).
    pub contextual_states: Var,
    /// Classifier before/after the sigmoid (`N x 1`).
    pub score_logits: Var,
    pub score_probs: Var,
    pub alpha_probs: Option<Var>,
    /// Probabilities for the four positive set means (`4 x 1`).
    pub beta_probs: Option<Var>,
    /// Probabilities for the negative pseudo-sets (`k x 1`).
    pub beta_neg_probs: Option<Var>,
}

struct Builder<'p> {
    tape: Tape,
    params: &'p ModelParams,
    vars: std::collections::HashMap<String, Var>,
    order: Vec<Var>,
    dropout_masks: Vec<Mat>,
}

impl<'p> Builder<'p> {
    fn new(params: &'p ModelParams, trainable: bool) -> Self {
        let mut tape = Tape::new();
        let mut vars = std::collections::HashMap::new();
        let mut order = Vec::new();
        for (name, mat) in params.set.iter() {
            let var = if trainable {
                tape.param(mat.clone())
            } else {
                tape.constant(mat.clone())
            };
            vars.insert(name.to_string(), var);
            order.push(var);
        }
        Builder {
            tape,
            params,
            vars,
            order,
            dropout_masks: Vec::new(),
        }
    }

    fn p(&self, name: &str) -> Var {
        *self
            .vars
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    fn linear(&mut self, x: Var, w: &str, b: &str) -> Var {
        let wv = self.p(w);
        let bv = self.p(b);
        let xm = self.tape.matmul(x, wv);
        self.tape.add_row(xm, bv)
    }

    /// Pre-generates dropout masks so the graph builder borrows the RNG only
    /// here; identity masks when dropout is off.
    fn prepare_dropout(
        &mut self,
        rng: Option<&mut ChaCha12Rng>,
        count: usize,
        rows: usize,
        cols: usize,
    ) {
        let rate = self.params.config.dropout;
        match rng {
            Some(rng) if rate > 0.0 => {
                let keep = 1.0 - rate;
                for _ in 0..count {
                    let data = (0..rows * cols)
                        .map(|_| {
                            if rng.random::<f64>() < rate {
                                0.0
                            } else {
                                1.0 / keep
                            }
                        })
                        .collect();
                    self.dropout_masks.push(Mat::from_vec(rows, cols, data));
                }
            }
            _ => {}
        }
    }

    fn dropout(&mut self, x: Var) -> Var {
        match self.dropout_masks.pop() {
            Some(mask) => {
                let m = self.tape.constant(mask);
                self.tape.hadamard(x, m)
            }
            None => x,
        }
    }

    /// Pre-norm transformer stack with a closing layer norm.
    fn tower(&mut self, prefix: &str, mut x: Var, layers: usize) -> Var {
        let cfg = &self.params.config;
        let scale = 1.0 / (cfg.head_dim() as f64).sqrt();
        for layer in 0..layers {
            let base = format!("{prefix}.l{layer}");
            let normed = {
                let gain = self.p(&format!("{base}.ln1.gain"));
                let bias = self.p(&format!("{base}.ln1.bias"));
                self.tape.layer_norm(x, gain, bias)
            };
            let mut heads: Option<Var> = None;
            for h in 0..cfg.heads {
                let q = self.linear(
                    normed,
                    &format!("{base}.attn.h{h}.wq"),
                    &format!("{base}.attn.h{h}.bq"),
                );
                let k = self.linear(
                    normed,
                    &format!("{base}.attn.h{h}.wk"),
                    &format!("{base}.attn.h{h}.bk"),
                );
                let v = self.linear(
                    normed,
                    &format!("{base}.attn.h{h}.wv"),
                    &format!("{base}.attn.h{h}.bv"),
                );
                let kt = self.tape.transpose(k);
                let raw = self.tape.matmul(q, kt);
                let scaled = self.tape.scale(raw, scale);
                let attn = self.tape.softmax_rows(scaled);
                let ctx = self.tape.matmul(attn, v);
                heads = Some(match heads {
                    Some(prev) => self.tape.concat_cols(prev, ctx),
                    None => ctx,
                });
            }
            let ctx = heads.expect("at least one attention head");
            let attn_out = self.linear(ctx, &format!("{base}.attn.wo"), &format!("{base}.attn.bo"));
            let attn_out = self.dropout(attn_out);
            x = self.tape.add(x, attn_out);

            let normed2 = {
                let gain = self.p(&format!("{base}.ln2.gain"));
                let bias = self.p(&format!("{base}.ln2.bias"));
                self.tape.layer_norm(x, gain, bias)
            };
            let hidden = self.linear(
                normed2,
                &format!("{base}.ffn.w1"),
                &format!("{base}.ffn.b1"),
            );
            let activated = self.tape.gelu(hidden);
            let ffn_out = self.linear(
                activated,
                &format!("{base}.ffn.w2"),
                &format!("{base}.ffn.b2"),
            );
            let ffn_out = self.dropout(ffn_out);
            x = self.tape.add(x, ffn_out);
        }
        let gain = self.p(&format!("{prefix}.final.gain"));
        let bias = self.p(&format!("{prefix}.final.bias"));
        self.tape.layer_norm(x, gain, bias)
    }
}

/// Runs one predictor tower over externally supplied vectors, mirroring the
/// training-time path exactly (positions added for the sentence-level tower,
/// none for the set-level one).
pub(crate) fn predictor_scores(
    params: &ModelParams,
    feed: &Mat,
    tower_prefix: &str,
    with_positions: bool,
) -> Vec<f64> {
    let cfg = &params.config;
    assert_eq!(feed.cols, cfg.dim, "feed width must match the model width");
    let mut b = Builder::new(params, false);
    let mut x = b.tape.constant(feed.clone());
    if with_positions {
        let pe = b.tape.constant(sinusoidal_encoding(feed.rows, cfg.dim));
        x = b.tape.add(x, pe);
    }
    let tower = b.tower(tower_prefix, x, cfg.predictor_layers);
    let logits = b.linear(
        tower,
        &format!("{tower_prefix}.head.w"),
        &format!("{tower_prefix}.head.b"),
    );
    let probs = b.tape.sigmoid(logits);
    b.tape.value(probs).data.clone()
}

/// Mean-pooling matrix: one row per set, `1/|set|` accumulated at member
/// columns (members may repeat when negatives are sampled with replacement).
/// Empty sets yield zero rows: the zero vector stands in for a missing set
/// mean.
pub(crate) fn pooling_matrix(sets: &[&[usize]], n: usize) -> Mat {
    let mut pool = Mat::zeros(sets.len(), n);
    for (row, set) in sets.iter().enumerate() {
        let members: Vec<usize> = set.iter().copied().filter(|&i| i < n).collect();
        if members.is_empty() {
            continue;
        }
        let weight = 1.0 / members.len() as f64;
        for i in members {
            *pool.at_mut(row, i) += weight;
        }
    }
    pool
}

/// Runs the full forward pass for one tokenized document.
pub fn build_forward(
    params: &ModelParams,
    doc_id: &str,
    sentences: &[TokenSeq],
    mut opts: ForwardOptions,
) -> Result<ForwardBundle> {
    params.config.validate()?;
    let cfg = params.config.clone();
    let layout = layout_document(&cfg, doc_id, sentences)?;
    let n = layout.kept_sentences;
    let total = layout.ids.len();

    let mut b = Builder::new(params, opts.trainable);
    // Two masks per layer (attention output, feed-forward output). The token
    // tower uses T x d masks, the rest N x d; pre-generate the exact counts
    // in consumption order (masks are popped).
    if b.params.config.dropout > 0.0 {
        if let Some(rng) = opts.dropout_rng.take() {
            // Pop order is reversed, so push document-tower masks first.
            b.prepare_dropout(Some(rng), 2 * cfg.doc_layers, n, cfg.dim);
            b.prepare_dropout(Some(rng), 2 * cfg.sentence_layers, total, cfg.dim);
        }
    }

    let embedding = b.p("embedding");
    let embedded = b.tape.embed(embedding, &layout.ids);
    let positions = b.tape.constant(sinusoidal_encoding(total, cfg.dim));
    let token_input = b.tape.add(embedded, positions);
    let token_states = b.tower("t_s", token_input, cfg.sentence_layers);

    let sentence_states = b.tape.gather_rows(token_states, &layout.marker_positions);
    let sent_positions = b.tape.constant(sinusoidal_encoding(n, cfg.dim));
    let doc_input = b.tape.add(sentence_states, sent_positions);
    let contextual_states = b.tower("t_d", doc_input, cfg.doc_layers);

    let score_logits = b.linear(contextual_states, "clf.w", "clf.b");
    let score_probs = b.tape.sigmoid(score_logits);

    let mut alpha_probs = None;
    let mut beta_probs = None;
    let mut beta_neg_probs = None;

    if let Some(request) = opts.predictors {
        let feed = match opts.feed {
            PredictorFeed::FromEncoder => b.tape.detach(sentence_states),
            PredictorFeed::Frozen(mat) => {
                assert_eq!(mat.shape(), (n, cfg.dim), "frozen feed shape mismatch");
                b.tape.constant(mat.clone())
            }
        };

        let alpha_positions = b.tape.constant(sinusoidal_encoding(n, cfg.dim));
        let alpha_input = b.tape.add(feed, alpha_positions);
        let alpha_tower = b.tower("t_alpha", alpha_input, cfg.predictor_layers);
        let alpha_logits = b.linear(alpha_tower, "t_alpha.head.w", "t_alpha.head.b");
        alpha_probs = Some(b.tape.sigmoid(alpha_logits));

        let pool = b.tape.constant(pooling_matrix(&request.sets, n));
        let set_means = b.tape.matmul(pool, feed);
        let beta_tower = b.tower("t_beta", set_means, cfg.predictor_layers);
        let beta_logits = b.linear(beta_tower, "t_beta.head.w", "t_beta.head.b");
        beta_probs = Some(b.tape.sigmoid(beta_logits));

        if !request.negatives.is_empty() {
            let neg_sets: Vec<&[usize]> = request.negatives.iter().map(Vec::as_slice).collect();
            let neg_pool = b.tape.constant(pooling_matrix(&neg_sets, n));
            let neg_means = b.tape.matmul(neg_pool, feed);
            let neg_tower = b.tower("t_beta", neg_means, cfg.predictor_layers);
            let neg_logits = b.linear(neg_tower, "t_beta.head.w", "t_beta.head.b");
            beta_neg_probs = Some(b.tape.sigmoid(neg_logits));
        }
    }

    Ok(ForwardBundle {
        tape: b.tape,
        param_vars: b.order,
        kept_sentences: n,
        total_tokens: total,
        token_states,
        sentence_states,
        contextual_states,
        score_logits,
        score_probs,
        alpha_probs,
        beta_probs,
        beta_neg_probs,
    })
}

impl ForwardBundle {
    /// Column-vector node values as a plain vector.
    pub fn column_values(&self, var: Var) -> Vec<f64> {
        let mat = self.tape.value(var);
        assert_eq!(mat.cols, 1);
        mat.data.clone()
    }

    /// Flat gradient vector in canonical parameter order; zeros for
    /// parameters the loss never touched. Call after `tape.backward`.
    pub fn flat_gradients(&self, params: &ModelParams) -> Vec<f64> {
        let mut flat = Vec::with_capacity(params.set.total_len());
        for (var, (_, mat)) in self.param_vars.iter().zip(params.set.iter()) {
            match self.tape.grad(*var) {
                Some(g) => flat.extend_from_slice(&g.data),
                None => flat.extend(std::iter::repeat_n(0.0, mat.data.len())),
            }
        }
        flat
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;
    use crate::encoder::params::init_params;

    fn toy_sentences() -> Vec<TokenSeq> {
        vec![
            tokenize("the cat sat on the mat"),
            tokenize("dogs bark loudly at night"),
            tokenize("birds fly very high"),
        ]
    }

    #[test]
    fn sinusoidal_encoding_shape_and_range() {
        let pe = sinusoidal_encoding(7, 8);
        assert_eq!(pe.shape(), (7, 8));
        assert!(pe.data.iter().all(|v| v.abs() <= 1.0));
        assert_eq!(pe.at(0, 0), 0.0);
        assert_eq!(pe.at(0, 1), 1.0);
    }

    #[test]
    fn layout_counts_markers() {
        let cfg = ModelConfig::default();
        let layout = layout_document(&cfg, "d", &toy_sentences()).unwrap();
        assert_eq!(layout.kept_sentences, 3);
        assert_eq!(layout.ids.len(), 6 + 5 + 4 + 3);
        assert_eq!(layout.marker_positions, vec![0, 7, 13]);
        assert!(layout
            .marker_positions
            .iter()
            .all(|&p| layout.ids[p] == cfg.marker_id()));
    }

    #[test]
    fn layout_truncates_whole_sentences() {
        let cfg = ModelConfig {
            max_tokens: 14, // fits sentences 0 (7) and 1 (6), not 2 (5)
            ..ModelConfig::default()
        };
        let layout = layout_document(&cfg, "d", &toy_sentences()).unwrap();
        assert_eq!(layout.kept_sentences, 2);
        assert_eq!(layout.ids.len(), 13);
    }

    #[test]
    fn layout_errors_when_nothing_fits() {
        let cfg = ModelConfig {
            max_tokens: 3,
            ..ModelConfig::default()
        };
        let err = layout_document(&cfg, "doc-9", &toy_sentences()).unwrap_err();
        assert!(matches!(err, Error::TokenBudget(id) if id == "doc-9"));
    }

    #[test]
    fn forward_shapes_match_contract() {
        let cfg = ModelConfig::default();
        let params = init_params(&cfg, 3).unwrap();
        let bundle =
            build_forward(&params, "d", &toy_sentences(), ForwardOptions::default()).unwrap();
        assert_eq!(bundle.kept_sentences, 3);
        assert_eq!(bundle.tape.value(bundle.token_states).shape(), (18, 32));
        assert_eq!(bundle.tape.value(bundle.sentence_states).shape(), (3, 32));
        assert_eq!(bundle.tape.value(bundle.contextual_states).shape(), (3, 32));
        assert_eq!(bundle.tape.value(bundle.score_probs).shape(), (3, 1));
        let probs = bundle.column_values(bundle.score_probs);
        assert!(probs.iter().all(|p| (0.0..1.0).contains(p) && *p > 0.0));
    }

    #[test]
    fn forward_is_deterministic() {
        let cfg = ModelConfig::default();
        let params = init_params(&cfg, 3).unwrap();
        let a = build_forward(&params, "d", &toy_sentences(), ForwardOptions::default()).unwrap();
        let b = build_forward(&params, "d", &toy_sentences(), ForwardOptions::default()).unwrap();
        assert_eq!(
            a.tape.value(a.contextual_states),
            b.tape.value(b.contextual_states)
        );
        assert_eq!(
            a.column_values(a.score_probs),
            b.column_values(b.score_probs)
        );
    }

    #[test]
    fn pooling_matrix_handles_empty_and_mean() {
        let sets: [&[usize]; 4] = [&[0, 2], &[], &[1], &[0, 1, 2]];
        let pool = pooling_matrix(&sets, 3);
        assert_eq!(pool.row(0), &[0.5, 0.0, 0.5]);
        assert_eq!(pool.row(1), &[0.0, 0.0, 0.0]);
        assert_eq!(pool.row(2), &[0.0, 1.0, 0.0]);
        assert!((pool.at(3, 0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn predictor_outputs_in_range_and_permutation_invariant() {
        let cfg = ModelConfig::default();
        let params = init_params(&cfg, 3).unwrap();
        let sets_a: [&[usize]; 4] = [&[0, 2], &[1], &[], &[0, 1, 2]];
        let sets_b: [&[usize]; 4] = [&[2, 0], &[1], &[], &[2, 1, 0]];
        let negatives = vec![vec![1, 2, 0]];
        let run = |sets: [&[usize]; 4]| {
            let bundle = build_forward(
                &params,
                "d",
                &toy_sentences(),
                ForwardOptions {
                    trainable: false,
                    predictors: Some(SetRequest {
                        sets,
                        negatives: &negatives,
                    }),
                    feed: PredictorFeed::FromEncoder,
                    dropout_rng: None,
                },
            )
            .unwrap();
            (
                bundle.column_values(bundle.alpha_probs.unwrap()),
                bundle.column_values(bundle.beta_probs.unwrap()),
                bundle.column_values(bundle.beta_neg_probs.unwrap()),
            )
        };
        let (alpha, beta, neg) = run(sets_a);
        assert_eq!(alpha.len(), 3);
        assert_eq!(beta.len(), 4);
        assert_eq!(neg.len(), 1);
        assert!(alpha
            .iter()
            .chain(&beta)
            .chain(&neg)
            .all(|p| (0.0..1.0).contains(p)));

        // Membership order inside a set cannot matter: pooling is a mean.
        let (alpha2, beta2, neg2) = run(sets_b);
        assert_eq!(alpha, alpha2);
        assert_eq!(beta, beta2);
        assert_eq!(neg, neg2);
    }
}
