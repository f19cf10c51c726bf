//! Small trainable text encoder: mean-pooled token embeddings through a
//! two-layer tanh projection, with optional dropout on the hidden layer.
//!
//! The forward pass is `affine2(dropout(tanh(affine1(mean(token embs)))))`.
//! Dropout is only applied when an explicit seed is supplied, which makes
//! plain encoding a pure function of `(params, tokens)` while training can
//! still inject per-text stochasticity deterministically.

mod checkpoint;

pub use checkpoint::{load_checkpoint, load_vocabulary, save_checkpoint, save_vocabulary};

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::linalg::Matrix;
use crate::rng::stream;
use crate::{Error, Result};

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Token table with reserved `<pad>`/`<unk>` entries at indices 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from a token list that must start with the two
    /// special entries.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 || tokens[PAD] != PAD_TOKEN || tokens[UNK] != UNK_TOKEN {
            return Err(Error::InvalidArgument(format!(
                "vocabulary must start with {PAD_TOKEN:?}, {UNK_TOKEN:?}"
            )));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate vocabulary token {t:?}"
                )));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn token(&self, idx: usize) -> &str {
        &self.tokens[idx]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn lookup(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(UNK)
    }
}

/// Lowercased, whitespace/punctuation-delimited word stream of a text.
/// Every maximal run of alphanumeric characters is one token.
pub fn word_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Builds the vocabulary over titles, abstracts and summaries: every token
/// occurring at least `min_count` times, ordered by descending count then
/// lexicographically, after the two special entries.
pub fn build_vocab(corpus: &Corpus, min_count: usize) -> Result<Vocabulary> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts: HashMap<String, usize> = HashMap::new();
    for (idx, doc) in corpus.documents().iter().enumerate() {
        for t in word_tokens(&doc.title).chain(word_tokens(&doc.abstract_text)) {
            *counts.entry(t).or_insert(0) += 1;
        }
        for s in corpus.summaries_of(idx) {
            for t in word_tokens(&s.text) {
                *counts.entry(t).or_insert(0) += 1;
            }
        }
    }
    let mut entries: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count)
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let mut tokens = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
    tokens.extend(entries.into_iter().map(|(t, _)| t));
    Vocabulary::from_tokens(tokens)
}

/// Maps text to token indices; unknown words map to [`UNK`], empty text to
/// an empty sequence.
pub fn tokenize(vocab: &Vocabulary, text: &str) -> Vec<usize> {
    word_tokens(text).map(|t| vocab.lookup(&t)).collect()
}

/// All trainable weights of the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    /// vocab_size x E token embedding matrix.
    pub token_emb: Matrix,
    /// H x E first projection.
    pub w1: Matrix,
    pub b1: Vec<f64>,
    /// D x H second projection.
    pub w2: Matrix,
    pub b2: Vec<f64>,
    /// Dropout rate on the hidden layer, in [0, 1).
    pub dropout: f64,
}

impl EncoderParams {
    pub fn vocab_size(&self) -> usize {
        self.token_emb.rows()
    }

    pub fn token_dim(&self) -> usize {
        self.token_emb.cols()
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.rows()
    }

    pub fn embed_dim(&self) -> usize {
        self.w2.rows()
    }

    pub fn param_count(&self) -> usize {
        self.token_emb.rows() * self.token_emb.cols()
            + self.w1.rows() * self.w1.cols()
            + self.b1.len()
            + self.w2.rows() * self.w2.cols()
            + self.b2.len()
    }

    pub fn is_finite(&self) -> bool {
        self.token_emb.is_finite()
            && self.w1.is_finite()
            && self.b1.iter().all(|v| v.is_finite())
            && self.w2.is_finite()
            && self.b2.iter().all(|v| v.is_finite())
            && self.dropout.is_finite()
    }

    /// Parameter storage in checkpoint order: token embeddings, affine1
    /// weight, affine1 bias, affine2 weight, affine2 bias.
    pub fn segments(&self) -> [&[f64]; 5] {
        [
            self.token_emb.as_slice(),
            self.w1.as_slice(),
            &self.b1,
            self.w2.as_slice(),
            &self.b2,
        ]
    }

    pub fn segments_mut(&mut self) -> [&mut [f64]; 5] {
        [
            self.token_emb.as_mut_slice(),
            self.w1.as_mut_slice(),
            &mut self.b1,
            self.w2.as_mut_slice(),
            &mut self.b2,
        ]
    }
}

/// Initializes parameters with weights uniform in
/// `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` and zero biases, deterministic in the
/// seed. The token embedding rows use `fan_in = E`.
pub fn init_params(
    vocab_size: usize,
    token_dim: usize,
    hidden_dim: usize,
    embed_dim: usize,
    dropout: f64,
    seed: u64,
) -> Result<EncoderParams> {
    if vocab_size == 0 || token_dim == 0 || hidden_dim == 0 || embed_dim == 0 {
        return Err(Error::InvalidArgument(
            "encoder dimensions must all be >= 1".into(),
        ));
    }
    if !(0.0..1.0).contains(&dropout) {
        return Err(Error::InvalidArgument(format!(
            "dropout must be in [0,1), got {dropout}"
        )));
    }
    let mut rng = stream(seed, "init");
    let mut fill = |m: &mut Matrix, fan_in: usize| {
        let scale = 1.0 / (fan_in as f64).sqrt();
        for v in m.as_mut_slice() {
            *v = rng.gen_range(-scale..=scale);
        }
    };
    let mut token_emb = Matrix::zeros(vocab_size, token_dim);
    fill(&mut token_emb, token_dim);
    let mut w1 = Matrix::zeros(hidden_dim, token_dim);
    fill(&mut w1, token_dim);
    let mut w2 = Matrix::zeros(embed_dim, hidden_dim);
    fill(&mut w2, hidden_dim);
    Ok(EncoderParams {
        token_emb,
        w1,
        b1: vec![0.0; hidden_dim],
        w2,
        b2: vec![0.0; embed_dim],
        dropout,
    })
}

/// Intermediate activations of one forward pass, kept for backprop.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub tokens: Vec<usize>,
    pub pooled: Vec<f64>,
    /// tanh output before dropout.
    pub hidden: Vec<f64>,
    /// Per-unit multiplier applied after tanh: `1/(1-p)` for kept units, 0
    /// for dropped ones; `None` when dropout is disabled.
    pub mask: Option<Vec<f64>>,
    /// Hidden layer after dropout, input to affine2.
    pub hidden_dropped: Vec<f64>,
    pub output: Vec<f64>,
}

/// Forward pass retaining intermediates. `dropout_seed` enables the dropout
/// mask; without it the pass is deterministic.
pub fn forward(
    params: &EncoderParams,
    tokens: &[usize],
    dropout_seed: Option<u64>,
) -> Result<ForwardCache> {
    if tokens.is_empty() {
        return Err(Error::EmptyTokens);
    }
    let vocab_size = params.vocab_size();
    let token_dim = params.token_dim();
    let mut pooled = vec![0.0; token_dim];
    for &t in tokens {
        if t >= vocab_size {
            return Err(Error::TokenOutOfRange {
                index: t,
                size: vocab_size,
            });
        }
        let row = params.token_emb.row(t);
        for (p, r) in pooled.iter_mut().zip(row) {
            *p += r;
        }
    }
    let inv_n = 1.0 / tokens.len() as f64;
    for p in pooled.iter_mut() {
        *p *= inv_n;
    }

    let mut hidden = params.w1.matvec(&pooled);
    for (h, b) in hidden.iter_mut().zip(&params.b1) {
        *h = (*h + b).tanh();
    }

    let (mask, hidden_dropped) = match dropout_seed {
        Some(seed) if params.dropout > 0.0 => {
            let p = params.dropout;
            let keep_scale = 1.0 / (1.0 - p);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mask: Vec<f64> = hidden
                .iter()
                .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep_scale })
                .collect();
            let dropped: Vec<f64> = hidden.iter().zip(&mask).map(|(h, m)| h * m).collect();
            (Some(mask), dropped)
        }
        _ => (None, hidden.clone()),
    };

    let mut output = params.w2.matvec(&hidden_dropped);
    for (o, b) in output.iter_mut().zip(&params.b2) {
        *o += b;
    }
    if output.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("encoder output".into()));
    }
    Ok(ForwardCache {
        tokens: tokens.to_vec(),
        pooled,
        hidden,
        mask,
        hidden_dropped,
        output,
    })
}

/// Embedding of a token sequence; see [`forward`] for dropout semantics.
pub fn encode(
    params: &EncoderParams,
    tokens: &[usize],
    dropout_seed: Option<u64>,
) -> Result<Vec<f64>> {
    forward(params, tokens, dropout_seed).map(|c| c.output)
}

/// Tokenize-and-encode convenience for evaluation paths (dropout disabled).
pub fn embed_text(vocab: &Vocabulary, params: &EncoderParams, text: &str) -> Result<Vec<f64>> {
    encode(params, &tokenize(vocab, text), None)
}

/// Gradient accumulator with the same shapes as [`EncoderParams`].
#[derive(Debug, Clone)]
pub struct EncoderGrads {
    pub token_emb: Matrix,
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

impl EncoderGrads {
    pub fn zeros_like(params: &EncoderParams) -> Self {
        EncoderGrads {
            token_emb: Matrix::zeros(params.token_emb.rows(), params.token_emb.cols()),
            w1: Matrix::zeros(params.w1.rows(), params.w1.cols()),
            b1: vec![0.0; params.b1.len()],
            w2: Matrix::zeros(params.w2.rows(), params.w2.cols()),
            b2: vec![0.0; params.b2.len()],
        }
    }

    pub fn segments(&self) -> [&[f64]; 5] {
        [
            self.token_emb.as_slice(),
            self.w1.as_slice(),
            &self.b1,
            self.w2.as_slice(),
            &self.b2,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.segments()
            .iter()
            .all(|s| s.iter().all(|v| v.is_finite()))
    }
}

/// Accumulates parameter gradients for one text given `grad_output`, the
/// loss gradient with respect to this text's embedding.
pub fn backward(
    params: &EncoderParams,
    cache: &ForwardCache,
    grad_output: &[f64],
    grads: &mut EncoderGrads,
) {
    debug_assert_eq!(grad_output.len(), params.embed_dim());

    grads.w2.add_outer(grad_output, &cache.hidden_dropped);
    for (g, &go) in grads.b2.iter_mut().zip(grad_output) {
        *g += go;
    }

    let mut grad_hidden = params.w2.matvec_t(grad_output);
    if let Some(mask) = &cache.mask {
        for (g, m) in grad_hidden.iter_mut().zip(mask) {
            *g *= m;
        }
    }
    for (g, h) in grad_hidden.iter_mut().zip(&cache.hidden) {
        *g *= 1.0 - h * h;
    }

    grads.w1.add_outer(&grad_hidden, &cache.pooled);
    for (g, gh) in grads.b1.iter_mut().zip(&grad_hidden) {
        *g += gh;
    }

    let grad_pooled = params.w1.matvec_t(&grad_hidden);
    let inv_n = 1.0 / cache.tokens.len() as f64;
    for &t in &cache.tokens {
        let row = grads.token_emb.row_mut(t);
        for (r, gp) in row.iter_mut().zip(&grad_pooled) {
            *r += gp * inv_n;
        }
    }
}
