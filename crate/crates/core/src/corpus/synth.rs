//! Deterministic synthetic corpus generator.
//!
//! Produces pseudo-scientific documents with ground-truth topic structure:
//! every topic owns a vocabulary of invented content words, every document
//! draws a small "theme" subset of its topic vocabulary that recurs across
//! its title, abstract, summaries and query, and all texts are padded with a
//! shared content vocabulary plus fixed English function words. Documents
//! also get an individual bias toward the head of the shared vocabulary,
//! which gives raw bag-of-words geometry a dominant nuisance direction that
//! a trained encoder has to learn to ignore.
//!
//! Output is a pure function of the arguments: the same call yields a
//! byte-identical corpus.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Corpus, Document, SummaryRecord};
use crate::rng::stream;
use crate::{Error, Result};

const FUNCTION_WORDS: [&str; 20] = [
    "the", "of", "a", "in", "we", "is", "to", "for", "and", "on", "with", "that", "this", "by",
    "an", "from", "as", "are", "our", "it",
];

const OPENERS: [&[&str]; 8] = [
    &["we", "present"],
    &["we", "propose"],
    &["this", "work", "studies"],
    &["our", "approach", "uses"],
    &["the", "method", "applies"],
    &["we", "analyze"],
    &["results", "show", "that"],
    &["the", "model", "learns"],
];

const CONNECTORS: [&str; 8] = ["of", "for", "with", "in", "on", "and", "over", "from"];

const CONSONANTS: [char; 14] = [
    'b', 'd', 'f', 'g', 'k', 'l', 'm', 'n', 'p', 'r', 's', 't', 'v', 'z',
];
const VOWELS: [char; 5] = ['a', 'e', 'i', 'o', 'u'];

/// Words per document theme; the theme is what ties a document's texts
/// together and what overlapping themes tie a topic together.
const THEME_SIZE: usize = 12;

/// Theme words guaranteed to appear in the abstract and to seed summaries.
const CORE_THEME: usize = 4;

/// Fixed abstract length in sentences. A constant keeps document-level
/// composition variance concentrated on the style axis instead of length.
const ABSTRACT_SENTENCES: usize = 5;

/// Shared-vocabulary draws redirect to this many head words under a text's
/// style bias.
const SHARED_HEAD: usize = 1;

/// Per-text-kind sampling profile. Summaries are theme-rich and
/// compositionally stable; abstracts are theme-poor with a strongly bimodal
/// shared-head bias, which makes raw document statistics noisy and
/// anisotropic while the semantic signal stays recoverable.
#[derive(Clone, Copy)]
struct TextStyle {
    p_theme: f64,
    p_topic: f64,
    head_bias: f64,
}

const SUMMARY_STYLE: TextStyle = TextStyle {
    p_theme: 0.38,
    p_topic: 0.12,
    head_bias: 0.25,
};

fn abstract_style(rng: &mut ChaCha8Rng) -> TextStyle {
    TextStyle {
        p_theme: 0.18,
        p_topic: 0.12,
        head_bias: if rng.gen::<f64>() < 0.5 { 0.25 } else { 0.75 },
    }
}

struct WordBank {
    topics: Vec<Vec<String>>,
    shared: Vec<String>,
}

fn pseudo_word(rng: &mut ChaCha8Rng, used: &mut HashSet<String>) -> String {
    loop {
        let syllables = rng.gen_range(2..=4);
        let mut word = String::new();
        for _ in 0..syllables {
            word.push(CONSONANTS[rng.gen_range(0..CONSONANTS.len())]);
            word.push(VOWELS[rng.gen_range(0..VOWELS.len())]);
        }
        if FUNCTION_WORDS.contains(&word.as_str()) {
            continue;
        }
        if used.insert(word.clone()) {
            return word;
        }
    }
}

fn build_word_bank(rng: &mut ChaCha8Rng, n_topics: usize, vocab_per_topic: usize, shared_vocab: usize) -> WordBank {
    let mut used = HashSet::new();
    let shared = (0..shared_vocab).map(|_| pseudo_word(rng, &mut used)).collect();
    let topics = (0..n_topics)
        .map(|_| (0..vocab_per_topic).map(|_| pseudo_word(rng, &mut used)).collect())
        .collect();
    WordBank { topics, shared }
}

struct DocProfile<'a> {
    theme: Vec<&'a str>,
    topic_vocab: &'a [String],
    shared: &'a [String],
}

impl<'a> DocProfile<'a> {
    fn content_word(&self, rng: &mut ChaCha8Rng, style: TextStyle) -> &'a str {
        let u: f64 = rng.gen();
        if u < style.p_theme {
            self.theme[rng.gen_range(0..self.theme.len())]
        } else if u < style.p_theme + style.p_topic {
            &self.topic_vocab[rng.gen_range(0..self.topic_vocab.len())]
        } else {
            self.shared_word(rng, style)
        }
    }

    fn shared_word(&self, rng: &mut ChaCha8Rng, style: TextStyle) -> &'a str {
        let head = SHARED_HEAD.min(self.shared.len());
        if rng.gen::<f64>() < style.head_bias {
            &self.shared[rng.gen_range(0..head)]
        } else {
            &self.shared[rng.gen_range(0..self.shared.len())]
        }
    }
}

/// Sentence from an opener plus `n_content` content slots, connectors mixed
/// in, terminated with a period. `forced` words fill the first slots.
fn sentence(
    rng: &mut ChaCha8Rng,
    profile: &DocProfile,
    style: TextStyle,
    n_content: usize,
    forced: &[&str],
) -> String {
    let mut tokens: Vec<String> = OPENERS[rng.gen_range(0..OPENERS.len())]
        .iter()
        .map(|w| w.to_string())
        .collect();
    for slot in 0..n_content.max(forced.len()) {
        let word = if slot < forced.len() {
            forced[slot]
        } else {
            profile.content_word(rng, style)
        };
        tokens.push(word.to_string());
        if rng.gen::<f64>() < 0.55 {
            tokens.push(CONNECTORS[rng.gen_range(0..CONNECTORS.len())].to_string());
        }
    }
    if tokens.last().map(String::as_str) == Some("and") {
        tokens.pop();
    }
    let mut s = tokens.join(" ");
    s.push('.');
    s
}

/// Generates a labeled synthetic corpus with `n_docs` documents spread
/// round-robin over `n_topics` topics, three summaries and one query per
/// document. Identical arguments produce byte-identical corpora.
pub fn generate_synthetic_corpus(
    n_docs: usize,
    n_topics: usize,
    vocab_per_topic: usize,
    shared_vocab: usize,
    seed: u64,
) -> Result<Corpus> {
    if n_topics < 2 {
        return Err(Error::InvalidArgument(format!(
            "n_topics must be >= 2, got {n_topics}"
        )));
    }
    if n_docs < n_topics {
        return Err(Error::InvalidArgument(format!(
            "n_docs ({n_docs}) must be >= n_topics ({n_topics})"
        )));
    }
    if vocab_per_topic == 0 || shared_vocab == 0 {
        return Err(Error::InvalidArgument(
            "vocab_per_topic and shared_vocab must be >= 1".into(),
        ));
    }

    let mut rng = stream(seed, "synth");
    let bank = build_word_bank(&mut rng, n_topics, vocab_per_topic, shared_vocab);

    let mut corpus = Corpus::new();
    for i in 0..n_docs {
        let topic = i % n_topics;
        let topic_vocab = &bank.topics[topic];

        let mut theme_pool: Vec<&str> = topic_vocab.iter().map(String::as_str).collect();
        theme_pool.shuffle(&mut rng);
        theme_pool.truncate(THEME_SIZE.min(topic_vocab.len()));
        let profile = DocProfile {
            theme: theme_pool,
            topic_vocab,
            shared: &bank.shared,
        };

        // Title: theme-led with a light function scaffold, no terminator.
        let title = format!(
            "on {} and {} for {} with {}",
            profile.theme[0],
            profile.theme[1],
            profile.theme[2],
            profile.shared_word(&mut rng, SUMMARY_STYLE),
        );

        // Abstract: one style for the whole text; the first sentence carries
        // the core theme words, so every summary is guaranteed to share
        // topic tokens with it.
        let style = abstract_style(&mut rng);
        let core: Vec<&str> = profile.theme.iter().copied().take(CORE_THEME).collect();
        let mut sents = vec![sentence(&mut rng, &profile, style, core.len() + 2, &core)];
        for _ in 1..ABSTRACT_SENTENCES {
            let n_content = rng.gen_range(7..=9);
            sents.push(sentence(&mut rng, &profile, style, n_content, &[]));
        }
        let abstract_text = sents.join(" ");

        // Query: terse keyword-style phrase over the theme.
        let q_theme: Vec<&str> = profile.theme.iter().copied().take(3).collect();
        let query = format!(
            "{} {} {} {}",
            q_theme[0],
            q_theme[1 % q_theme.len()],
            CONNECTORS[rng.gen_range(0..CONNECTORS.len())],
            q_theme[2 % q_theme.len()],
        );

        let id = format!("doc-{i:04}");
        corpus.push_document(
            Document {
                id: id.clone(),
                title,
                abstract_text,
                category: Some(format!("topic-{topic}")),
                query: Some(query),
            },
            0,
        )?;

        // Three summaries, each carrying the full core theme.
        for prompt_id in 0..3u8 {
            let p = prompt_id as usize;
            let mut forced: Vec<&str> = core.clone();
            forced.rotate_left(p % core.len());
            let n_content = rng.gen_range(12..=15);
            let text = sentence(&mut rng, &profile, SUMMARY_STYLE, n_content, &forced);
            corpus.push_summary(
                SummaryRecord {
                    doc_id: id.clone(),
                    prompt_id,
                    text,
                },
                0,
            )?;
        }
    }

    Ok(corpus)
}
