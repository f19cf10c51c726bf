//! Ranking-based matching tasks, k-NN clustering purity and the normalized
//! cross-source benchmark score.
//!
//! All ranking uses the average-rank metric: for every query, candidates are
//! ordered by distance and the rank of the correct match is recorded (1 is
//! optimal). Equidistant candidates are ordered by lexicographic key so that
//! results do not depend on insertion order or memory layout.

mod exchange;

pub use exchange::{load_embedding_set, save_embedding_set};

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{split_abstract_halves, Corpus, Document};
use crate::encoder::{embed_text, EncoderParams, Vocabulary};
use crate::linalg::{cosine_similarity, euclidean_distance, norm};
use crate::{Error, Result};

/// Distance used to rank candidate embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    Euclidean,
    Cosine,
}

impl Distance {
    /// Cosine distance is `1 - cosine similarity`; zero-norm vectors are the
    /// caller's error to surface with key context.
    fn between(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Distance::Euclidean => euclidean_distance(a, b),
            Distance::Cosine => 1.0 - cosine_similarity(a, b),
        }
    }
}

/// Named, ordered collection of keyed embedding vectors of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    source: String,
    dim: usize,
    items: Vec<(String, Vec<f64>)>,
    index: HashMap<String, usize>,
}

impl EmbeddingSet {
    pub fn new(source: impl Into<String>, dim: usize) -> Self {
        EmbeddingSet {
            source: source.into(),
            dim,
            items: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, key: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let key = key.into();
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("embedding for key {key:?}")));
        }
        if self.index.contains_key(&key) {
            return Err(Error::DuplicateKey { key });
        }
        self.index.insert(key.clone(), self.items.len());
        self.items.push((key, vector));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&[f64]> {
        self.index.get(key).map(|&i| self.items[i].1.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.items.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    fn check_no_zero_norm(&self) -> Result<()> {
        for (key, v) in self.iter() {
            if norm(v) == 0.0 {
                return Err(Error::ZeroNormEmbedding { key: key.into() });
            }
        }
        Ok(())
    }
}

/// Mean rank at which each query's match is retrieved from the candidate
/// pool. Rank = 1 + strictly closer candidates + equidistant candidates whose
/// key sorts lexicographically before the match key.
pub fn average_rank(
    queries: &EmbeddingSet,
    candidates: &EmbeddingSet,
    matches: &HashMap<String, String>,
    distance: Distance,
) -> Result<f64> {
    if queries.is_empty() || candidates.is_empty() {
        return Err(Error::Evaluation("empty ranking pool".into()));
    }
    if queries.dim() != candidates.dim() {
        return Err(Error::DimensionMismatch {
            expected: queries.dim(),
            got: candidates.dim(),
        });
    }
    if distance == Distance::Cosine {
        queries.check_no_zero_norm()?;
        candidates.check_no_zero_norm()?;
    }

    let mut total_rank = 0.0;
    for (query_key, query_vec) in queries.iter() {
        let match_key = matches
            .get(query_key)
            .ok_or_else(|| Error::MissingMatchKey {
                key: query_key.into(),
            })?;
        let match_vec = candidates
            .get(match_key)
            .ok_or_else(|| Error::MissingMatchKey {
                key: match_key.clone(),
            })?;
        let match_dist = distance.between(query_vec, match_vec);

        let mut rank = 1usize;
        for (cand_key, cand_vec) in candidates.iter() {
            if cand_key == match_key {
                continue;
            }
            let d = distance.between(query_vec, cand_vec);
            if d < match_dist || (d == match_dist && cand_key < match_key.as_str()) {
                rank += 1;
            }
        }
        total_rank += rank as f64;
    }
    Ok(total_rank / queries.len() as f64)
}

/// Identity key map over a query set, for tasks where the match shares the key.
pub fn identity_matches(queries: &EmbeddingSet) -> HashMap<String, String> {
    queries
        .iter()
        .map(|(k, _)| (k.to_string(), k.to_string()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    TitleAbstract,
    AbstractSegments,
    Query,
    Clustering,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::TitleAbstract,
        TaskKind::AbstractSegments,
        TaskKind::Query,
        TaskKind::Clustering,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::TitleAbstract => "title_abstract",
            TaskKind::AbstractSegments => "abstract_segments",
            TaskKind::Query => "query",
            TaskKind::Clustering => "clustering",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LowerBetter,
    HigherBetter,
}

/// One task's raw outcome for one embedding source.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskResult {
    pub task: TaskKind,
    pub raw_score: f64,
    pub direction: Direction,
    /// Number of items that entered the task.
    pub n: usize,
    /// Items skipped by the task's applicability rule.
    pub excluded: usize,
}

/// Document text used for whole-paper embeddings: title, period, abstract.
pub fn doc_text(doc: &Document) -> String {
    format!("{}. {}", doc.title, doc.abstract_text)
}

fn embed_keyed<'a>(
    vocab: &Vocabulary,
    params: &EncoderParams,
    source: &str,
    items: impl Iterator<Item = (&'a str, String)>,
) -> Result<EmbeddingSet> {
    let mut set = EmbeddingSet::new(source, params.embed_dim());
    for (key, text) in items {
        set.push(key, embed_text(vocab, params, &text)?)?;
    }
    Ok(set)
}

/// Title-to-abstract matching: titles query, abstracts are candidates.
pub fn task_title_abstract(
    vocab: &Vocabulary,
    params: &EncoderParams,
    docs: &[Document],
    distance: Distance,
) -> Result<TaskResult> {
    if docs.is_empty() {
        return Err(Error::Evaluation("title_abstract: no documents".into()));
    }
    let queries = embed_keyed(
        vocab,
        params,
        "titles",
        docs.iter().map(|d| (d.id.as_str(), d.title.clone())),
    )?;
    let candidates = embed_keyed(
        vocab,
        params,
        "abstracts",
        docs.iter().map(|d| (d.id.as_str(), d.abstract_text.clone())),
    )?;
    let raw = average_rank(&queries, &candidates, &identity_matches(&queries), distance)?;
    Ok(TaskResult {
        task: TaskKind::TitleAbstract,
        raw_score: raw,
        direction: Direction::LowerBetter,
        n: docs.len(),
        excluded: 0,
    })
}

/// First-half-to-second-half abstract matching. Documents whose abstract has
/// fewer than two sentences are excluded and counted.
pub fn task_abstract_segments(
    vocab: &Vocabulary,
    params: &EncoderParams,
    docs: &[Document],
    distance: Distance,
) -> Result<TaskResult> {
    let mut queries_src = Vec::new();
    let mut cands_src = Vec::new();
    let mut excluded = 0usize;
    for doc in docs {
        match split_abstract_halves(&doc.abstract_text) {
            Ok((first, second)) => {
                queries_src.push((doc.id.as_str(), first));
                cands_src.push((doc.id.as_str(), second));
            }
            Err(Error::CannotHalve) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    if queries_src.is_empty() {
        return Err(Error::Evaluation(
            "abstract_segments: every document was excluded".into(),
        ));
    }
    let n = queries_src.len();
    let queries = embed_keyed(vocab, params, "half1", queries_src.into_iter())?;
    let candidates = embed_keyed(vocab, params, "half2", cands_src.into_iter())?;
    let raw = average_rank(&queries, &candidates, &identity_matches(&queries), distance)?;
    Ok(TaskResult {
        task: TaskKind::AbstractSegments,
        raw_score: raw,
        direction: Direction::LowerBetter,
        n,
        excluded,
    })
}

/// Query-to-paper matching over documents that carry a search query.
pub fn task_query(
    vocab: &Vocabulary,
    params: &EncoderParams,
    docs: &[Document],
    distance: Distance,
) -> Result<TaskResult> {
    let with_query: Vec<&Document> = docs.iter().filter(|d| d.query.is_some()).collect();
    if with_query.is_empty() {
        return Err(Error::Evaluation("query: no documents carry a query".into()));
    }
    let excluded = docs.len() - with_query.len();
    let queries = embed_keyed(
        vocab,
        params,
        "queries",
        with_query
            .iter()
            .map(|d| (d.id.as_str(), d.query.clone().unwrap())),
    )?;
    let candidates = embed_keyed(
        vocab,
        params,
        "papers",
        with_query.iter().map(|d| (d.id.as_str(), doc_text(d))),
    )?;
    let raw = average_rank(&queries, &candidates, &identity_matches(&queries), distance)?;
    Ok(TaskResult {
        task: TaskKind::Query,
        raw_score: raw,
        direction: Direction::LowerBetter,
        n: with_query.len(),
        excluded,
    })
}

/// Mean fraction of each test document's k nearest training neighbors that
/// share its category. Ties break on lexicographic key like [`average_rank`].
pub fn task_clustering(
    vocab: &Vocabulary,
    params: &EncoderParams,
    train_docs: &[Document],
    test_docs: &[Document],
    k: usize,
    distance: Distance,
) -> Result<TaskResult> {
    let train_set = embed_keyed(
        vocab,
        params,
        "cluster-train",
        train_docs.iter().map(|d| (d.id.as_str(), doc_text(d))),
    )?;
    let test_set = embed_keyed(
        vocab,
        params,
        "cluster-test",
        test_docs.iter().map(|d| (d.id.as_str(), doc_text(d))),
    )?;
    let train_labels = label_map(train_docs)?;
    let test_labels = label_map(test_docs)?;
    let raw = knn_purity(&train_set, &train_labels, &test_set, &test_labels, k, distance)?;
    Ok(TaskResult {
        task: TaskKind::Clustering,
        raw_score: raw,
        direction: Direction::HigherBetter,
        n: test_docs.len(),
        excluded: 0,
    })
}

fn label_map(docs: &[Document]) -> Result<HashMap<String, String>> {
    docs.iter()
        .map(|d| {
            d.category
                .clone()
                .map(|c| (d.id.clone(), c))
                .ok_or_else(|| Error::Evaluation(format!("document {:?} is unlabeled", d.id)))
        })
        .collect()
}

/// k-NN purity over prebuilt embedding sets; the core of [`task_clustering`],
/// also usable with externally supplied embeddings.
pub fn knn_purity(
    train: &EmbeddingSet,
    train_labels: &HashMap<String, String>,
    test: &EmbeddingSet,
    test_labels: &HashMap<String, String>,
    k: usize,
    distance: Distance,
) -> Result<f64> {
    if k == 0 || train.len() < k {
        return Err(Error::Evaluation(format!(
            "clustering needs a training pool of at least k={k}, got {}",
            train.len()
        )));
    }
    if test.is_empty() {
        return Err(Error::Evaluation("clustering: empty test pool".into()));
    }
    if distance == Distance::Cosine {
        train.check_no_zero_norm()?;
        test.check_no_zero_norm()?;
    }

    let mut purity_sum = 0.0;
    for (test_key, test_vec) in test.iter() {
        let label = test_labels
            .get(test_key)
            .ok_or_else(|| Error::Evaluation(format!("document {test_key:?} is unlabeled")))?;
        let mut scored: Vec<(f64, &str)> = train
            .iter()
            .map(|(k2, v)| (distance.between(test_vec, v), k2))
            .collect();
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(b.1)));
        let matching = scored
            .iter()
            .take(k)
            .filter(|(_, key)| {
                train_labels.get(*key).map(String::as_str) == Some(label.as_str())
            })
            .count();
        purity_sum += matching as f64 / k as f64;
    }
    Ok(purity_sum / test.len() as f64)
}

/// Ranks of the matching document text retrieved by the first summary, for
/// the full title+abstract text, the title alone and the abstract alone.
pub fn generalization_probe(
    vocab: &Vocabulary,
    params: &EncoderParams,
    corpus: &Corpus,
    doc_indices: &[usize],
    distance: Distance,
) -> Result<(f64, f64, f64)> {
    let mut summary_src = Vec::new();
    for &idx in doc_indices {
        let summaries = corpus.summaries_of(idx);
        let first = summaries.first().ok_or_else(|| {
            Error::Evaluation(format!(
                "document {:?} has no summary for the probe",
                corpus.document(idx).id
            ))
        })?;
        summary_src.push((corpus.document(idx).id.as_str(), first.text.clone()));
    }
    let queries = embed_keyed(vocab, params, "summaries", summary_src.into_iter())?;
    let matches = identity_matches(&queries);

    let mut ranks = [0.0; 3];
    for (slot, text_of) in [
        |d: &Document| doc_text(d),
        |d: &Document| d.title.clone(),
        |d: &Document| d.abstract_text.clone(),
    ]
    .iter()
    .enumerate()
    {
        let candidates = embed_keyed(
            vocab,
            params,
            "probe-candidates",
            doc_indices
                .iter()
                .map(|&idx| corpus.document(idx))
                .map(|d| (d.id.as_str(), text_of(d))),
        )?;
        ranks[slot] = average_rank(&queries, &candidates, &matches, distance)?;
    }
    Ok((ranks[0], ranks[1], ranks[2]))
}

/// Normalized per-source scores for one task: the best source maps to 1, the
/// median to 0.5, linear in between, clamped at 0.
///
/// Returns scores in input order plus a degenerate flag that is set when all
/// raw values are equal (everyone then scores 1.0).
pub fn normalize_scores(
    values: &[(String, f64)],
    direction: Direction,
) -> Result<(Vec<(String, f64)>, bool)> {
    if values.len() < 2 {
        return Err(Error::Evaluation(
            "normalization needs at least 2 sources".into(),
        ));
    }
    // Work on an "improving direction" axis so higher is always better.
    let signed: Vec<f64> = values
        .iter()
        .map(|(_, raw)| match direction {
            Direction::HigherBetter => *raw,
            Direction::LowerBetter => -*raw,
        })
        .collect();
    let mut sorted = signed.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let best = sorted[sorted.len() - 1];
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2]) / 2.0
    };

    if (best - sorted[0]).abs() == 0.0 {
        // All raw values equal: degenerate, everyone is "best".
        let out = values.iter().map(|(s, _)| (s.clone(), 1.0)).collect();
        return Ok((out, true));
    }
    let out = values
        .iter()
        .zip(&signed)
        .map(|((source, _), &s)| {
            let score = if best == median {
                // Median ties the best: the line is vertical, scores split.
                if s == best {
                    1.0
                } else {
                    0.0
                }
            } else {
                (0.5 + 0.5 * (s - median) / (best - median)).clamp(0.0, 1.0)
            };
            (source.clone(), score)
        })
        .collect();
    Ok((out, false))
}

/// Benchmark outcome for one source: four task results plus, when several
/// sources were compared, per-task normalized scores and their mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SourceReport {
    pub source: String,
    pub tasks: Vec<TaskResult>,
    pub normalized: Option<Vec<f64>>,
    pub overall: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub sources: Vec<SourceReport>,
    /// Tasks where all sources scored identically (normalization degenerate).
    pub degenerate_tasks: Vec<TaskKind>,
}

/// Combines per-source task results into a report. With a single source the
/// normalized columns stay empty; with more, every source must cover the
/// same task list in the same order.
pub fn build_report(per_source: Vec<(String, Vec<TaskResult>)>) -> Result<BenchReport> {
    if per_source.is_empty() {
        return Err(Error::Evaluation("no sources to report".into()));
    }
    let task_count = per_source[0].1.len();
    for (source, tasks) in &per_source {
        if tasks.len() != task_count {
            return Err(Error::Evaluation(format!(
                "source {source:?} has {} tasks, expected {task_count}",
                tasks.len()
            )));
        }
    }

    if per_source.len() == 1 {
        let (source, tasks) = per_source.into_iter().next().unwrap();
        return Ok(BenchReport {
            sources: vec![SourceReport {
                source,
                tasks,
                normalized: None,
                overall: None,
            }],
            degenerate_tasks: Vec::new(),
        });
    }

    let mut normalized_by_source: Vec<Vec<f64>> = vec![Vec::new(); per_source.len()];
    let mut degenerate_tasks = Vec::new();
    for t in 0..task_count {
        let direction = per_source[0].1[t].direction;
        let values: Vec<(String, f64)> = per_source
            .iter()
            .map(|(s, tasks)| (s.clone(), tasks[t].raw_score))
            .collect();
        let (scores, degenerate) = normalize_scores(&values, direction)?;
        if degenerate {
            degenerate_tasks.push(per_source[0].1[t].task);
        }
        for (i, (_, score)) in scores.into_iter().enumerate() {
            normalized_by_source[i].push(score);
        }
    }

    let sources = per_source
        .into_iter()
        .zip(normalized_by_source)
        .map(|((source, tasks), normalized)| {
            let overall = normalized.iter().sum::<f64>() / normalized.len() as f64;
            SourceReport {
                source,
                tasks,
                normalized: Some(normalized),
                overall: Some(overall),
            }
        })
        .collect();
    Ok(BenchReport {
        sources,
        degenerate_tasks,
    })
}

impl BenchReport {
    /// Fixed-width human-readable table.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<24}", "source"));
        for task in self.sources[0].tasks.iter() {
            let arrow = match task.direction {
                Direction::LowerBetter => "v",
                Direction::HigherBetter => "^",
            };
            out.push_str(&format!("{:>20}", format!("{} {}", task.task.name(), arrow)));
        }
        if self.sources[0].overall.is_some() {
            out.push_str(&format!("{:>20}", "overall ^"));
        }
        out.push('\n');
        for sr in &self.sources {
            out.push_str(&format!("{:<24}", sr.source));
            for (t, task) in sr.tasks.iter().enumerate() {
                let cell = match &sr.normalized {
                    Some(norm) => format!("{:.4} ({:.3})", task.raw_score, norm[t]),
                    None => format!("{:.4}", task.raw_score),
                };
                out.push_str(&format!("{cell:>20}"));
            }
            if let Some(overall) = sr.overall {
                out.push_str(&format!("{:>20}", format!("{overall:.4}")));
            }
            out.push('\n');
        }
        out
    }

    /// Plot-ready CSV: `task,source,raw,normalized` (normalized empty for
    /// single-source runs).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("task,source,raw,normalized\n");
        for sr in &self.sources {
            for (t, task) in sr.tasks.iter().enumerate() {
                let normalized = sr
                    .normalized
                    .as_ref()
                    .map(|n| format!("{}", n[t]))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    task.task.name(),
                    sr.source,
                    task.raw_score,
                    normalized
                ));
            }
        }
        out
    }
}

/// Categories present in a document slice, used for chance-level reporting.
pub fn category_count(docs: &[Document]) -> usize {
    docs.iter()
        .filter_map(|d| d.category.as_deref())
        .collect::<HashSet<_>>()
        .len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(source: &str, items: &[(&str, &[f64])]) -> EmbeddingSet {
        let mut s = EmbeddingSet::new(source, items[0].1.len());
        for (k, v) in items {
            s.push(*k, v.to_vec()).unwrap();
        }
        s
    }

    #[test]
    fn average_rank_counts_closer_candidates() {
        // One query at the origin; candidates at distances 2, 1, 3, 0.5 with
        // the match at distance 3 -> rank 4.
        let queries = set("q", &[("q1", &[0.0, 0.0])]);
        let candidates = set(
            "c",
            &[
                ("a", &[2.0, 0.0]),
                ("b", &[1.0, 0.0]),
                ("q1", &[3.0, 0.0]),
                ("d", &[0.5, 0.0]),
            ],
        );
        let rank = average_rank(
            &queries,
            &candidates,
            &identity_matches(&queries),
            Distance::Euclidean,
        )
        .unwrap();
        assert_eq!(rank, 4.0);
    }

    #[test]
    fn average_rank_perfect_retrieval() {
        let queries = set("q", &[("a", &[0.0, 0.0]), ("b", &[10.0, 0.0])]);
        let candidates = set("c", &[("a", &[0.1, 0.0]), ("b", &[9.9, 0.0])]);
        let rank = average_rank(
            &queries,
            &candidates,
            &identity_matches(&queries),
            Distance::Euclidean,
        )
        .unwrap();
        assert_eq!(rank, 1.0);
    }

    #[test]
    fn average_rank_tie_rule_uses_lexicographic_keys() {
        // All candidates equidistant; match key sorts first -> rank 1.
        let queries = set("q", &[("a", &[0.0, 0.0])]);
        let candidates = set(
            "c",
            &[
                ("e", &[1.0, 0.0]),
                ("a", &[0.0, 1.0]),
                ("c", &[-1.0, 0.0]),
                ("b", &[0.0, -1.0]),
                ("d", &[0.6, 0.8]),
            ],
        );
        let rank = average_rank(
            &queries,
            &candidates,
            &identity_matches(&queries),
            Distance::Euclidean,
        )
        .unwrap();
        assert_eq!(rank, 1.0);

        // Same geometry, but now the query is "c": keys a,b sort before it.
        let queries2 = set("q", &[("c", &[0.0, 0.0])]);
        let rank2 = average_rank(
            &queries2,
            &candidates,
            &identity_matches(&queries2),
            Distance::Euclidean,
        )
        .unwrap();
        assert_eq!(rank2, 3.0);
    }

    #[test]
    fn average_rank_is_insertion_order_invariant() {
        let queries = set("q", &[("x", &[0.0, 0.0])]);
        let forward = set(
            "c",
            &[("x", &[1.0, 0.0]), ("y", &[1.0, 0.0]), ("z", &[2.0, 0.0])],
        );
        let backward = set(
            "c",
            &[("z", &[2.0, 0.0]), ("y", &[1.0, 0.0]), ("x", &[1.0, 0.0])],
        );
        let m = identity_matches(&queries);
        let a = average_rank(&queries, &forward, &m, Distance::Euclidean).unwrap();
        let b = average_rank(&queries, &backward, &m, Distance::Euclidean).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, 1.0); // tie with "y", key "x" sorts first
    }

    #[test]
    fn average_rank_missing_match_errors() {
        let queries = set("q", &[("a", &[0.0])]);
        let candidates = set("c", &[("b", &[1.0])]);
        assert!(matches!(
            average_rank(
                &queries,
                &candidates,
                &identity_matches(&queries),
                Distance::Euclidean
            ),
            Err(Error::MissingMatchKey { .. })
        ));
    }

    #[test]
    fn knn_purity_perfect_separation() {
        let train = set(
            "t",
            &[
                ("a1", &[0.0, 0.0]),
                ("a2", &[0.1, 0.0]),
                ("a3", &[0.0, 0.1]),
                ("a4", &[0.1, 0.1]),
                ("a5", &[0.05, 0.05]),
                ("b1", &[100.0, 100.0]),
                ("b2", &[100.1, 100.0]),
                ("b3", &[100.0, 100.1]),
                ("b4", &[100.1, 100.1]),
                ("b5", &[100.05, 100.05]),
            ],
        );
        let labels: HashMap<String, String> = train
            .iter()
            .map(|(k, _)| (k.to_string(), k[..1].to_string()))
            .collect();
        let test = set("s", &[("ta", &[0.02, 0.02]), ("tb", &[100.02, 100.02])]);
        let test_labels: HashMap<String, String> = [
            ("ta".to_string(), "a".to_string()),
            ("tb".to_string(), "b".to_string()),
        ]
        .into();
        let purity = knn_purity(&train, &labels, &test, &test_labels, 5, Distance::Euclidean).unwrap();
        assert_eq!(purity, 1.0);
    }

    #[test]
    fn knn_purity_single_category_is_one() {
        let train = set("t", &[("x1", &[0.0]), ("x2", &[1.0]), ("x3", &[2.0])]);
        let labels: HashMap<String, String> = train
            .iter()
            .map(|(k, _)| (k.to_string(), "only".to_string()))
            .collect();
        let test = set("s", &[("y", &[0.5])]);
        let test_labels: HashMap<String, String> = [("y".to_string(), "only".to_string())].into();
        let purity = knn_purity(&train, &labels, &test, &test_labels, 3, Distance::Euclidean).unwrap();
        assert_eq!(purity, 1.0);
    }

    #[test]
    fn normalize_higher_better_example() {
        let values = vec![
            ("a".to_string(), 0.8),
            ("b".to_string(), 0.6),
            ("c".to_string(), 0.4),
        ];
        let (scores, degenerate) = normalize_scores(&values, Direction::HigherBetter).unwrap();
        assert!(!degenerate);
        // Best and median map exactly; the clamped end within 1e-12.
        assert_eq!(scores[0].1, 1.0);
        assert_eq!(scores[1].1, 0.5);
        assert!(scores[2].1.abs() < 1e-12);
    }

    #[test]
    fn normalize_lower_better_with_clamp() {
        let values = vec![
            ("a".to_string(), 1.0),
            ("b".to_string(), 2.0),
            ("c".to_string(), 3.0),
            ("d".to_string(), 100.0),
        ];
        let (scores, degenerate) = normalize_scores(&values, Direction::LowerBetter).unwrap();
        assert!(!degenerate);
        assert_eq!(scores[0].1, 1.0);
        // Median of {1,2,3,100} raw is 2.5 (in improving direction -2.5), so
        // a hypothetical source at 2.5 maps to 0.5; 2.0 sits above it.
        let expected_b = 0.5 + 0.5 * (-2.0 - (-2.5)) / (-1.0 - (-2.5));
        assert!((scores[1].1 - expected_b).abs() < 1e-12);
        assert_eq!(scores[3].1, 0.0);
    }

    #[test]
    fn normalize_degenerate_all_equal() {
        let values = vec![("a".to_string(), 2.0), ("b".to_string(), 2.0)];
        let (scores, degenerate) = normalize_scores(&values, Direction::LowerBetter).unwrap();
        assert!(degenerate);
        assert!(scores.iter().all(|(_, s)| *s == 1.0));
    }

    #[test]
    fn normalize_needs_two_sources() {
        let values = vec![("a".to_string(), 2.0)];
        assert!(normalize_scores(&values, Direction::LowerBetter).is_err());
    }

    #[test]
    fn report_single_source_has_no_normalized_scores() {
        let tasks = vec![TaskResult {
            task: TaskKind::TitleAbstract,
            raw_score: 2.0,
            direction: Direction::LowerBetter,
            n: 10,
            excluded: 0,
        }];
        let report = build_report(vec![("only".into(), tasks)]).unwrap();
        assert!(report.sources[0].normalized.is_none());
        assert!(report.sources[0].overall.is_none());
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"normalized\":null"));
    }

    #[test]
    fn report_overall_is_mean_of_normalized() {
        let mk = |raw_rank: f64, purity: f64| {
            vec![
                TaskResult {
                    task: TaskKind::TitleAbstract,
                    raw_score: raw_rank,
                    direction: Direction::LowerBetter,
                    n: 10,
                    excluded: 0,
                },
                TaskResult {
                    task: TaskKind::Clustering,
                    raw_score: purity,
                    direction: Direction::HigherBetter,
                    n: 10,
                    excluded: 0,
                },
            ]
        };
        let report = build_report(vec![
            ("good".into(), mk(1.0, 0.9)),
            ("mid".into(), mk(2.0, 0.5)),
            ("bad".into(), mk(5.0, 0.2)),
        ])
        .unwrap();
        let good = &report.sources[0];
        assert_eq!(good.normalized.as_ref().unwrap(), &vec![1.0, 1.0]);
        assert_eq!(good.overall.unwrap(), 1.0);
        let mid = &report.sources[1];
        let expected = mid.normalized.as_ref().unwrap().iter().sum::<f64>() / 2.0;
        assert_eq!(mid.overall.unwrap(), expected);
    }
}
