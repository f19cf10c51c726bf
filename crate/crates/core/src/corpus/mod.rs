//! Document/summary data model, corpus file I/O and text segmentation.
//!
//! A corpus is a set of documents (id, title, abstract, optional category
//! label, optional search query) plus summarizing sentences tied to documents.
//! The on-disk format is UTF-8 JSON-lines with two line kinds:
//!
//! ```text
//! {"kind":"doc","id":...,"title":...,"abstract":...,"category":null|string,"query":null|string}
//! {"kind":"summary","doc_id":...,"prompt_id":0-4,"text":...}
//! ```
//!
//! Lines may interleave, but a document must precede its summaries.

mod synth;

pub use synth::generate_synthetic_corpus;

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One scientific paper: identifier, title, abstract and optional metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub category: Option<String>,
    pub query: Option<String>,
}

/// One generated summarizing sentence tied to a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub doc_id: String,
    pub prompt_id: u8,
    pub text: String,
}

/// In-memory corpus: documents in file order, summaries grouped per document.
///
/// Immutable after load; safe to share across evaluation workers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    index: HashMap<String, usize>,
    summaries: Vec<Vec<SummaryRecord>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum CorpusLine {
    Doc(Document),
    Summary(SummaryRecord),
}

impl Corpus {
    pub fn new() -> Self {
        Corpus::default()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, idx: usize) -> &Document {
        &self.documents[idx]
    }

    pub fn doc_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Summaries of the document at `idx`, in file order.
    pub fn summaries_of(&self, idx: usize) -> &[SummaryRecord] {
        &self.summaries[idx]
    }

    pub fn total_summaries(&self) -> usize {
        self.summaries.iter().map(Vec::len).sum()
    }

    /// Adds a document, enforcing id uniqueness and nonempty title/abstract.
    ///
    /// `line` is only used for error reporting; pass 0 for programmatic use.
    pub fn push_document(&mut self, doc: Document, line: usize) -> Result<()> {
        if doc.id.is_empty() {
            return Err(Error::InvalidRecord {
                line,
                msg: "document id is empty".into(),
            });
        }
        if doc.title.trim().is_empty() {
            return Err(Error::InvalidRecord {
                line,
                msg: format!("document {:?} has an empty title", doc.id),
            });
        }
        if doc.abstract_text.trim().is_empty() {
            return Err(Error::InvalidRecord {
                line,
                msg: format!("document {:?} has an empty abstract", doc.id),
            });
        }
        if self.index.contains_key(&doc.id) {
            return Err(Error::DuplicateDocId { line, id: doc.id });
        }
        self.index.insert(doc.id.clone(), self.documents.len());
        self.documents.push(doc);
        self.summaries.push(Vec::new());
        Ok(())
    }

    /// Adds a summary, enforcing referential integrity and field invariants.
    pub fn push_summary(&mut self, summary: SummaryRecord, line: usize) -> Result<()> {
        if summary.prompt_id > 4 {
            return Err(Error::InvalidRecord {
                line,
                msg: format!("prompt_id {} outside [0,4]", summary.prompt_id),
            });
        }
        if summary.text.trim().is_empty() {
            return Err(Error::InvalidRecord {
                line,
                msg: format!("summary for {:?} has empty text", summary.doc_id),
            });
        }
        match self.index.get(&summary.doc_id) {
            Some(&idx) => {
                self.summaries[idx].push(summary);
                Ok(())
            }
            None => Err(Error::UnknownDocId {
                line,
                id: summary.doc_id,
            }),
        }
    }
}

/// Loads and validates a JSON-lines corpus file. Document order follows line
/// order; blank lines are rejected as malformed.
pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let file = std::fs::File::open(path)?;
    read_corpus(BufReader::new(file))
}

/// Same as [`load_corpus`] but over any reader.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut corpus = Corpus::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let parsed: CorpusLine =
            serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: line_no,
                msg: e.to_string(),
            })?;
        match parsed {
            CorpusLine::Doc(doc) => corpus.push_document(doc, line_no)?,
            CorpusLine::Summary(s) => corpus.push_summary(s, line_no)?,
        }
    }
    Ok(corpus)
}

/// Writes the canonical serialization: each document line followed by its
/// summaries in original order. Loading and re-saving any valid file yields
/// exactly these bytes.
pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_corpus(corpus, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_corpus<W: Write>(corpus: &Corpus, out: &mut W) -> Result<()> {
    for (idx, doc) in corpus.documents().iter().enumerate() {
        let line = serde_json::to_string(&CorpusLine::Doc(doc.clone()))
            .expect("document serialization cannot fail");
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
        for s in corpus.summaries_of(idx) {
            let line = serde_json::to_string(&CorpusLine::Summary(s.clone()))
                .expect("summary serialization cannot fail");
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Sentence terminators recognized by [`split_sentences`].
const TERMINATORS: [char; 3] = ['.', '!', '?'];

/// Abbreviations whose trailing period never ends a sentence.
const ABBREVIATIONS: [&str; 6] = ["et al.", "e.g.", "i.e.", "vs.", "Fig.", "Eq."];

/// Splits text into sentences on `.`, `!` or `?` followed by whitespace and
/// an uppercase letter or digit, with a fixed abbreviation exception list.
/// Text without a recognized boundary comes back as a single sentence.
/// Sentences are trimmed; joining them with single spaces reproduces the
/// input modulo whitespace.
pub fn split_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0;

    for i in 0..chars.len() {
        if !TERMINATORS.contains(&chars[i]) {
            continue;
        }
        // Boundary requires whitespace then an uppercase letter or digit.
        let mut j = i + 1;
        if j >= chars.len() || !chars[j].is_whitespace() {
            continue;
        }
        while j < chars.len() && chars[j].is_whitespace() {
            j += 1;
        }
        if j >= chars.len() || !(chars[j].is_uppercase() || chars[j].is_numeric()) {
            continue;
        }
        if ends_with_abbreviation(&chars[start..=i]) {
            continue;
        }
        let sentence: String = chars[start..=i].iter().collect();
        let sentence = sentence.trim().to_string();
        if !sentence.is_empty() {
            sentences.push(sentence);
        }
        start = j;
    }

    if start < chars.len() {
        let tail: String = chars[start..].iter().collect();
        let tail = tail.trim().to_string();
        if !tail.is_empty() {
            sentences.push(tail);
        }
    }
    if sentences.is_empty() && !text.trim().is_empty() {
        sentences.push(text.trim().to_string());
    }
    sentences
}

fn ends_with_abbreviation(prefix: &[char]) -> bool {
    ABBREVIATIONS.iter().any(|abbr| {
        let abbr_chars: Vec<char> = abbr.chars().collect();
        prefix.len() >= abbr_chars.len() && prefix[prefix.len() - abbr_chars.len()..] == abbr_chars
    })
}

/// Splits an abstract into two halves at the sentence boundary whose
/// left-side character count (sentence characters only, separators excluded)
/// is closest to half the total; earlier boundary wins ties.
pub fn split_abstract_halves(abstract_text: &str) -> Result<(String, String)> {
    let sentences = split_sentences(abstract_text);
    if sentences.len() < 2 {
        return Err(Error::CannotHalve);
    }
    let lens: Vec<usize> = sentences.iter().map(|s| s.chars().count()).collect();
    let total: usize = lens.iter().sum();

    let mut best_k = 1;
    let mut best_gap = u64::MAX;
    let mut left = 0usize;
    for k in 1..sentences.len() {
        left += lens[k - 1];
        // Compare |2*left - total| in integers to avoid fractional halves.
        let gap = (2 * left as u64).abs_diff(total as u64);
        if gap < best_gap {
            best_gap = gap;
            best_k = k;
        }
    }

    let first = sentences[..best_k].join(" ");
    let second = sentences[best_k..].join(" ");
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str) -> Document {
        Document {
            id: id.into(),
            title: "A title".into(),
            abstract_text: "First sentence. Second sentence.".into(),
            category: None,
            query: None,
        }
    }

    #[test]
    fn load_valid_corpus() {
        let input = concat!(
            r#"{"kind":"doc","id":"p1","title":"T1","abstract":"A one. A two.","category":null,"query":null}"#,
            "\n",
            r#"{"kind":"doc","id":"p2","title":"T2","abstract":"B one. B two.","category":"x","query":"q"}"#,
            "\n",
            r#"{"kind":"summary","doc_id":"p1","prompt_id":0,"text":"s11"}"#,
            "\n",
            r#"{"kind":"summary","doc_id":"p1","prompt_id":1,"text":"s12"}"#,
            "\n",
            r#"{"kind":"summary","doc_id":"p2","prompt_id":0,"text":"s21"}"#,
            "\n",
            r#"{"kind":"summary","doc_id":"p2","prompt_id":1,"text":"s22"}"#,
            "\n",
        );
        let corpus = read_corpus(input.as_bytes()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.total_summaries(), 4);
        assert_eq!(corpus.document(0).id, "p1");
        assert_eq!(corpus.summaries_of(1).len(), 2);
    }

    #[test]
    fn duplicate_id_reports_id_and_line() {
        let input = concat!(
            r#"{"kind":"doc","id":"p1","title":"T","abstract":"A.","category":null,"query":null}"#,
            "\n",
            r#"{"kind":"doc","id":"p1","title":"T","abstract":"A.","category":null,"query":null}"#,
            "\n",
        );
        let err = read_corpus(input.as_bytes()).unwrap_err();
        match err {
            Error::DuplicateDocId { line, id } => {
                assert_eq!(line, 2);
                assert_eq!(id, "p1");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn summary_for_unknown_doc_fails() {
        let input = r#"{"kind":"summary","doc_id":"nope","prompt_id":0,"text":"s"}"#;
        let err = read_corpus(input.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::UnknownDocId { line: 1, .. }));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let input = "not json\n";
        let err = read_corpus(input.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 1, .. }));
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        let corpus = read_corpus("".as_bytes()).unwrap();
        assert!(corpus.is_empty());
    }

    #[test]
    fn canonical_roundtrip() {
        let mut corpus = Corpus::new();
        corpus.push_document(doc("a"), 0).unwrap();
        corpus.push_document(doc("b"), 0).unwrap();
        corpus
            .push_summary(
                SummaryRecord {
                    doc_id: "a".into(),
                    prompt_id: 0,
                    text: "s".into(),
                },
                0,
            )
            .unwrap();
        let mut bytes = Vec::new();
        write_corpus(&corpus, &mut bytes).unwrap();
        let reloaded = read_corpus(bytes.as_slice()).unwrap();
        let mut bytes2 = Vec::new();
        write_corpus(&reloaded, &mut bytes2).unwrap();
        assert_eq!(bytes, bytes2);
    }

    #[test]
    fn split_two_terminated_sentences() {
        assert_eq!(split_sentences("A b. C d."), vec!["A b.", "C d."]);
    }

    #[test]
    fn split_without_terminator_is_one_sentence() {
        assert_eq!(split_sentences("No terminator here"), vec!["No terminator here"]);
    }

    #[test]
    fn split_honors_abbreviations() {
        assert_eq!(
            split_sentences("X et al. found y. Z."),
            vec!["X et al. found y.", "Z."]
        );
        assert_eq!(
            split_sentences("See Fig. 3 for e.g. results. Next one."),
            vec!["See Fig. 3 for e.g. results.", "Next one."]
        );
    }

    #[test]
    fn split_requires_uppercase_or_digit_after_terminator() {
        assert_eq!(
            split_sentences("Versus vs. the baseline. and lowercase continues."),
            vec!["Versus vs. the baseline. and lowercase continues."]
        );
        assert_eq!(
            split_sentences("Count one. 2 is a digit."),
            vec!["Count one.", "2 is a digit."]
        );
    }

    #[test]
    fn halves_balance_by_characters_with_early_tie() {
        // Lengths 10/100/10; both boundaries are 50 chars from half, so the
        // earlier boundary wins and the first half is the first sentence.
        let s1 = "Aaaaaaaaa.";
        let s2 = format!("B{}.", "b".repeat(98));
        let s3 = "Cccccccccc";
        assert_eq!(s1.chars().count(), 10);
        assert_eq!(s2.chars().count(), 100);
        assert_eq!(s3.chars().count(), 10);
        let text = format!("{s1} {s2} {s3}");
        let (first, second) = split_abstract_halves(&text).unwrap();
        assert_eq!(first, s1);
        assert_eq!(second, format!("{s2} {s3}"));
    }

    #[test]
    fn halves_of_two_sentences() {
        let (first, second) = split_abstract_halves("A one. B two.").unwrap();
        assert_eq!(first, "A one.");
        assert_eq!(second, "B two.");
    }

    #[test]
    fn halves_of_equal_quadruple() {
        let text = "Aaaa aaa. Bbbb bbb. Cccc ccc. Dddd ddd.";
        let (first, second) = split_abstract_halves(text).unwrap();
        assert_eq!(first, "Aaaa aaa. Bbbb bbb.");
        assert_eq!(second, "Cccc ccc. Dddd ddd.");
    }

    #[test]
    fn single_sentence_cannot_halve() {
        assert!(matches!(
            split_abstract_halves("Only one sentence here."),
            Err(Error::CannotHalve)
        ));
    }
}
