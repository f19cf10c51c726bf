//! Embedding exchange files, for evaluating externally produced vectors.
//!
//! JSON-lines with a header line then one record per vector:
//!
//! ```text
//! {"source":"my-model","dim":32}
//! {"key":"doc-0000","vec":[0.1,0.2,...]}
//! ```
//!
//! The header may carry an optional `"distance"` field naming the geometry
//! the vectors were trained for (`"euclidean"` or `"cosine"`).

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Distance, EmbeddingSet};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Header {
    source: String,
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    distance: Option<Distance>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    key: String,
    vec: Vec<f64>,
}

pub fn save_embedding_set(
    path: &Path,
    set: &EmbeddingSet,
    distance: Option<Distance>,
) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header = Header {
        source: set.source().to_string(),
        dim: set.dim(),
        distance,
    };
    writeln!(out, "{}", serde_json::to_string(&header).unwrap())?;
    for (key, vec) in set.iter() {
        let record = Record {
            key: key.to_string(),
            vec: vec.to_vec(),
        };
        writeln!(out, "{}", serde_json::to_string(&record).unwrap())?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_embedding_set(path: &Path) -> Result<(EmbeddingSet, Option<Distance>)> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();

    let header_line = lines
        .next()
        .ok_or_else(|| Error::MalformedLine {
            line: 1,
            msg: "missing exchange header".into(),
        })??;
    let header: Header = serde_json::from_str(&header_line).map_err(|e| Error::MalformedLine {
        line: 1,
        msg: e.to_string(),
    })?;

    let mut set = EmbeddingSet::new(header.source, header.dim);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line?;
        let record: Record = serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
            line: line_no,
            msg: e.to_string(),
        })?;
        set.push(record.key, record.vec)?;
    }
    Ok((set, header.distance))
}
