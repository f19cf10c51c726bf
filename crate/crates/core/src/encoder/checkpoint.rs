//! Checkpoint serialization.
//!
//! Binary layout, all multi-byte values little-endian:
//!
//! ```text
//! magic "SEMC" | version u32 | vocab_size u32 | E u32 | H u32 | D u32 | p f64
//! token embeddings (vocab_size x E, row-major f64)
//! affine1 weight (H x E, row-major f64) | affine1 bias (H f64)
//! affine2 weight (D x H, row-major f64) | affine2 bias (D f64)
//! ```
//!
//! The vocabulary lives alongside the checkpoint as `<path>.vocab`, UTF-8,
//! one token per line, in index order.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::{EncoderParams, Vocabulary};
use crate::linalg::Matrix;
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"SEMC";
const VERSION: u32 = 1;

fn vocab_path(ckpt: &Path) -> PathBuf {
    let mut os = ckpt.as_os_str().to_os_string();
    os.push(".vocab");
    PathBuf::from(os)
}

/// Writes the checkpoint and its sibling vocabulary file.
pub fn save_checkpoint(path: &Path, params: &EncoderParams, vocab: &Vocabulary) -> Result<()> {
    if vocab.size() != params.vocab_size() {
        return Err(Error::DimensionMismatch {
            expected: params.vocab_size(),
            got: vocab.size(),
        });
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    for dim in [
        params.vocab_size(),
        params.token_dim(),
        params.hidden_dim(),
        params.embed_dim(),
    ] {
        out.write_all(&(dim as u32).to_le_bytes())?;
    }
    out.write_all(&params.dropout.to_le_bytes())?;
    for segment in params.segments() {
        for v in segment {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    save_vocabulary(&vocab_path(path), vocab)
}

/// Reads a checkpoint and its sibling vocabulary file.
pub fn load_checkpoint(path: &Path) -> Result<(EncoderParams, Vocabulary)> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);

    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::CheckpointFormat(format!(
            "bad magic {magic:?}, expected {MAGIC:?}"
        )));
    }
    let version = read_u32(&mut file)?;
    if version != VERSION {
        return Err(Error::CheckpointFormat(format!(
            "unsupported version {version}"
        )));
    }
    let vocab_size = read_u32(&mut file)? as usize;
    let token_dim = read_u32(&mut file)? as usize;
    let hidden_dim = read_u32(&mut file)? as usize;
    let embed_dim = read_u32(&mut file)? as usize;
    let dropout = read_f64(&mut file)?;
    if !(0.0..1.0).contains(&dropout) {
        return Err(Error::CheckpointFormat(format!(
            "dropout {dropout} outside [0,1)"
        )));
    }

    let token_emb = read_matrix(&mut file, vocab_size, token_dim)?;
    let w1 = read_matrix(&mut file, hidden_dim, token_dim)?;
    let b1 = read_vec(&mut file, hidden_dim)?;
    let w2 = read_matrix(&mut file, embed_dim, hidden_dim)?;
    let b2 = read_vec(&mut file, embed_dim)?;

    let params = EncoderParams {
        token_emb,
        w1,
        b1,
        w2,
        b2,
        dropout,
    };
    if !params.is_finite() {
        return Err(Error::CheckpointFormat("non-finite weights".into()));
    }

    let vocab = load_vocabulary(&vocab_path(path))?;
    if vocab.size() != vocab_size {
        return Err(Error::CheckpointFormat(format!(
            "vocabulary file has {} tokens, checkpoint expects {vocab_size}",
            vocab.size()
        )));
    }
    Ok((params, vocab))
}

pub fn save_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut out = String::new();
    for token in vocab.tokens() {
        out.push_str(token);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_vocabulary(path: &Path) -> Result<Vocabulary> {
    let text = std::fs::read_to_string(path)?;
    let tokens: Vec<String> = text.lines().map(str::to_string).collect();
    Vocabulary::from_tokens(tokens)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

fn read_vec<R: Read>(r: &mut R, len: usize) -> Result<Vec<f64>> {
    (0..len).map(|_| read_f64(r)).collect()
}

fn read_matrix<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<Matrix> {
    Ok(Matrix::from_vec(rows, cols, read_vec(r, rows * cols)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generate_synthetic_corpus;
    use crate::encoder::{build_vocab, init_params};

    #[test]
    fn checkpoint_roundtrip() {
        let corpus = generate_synthetic_corpus(6, 2, 8, 6, 11).unwrap();
        let vocab = build_vocab(&corpus, 1).unwrap();
        let params = init_params(vocab.size(), 6, 5, 4, 0.1, 3).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ckpt-test");
        save_checkpoint(&path, &params, &vocab).unwrap();
        let (loaded, loaded_vocab) = load_checkpoint(&path).unwrap();
        assert_eq!(params, loaded);
        assert_eq!(vocab, loaded_vocab);
    }

    #[test]
    fn checkpoint_bytes_are_deterministic() {
        let corpus = generate_synthetic_corpus(6, 2, 8, 6, 11).unwrap();
        let vocab = build_vocab(&corpus, 1).unwrap();
        let params = init_params(vocab.size(), 6, 5, 4, 0.1, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a");
        let p2 = dir.path().join("b");
        save_checkpoint(&p1, &params, &vocab).unwrap();
        save_checkpoint(&p2, &params, &vocab).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad");
        std::fs::write(&path, b"NOPE0000").unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(Error::CheckpointFormat(_))
        ));
    }
}
