//! Persistence formats.
//!
//! Binary matrices use two fixed little-endian layouts:
//!
//! * `JSMFDM01` dense: magic, rows u64, cols u64, then row-major f64 values.
//! * `JSMFSM01` sparse: magic, rows u64, cols u64, nnz u64, then nnz triples
//!   of (row u64, col u64, value f64).
//!
//! Corpora round-trip through the UCI bag-of-words text format. Topic models
//! and reports are written as a human-readable key-value tree that references
//! the binary matrices by file name. All writes go through a temp file plus
//! rename so readers never observe partial output.

use crate::corpus::BagOfWords;
use crate::infer::TopicModel;
use crate::metrics::TopicReport;
use crate::rectify::{CompressedCooccurrence, SparseSym};
use ndarray::{Array1, Array2};
use std::fs;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

const DENSE_MAGIC: &[u8; 8] = b"JSMFDM01";
const SPARSE_MAGIC: &[u8; 8] = b"JSMFSM01";

#[derive(Error, Debug)]
pub enum IoError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: bad magic, expected {expected}")]
    BadMagic { path: PathBuf, expected: String },
    #[error("{path}: truncated or oversized payload")]
    BadLength { path: PathBuf },
}

fn wrap<T>(path: &Path, r: io::Result<T>) -> Result<T, IoError> {
    r.map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes a file atomically: the content lands under a temporary name in the
/// same directory and is renamed into place.
pub fn write_atomic(path: &Path, write_fn: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), IoError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().map(|f| f.to_string_lossy()).unwrap_or_default(),
        std::process::id()
    ));
    {
        let file = wrap(&tmp, fs::File::create(&tmp))?;
        let mut writer = BufWriter::new(file);
        wrap(&tmp, write_fn(&mut writer))?;
        wrap(&tmp, writer.flush())?;
    }
    wrap(path, fs::rename(&tmp, path))
}

pub fn write_dmat(path: &Path, matrix: &Array2<f64>) -> Result<(), IoError> {
    let (rows, cols) = matrix.dim();
    write_atomic(path, |w| {
        w.write_all(DENSE_MAGIC)?;
        w.write_all(&(rows as u64).to_le_bytes())?;
        w.write_all(&(cols as u64).to_le_bytes())?;
        for i in 0..rows {
            for j in 0..cols {
                w.write_all(&matrix[[i, j]].to_le_bytes())?;
            }
        }
        Ok(())
    })
}

pub fn write_dmat_vector(path: &Path, v: &Array1<f64>) -> Result<(), IoError> {
    let m = v
        .view()
        .insert_axis(ndarray::Axis(1))
        .to_owned();
    write_dmat(path, &m)
}

pub fn read_dmat(path: &Path) -> Result<Array2<f64>, IoError> {
    let file = wrap(path, fs::File::open(path))?;
    let mut reader = BufReader::new(file);
    let mut magic = [0u8; 8];
    wrap(path, reader.read_exact(&mut magic))?;
    if &magic != DENSE_MAGIC {
        return Err(IoError::BadMagic {
            path: path.to_path_buf(),
            expected: String::from_utf8_lossy(DENSE_MAGIC).to_string(),
        });
    }
    let rows = wrap(path, read_u64(&mut reader))? as usize;
    let cols = wrap(path, read_u64(&mut reader))? as usize;
    let mut data = Vec::with_capacity(rows * cols);
    let mut buf = [0u8; 8];
    for _ in 0..rows * cols {
        wrap(path, reader.read_exact(&mut buf))?;
        data.push(f64::from_le_bytes(buf));
    }
    if reader.bytes().next().is_some() {
        return Err(IoError::BadLength {
            path: path.to_path_buf(),
        });
    }
    Array2::from_shape_vec((rows, cols), data).map_err(|_| IoError::BadLength {
        path: path.to_path_buf(),
    })
}

pub fn write_smat(path: &Path, n: usize, triples: &[(u64, u64, f64)]) -> Result<(), IoError> {
    write_atomic(path, |w| {
        w.write_all(SPARSE_MAGIC)?;
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&(triples.len() as u64).to_le_bytes())?;
        for &(i, j, v) in triples {
            w.write_all(&i.to_le_bytes())?;
            w.write_all(&j.to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    })
}

pub fn read_smat(path: &Path) -> Result<(usize, usize, Vec<(u64, u64, f64)>), IoError> {
    let file = wrap(path, fs::File::open(path))?;
    let mut reader = BufReader::new(file);
    let mut magic = [0u8; 8];
    wrap(path, reader.read_exact(&mut magic))?;
    if &magic != SPARSE_MAGIC {
        return Err(IoError::BadMagic {
            path: path.to_path_buf(),
            expected: String::from_utf8_lossy(SPARSE_MAGIC).to_string(),
        });
    }
    let rows = wrap(path, read_u64(&mut reader))? as usize;
    let cols = wrap(path, read_u64(&mut reader))? as usize;
    let nnz = wrap(path, read_u64(&mut reader))? as usize;
    let mut triples = Vec::with_capacity(nnz);
    let mut buf = [0u8; 8];
    for _ in 0..nnz {
        wrap(path, reader.read_exact(&mut buf))?;
        let i = u64::from_le_bytes(buf);
        wrap(path, reader.read_exact(&mut buf))?;
        let j = u64::from_le_bytes(buf);
        wrap(path, reader.read_exact(&mut buf))?;
        let v = f64::from_le_bytes(buf);
        triples.push((i, j, v));
    }
    if reader.bytes().next().is_some() {
        return Err(IoError::BadLength {
            path: path.to_path_buf(),
        });
    }
    Ok((rows, cols, triples))
}

fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Writes a corpus in the UCI docword/vocab text pair.
pub fn write_uci(docword_path: &Path, vocab_path: &Path, corpus: &BagOfWords) -> Result<(), IoError> {
    let nnz: usize = corpus.docs().iter().map(|d| d.len()).sum();
    write_atomic(docword_path, |w| {
        writeln!(w, "{}", corpus.num_docs())?;
        writeln!(w, "{}", corpus.num_words())?;
        writeln!(w, "{nnz}")?;
        for (doc_idx, doc) in corpus.docs().iter().enumerate() {
            for &(word, count) in doc {
                writeln!(w, "{} {} {}", doc_idx + 1, word + 1, count)?;
            }
        }
        Ok(())
    })?;
    write_atomic(vocab_path, |w| {
        for term in corpus.vocab().terms() {
            writeln!(w, "{term}")?;
        }
        Ok(())
    })
}

/// File names used by [`write_topic_model`].
pub mod model_files {
    pub const MODEL: &str = "model.txt";
    pub const WORD_TOPIC: &str = "B.dmat";
    pub const RESPONSIBILITY: &str = "Bbreve.dmat";
    pub const CORRELATION: &str = "A.dmat";
    pub const MARGINAL: &str = "d.dmat";
    pub const FACTOR: &str = "Y.dmat";
    pub const CORRECTION: &str = "E.smat";
}

/// Writes the model as a key-value tree plus binary matrices by reference.
/// Returns the paths written.
pub fn write_topic_model(
    dir: &Path,
    model: &TopicModel,
    compressed: Option<&CompressedCooccurrence>,
    vocab: Option<&crate::corpus::Vocabulary>,
) -> Result<Vec<PathBuf>, IoError> {
    let mut written = Vec::new();

    let path = dir.join(model_files::WORD_TOPIC);
    write_dmat(&path, &model.word_topic)?;
    written.push(path);
    let path = dir.join(model_files::RESPONSIBILITY);
    write_dmat(&path, &model.responsibility)?;
    written.push(path);
    let path = dir.join(model_files::CORRELATION);
    write_dmat(&path, &model.correlation)?;
    written.push(path);
    let path = dir.join(model_files::MARGINAL);
    write_dmat_vector(&path, &model.word_marginal)?;
    written.push(path);
    if let Some(yc) = compressed {
        let path = dir.join(model_files::FACTOR);
        write_dmat(&path, &yc.factor)?;
        written.push(path);
        let path = dir.join(model_files::CORRECTION);
        write_smat(&path, yc.correction.n(), &upper_triples(&yc.correction))?;
        written.push(path);
    }

    let model_path = dir.join(model_files::MODEL);
    write_atomic(&model_path, |w| {
        writeln!(w, "jsmf-model")?;
        writeln!(w, "  topics: {}", model.num_topics())?;
        writeln!(w, "  vocab_size: {}", model.num_words())?;
        writeln!(w, "  anchors:")?;
        for (topic, &anchor) in model.anchors.indices.iter().enumerate() {
            match vocab {
                Some(v) => writeln!(w, "    {topic}: {anchor} {}", v.term(anchor))?,
                None => writeln!(w, "    {topic}: {anchor}")?,
            }
        }
        if !model.degenerate_rows.is_empty() {
            writeln!(w, "  degenerate_rows: {}", model.degenerate_rows.len())?;
        }
        writeln!(w, "  matrices:")?;
        writeln!(w, "    word_topic: {}", model_files::WORD_TOPIC)?;
        writeln!(w, "    responsibility: {}", model_files::RESPONSIBILITY)?;
        writeln!(w, "    correlation: {}", model_files::CORRELATION)?;
        writeln!(w, "    marginal: {}", model_files::MARGINAL)?;
        if let Some(yc) = compressed {
            writeln!(w, "  compressed:")?;
            writeln!(w, "    factor: {}", model_files::FACTOR)?;
            writeln!(w, "    correction: {}", model_files::CORRECTION)?;
            writeln!(w, "    shift: {:e}", yc.shift)?;
            writeln!(w, "    epsilon_bound: {:e}", yc.epsilon_bound)?;
        }
        Ok(())
    })?;
    written.push(model_path);
    Ok(written)
}

fn upper_triples(e: &SparseSym) -> Vec<(u64, u64, f64)> {
    e.entries()
        .iter()
        .map(|&(i, j, v)| (i as u64, j as u64, v))
        .collect()
}

/// Writes the evaluation report as a key-value tree, resolving word indices
/// through the vocabulary when given.
pub fn write_report(
    path: &Path,
    report: &TopicReport,
    vocab: Option<&crate::corpus::Vocabulary>,
) -> Result<(), IoError> {
    let name = |i: usize| -> String {
        match vocab {
            Some(v) => v.term(i).to_string(),
            None => format!("w{i}"),
        }
    };
    write_atomic(path, |w| {
        writeln!(w, "jsmf-report")?;
        writeln!(w, "  relative_recovery: {:.6e}", report.relative_recovery)?;
        writeln!(
            w,
            "  relative_approximation: {:.6e}",
            report.relative_approximation
        )?;
        writeln!(w, "  relative_dominancy: {:.6e}", report.relative_dominancy)?;
        writeln!(w, "  specificity: {:.6e}", report.specificity)?;
        writeln!(w, "  dissimilarity: {:.6e}", report.dissimilarity)?;
        writeln!(
            w,
            "  log_relative_volume: {:.6e}",
            report.log_relative_volume
        )?;
        writeln!(w, "  topics:")?;
        for t in &report.topics {
            writeln!(w, "    topic {}:", t.topic)?;
            writeln!(w, "      anchor: {}", name(t.anchor))?;
            writeln!(w, "      mst_incoherence: {:.6e}", t.mst_incoherence)?;
            writeln!(
                w,
                "      prominent: {}",
                t.prominent.iter().map(|&i| name(i)).collect::<Vec<_>>().join(" ")
            )?;
            writeln!(
                w,
                "      characteristic: {}",
                t.characteristic
                    .iter()
                    .map(|&i| name(i))
                    .collect::<Vec<_>>()
                    .join(" ")
            )?;
        }
        if !report.flags.is_empty() {
            writeln!(w, "  flags:")?;
            for f in &report.flags {
                writeln!(w, "    - {f}")?;
            }
        }
        Ok(())
    })
}

/// Serializes rectifier convergence traces as line-delimited records.
pub fn write_convergence_records(
    path: &Path,
    records: impl Iterator<Item = (usize, f64, usize, f64, f64)> + Clone,
) -> Result<(), IoError> {
    write_atomic(path, |w| {
        writeln!(w, "iteration residual nnz_correction shift elapsed_seconds")?;
        for (iteration, residual, nnz, shift, elapsed) in records.clone() {
            writeln!(w, "{iteration} {residual:e} {nnz} {shift:e} {elapsed:.6}")?;
        }
        Ok(())
    })
}
