//! Bag-of-words corpora: UCI-format loading, tf-idf vocabulary curation,
//! short-document filtering, and synthetic corpus generation with planted
//! anchor structure.

use crate::infer::TopicModel;
use crate::linalg::PivotSet;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma};
use std::collections::BTreeMap;
use std::io::BufRead;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed docword header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: malformed triple: {detail}")]
    MalformedTriple { line: usize, detail: String },
    #[error("line {line}: id out of range (doc {doc} of {docs}, word {word} of {words})")]
    IdOutOfRange {
        line: usize,
        doc: u64,
        word: u64,
        docs: u64,
        words: u64,
    },
    #[error("line {line}: non-positive count {count}")]
    NonPositiveCount { line: usize, count: i64 },
    #[error("vocabulary has {actual} terms, docword header promised {expected}")]
    VocabSizeMismatch { expected: usize, actual: usize },
    #[error("duplicate vocabulary term: {0:?}")]
    DuplicateTerm(String),
    #[error("target size must be positive")]
    EmptyTargetSize,
    #[error("target size {target} exceeds vocabulary size {vocab}")]
    TargetTooLarge { target: usize, vocab: usize },
    #[error("operation left the corpus empty")]
    EmptyCorpus,
    #[error("infeasible synthetic spec: {0}")]
    InfeasibleSpec(String),
}

/// Ordered, duplicate-free list of terms. Indices are stable for the
/// lifetime of the corpus holding it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
}

impl Vocabulary {
    pub fn new(terms: Vec<String>) -> Result<Self, CorpusError> {
        let mut seen = std::collections::HashSet::with_capacity(terms.len());
        for t in &terms {
            if !seen.insert(t.as_str()) {
                return Err(CorpusError::DuplicateTerm(t.clone()));
            }
        }
        Ok(Self { terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, index: usize) -> &str {
        &self.terms[index]
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }
}

/// Sparse word-document counts plus the vocabulary they index into.
///
/// Documents store `(word index, count)` pairs sorted by word index with all
/// counts strictly positive; `doc_lengths[m]` is the token total of document
/// `m`. Values are immutable once constructed.
#[derive(Debug, Clone, PartialEq)]
pub struct BagOfWords {
    vocab: Vocabulary,
    docs: Vec<Vec<(usize, u32)>>,
    doc_lengths: Vec<u64>,
}

impl BagOfWords {
    pub fn new(vocab: Vocabulary, docs: Vec<Vec<(usize, u32)>>) -> Result<Self, CorpusError> {
        if docs.is_empty() || vocab.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let n = vocab.len();
        let mut doc_lengths = Vec::with_capacity(docs.len());
        let mut docs_sorted = docs;
        for doc in &mut docs_sorted {
            doc.sort_by_key(|&(w, _)| w);
            let mut length = 0u64;
            let mut prev: Option<usize> = None;
            for &(w, c) in doc.iter() {
                assert!(w < n, "word index {w} out of range");
                assert!(c > 0, "stored counts must be positive");
                assert!(prev != Some(w), "duplicate word entry in document");
                prev = Some(w);
                length += c as u64;
            }
            doc_lengths.push(length);
        }
        Ok(Self {
            vocab,
            docs: docs_sorted,
            doc_lengths,
        })
    }

    pub fn num_words(&self) -> usize {
        self.vocab.len()
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn docs(&self) -> &[Vec<(usize, u32)>] {
        &self.docs
    }

    pub fn doc_lengths(&self) -> &[u64] {
        &self.doc_lengths
    }
}

/// Parameters for a synthetic corpus with one planted anchor word per topic.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub vocab_size: usize,
    pub topics: usize,
    pub docs: usize,
    pub doc_length: usize,
    /// Symmetric Dirichlet concentration for per-document topic proportions.
    pub dirichlet_doc: f64,
    /// Probability mass each planted anchor carries inside its own topic.
    pub anchor_mass: f64,
    pub seed: u64,
}

/// Reads the UCI bag-of-words format: three integer header lines D, W, NNZ
/// followed by NNZ `docID wordID count` triples with 1-based ids, plus a
/// vocabulary stream of exactly W terms, one per line.
///
/// Duplicate (doc, word) triples aggregate. Documents that never appear in a
/// triple come back empty.
pub fn load_uci(
    docword: impl BufRead,
    vocab: impl BufRead,
) -> Result<BagOfWords, CorpusError> {
    let mut lines = docword.lines();
    let mut header = [0u64; 3];
    for (slot, name) in header.iter_mut().zip(["D", "W", "NNZ"]) {
        let line = lines
            .next()
            .ok_or_else(|| CorpusError::MalformedHeader(format!("missing {name} line")))??;
        *slot = line
            .trim()
            .parse::<u64>()
            .map_err(|_| CorpusError::MalformedHeader(format!("bad {name} line: {line:?}")))?;
    }
    let [d, w, nnz] = header;
    if d == 0 || w == 0 {
        return Err(CorpusError::MalformedHeader(format!(
            "degenerate dimensions D = {d}, W = {w}"
        )));
    }

    let mut docs: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); d as usize];
    let mut read = 0u64;
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 4;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if read == nnz {
            return Err(CorpusError::MalformedTriple {
                line: line_no,
                detail: format!("extra data past {nnz} promised triples"),
            });
        }
        let mut it = trimmed.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<i64, CorpusError> {
            tok.and_then(|t| t.parse::<i64>().ok())
                .ok_or(CorpusError::MalformedTriple {
                    line: line_no,
                    detail: trimmed.to_string(),
                })
        };
        let doc_id = parse(it.next())?;
        let word_id = parse(it.next())?;
        let count = parse(it.next())?;
        if it.next().is_some() {
            return Err(CorpusError::MalformedTriple {
                line: line_no,
                detail: format!("trailing tokens in {trimmed:?}"),
            });
        }
        if count <= 0 {
            return Err(CorpusError::NonPositiveCount {
                line: line_no,
                count,
            });
        }
        if doc_id < 1 || doc_id as u64 > d || word_id < 1 || word_id as u64 > w {
            return Err(CorpusError::IdOutOfRange {
                line: line_no,
                doc: doc_id.max(0) as u64,
                word: word_id.max(0) as u64,
                docs: d,
                words: w,
            });
        }
        *docs[(doc_id - 1) as usize]
            .entry((word_id - 1) as usize)
            .or_insert(0) += count as u64;
        read += 1;
    }
    if read != nnz {
        return Err(CorpusError::MalformedHeader(format!(
            "header promised {nnz} triples, found {read}"
        )));
    }

    let mut terms = Vec::with_capacity(w as usize);
    for line in vocab.lines() {
        let term = line?;
        terms.push(term.trim_end_matches(['\r', '\n']).to_string());
    }
    if terms.len() != w as usize {
        return Err(CorpusError::VocabSizeMismatch {
            expected: w as usize,
            actual: terms.len(),
        });
    }

    let docs = docs
        .into_iter()
        .map(|m| m.into_iter().map(|(w, c)| (w, c as u32)).collect())
        .collect();
    BagOfWords::new(Vocabulary::new(terms)?, docs)
}

/// Keeps the `target_size` terms with the highest tf-idf score, where tf is
/// the total corpus count and idf is `ln(M / document frequency)`. Ties break
/// to the lower original index. Documents emptied by the cut are dropped.
pub fn curate_vocabulary(
    corpus: &BagOfWords,
    target_size: usize,
) -> Result<BagOfWords, CorpusError> {
    if target_size == 0 {
        return Err(CorpusError::EmptyTargetSize);
    }
    let n = corpus.num_words();
    if target_size > n {
        return Err(CorpusError::TargetTooLarge {
            target: target_size,
            vocab: n,
        });
    }
    let m = corpus.num_docs() as f64;
    let mut tf = vec![0u64; n];
    let mut df = vec![0u64; n];
    for doc in corpus.docs() {
        for &(w, c) in doc {
            tf[w] += c as u64;
            df[w] += 1;
        }
    }
    let score = |w: usize| -> f64 {
        if df[w] == 0 {
            0.0
        } else {
            tf[w] as f64 * (m / df[w] as f64).ln()
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        score(b)
            .partial_cmp(&score(a))
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut keep = order[..target_size].to_vec();
    keep.sort_unstable();

    let mut remap = vec![usize::MAX; n];
    let mut terms = Vec::with_capacity(target_size);
    for (new_idx, &old_idx) in keep.iter().enumerate() {
        remap[old_idx] = new_idx;
        terms.push(corpus.vocab().term(old_idx).to_string());
    }

    let mut docs = Vec::new();
    for doc in corpus.docs() {
        let filtered: Vec<(usize, u32)> = doc
            .iter()
            .filter_map(|&(w, c)| (remap[w] != usize::MAX).then(|| (remap[w], c)))
            .collect();
        if !filtered.is_empty() {
            docs.push(filtered);
        }
    }
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    BagOfWords::new(Vocabulary::new(terms)?, docs)
}

/// Drops every document with fewer than two tokens; such documents make the
/// co-occurrence estimator's `n (n - 1)` denominator vanish.
pub fn filter_short_documents(corpus: &BagOfWords) -> Result<BagOfWords, CorpusError> {
    let docs: Vec<Vec<(usize, u32)>> = corpus
        .docs()
        .iter()
        .zip(corpus.doc_lengths())
        .filter(|(_, &len)| len >= 2)
        .map(|(doc, _)| doc.clone())
        .collect();
    if docs.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    BagOfWords::new(corpus.vocab().clone(), docs)
}

/// Samples a corpus from a planted topic model: word `k` is the unique
/// anchor of topic `k` (for `k < K`), per-document proportions are symmetric
/// Dirichlet, and tokens are drawn topic-then-word. Returns the corpus
/// together with the ground truth, whose correlation matrix is the empirical
/// second moment of the sampled proportions. Deterministic given the seed.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
) -> Result<(BagOfWords, TopicModel), CorpusError> {
    let n = spec.vocab_size;
    let k = spec.topics;
    let m = spec.docs;
    if k == 0 || n == 0 || m == 0 {
        return Err(CorpusError::InfeasibleSpec("zero-sized dimension".into()));
    }
    if k > n {
        return Err(CorpusError::InfeasibleSpec(format!(
            "topics {k} exceed vocabulary {n}"
        )));
    }
    if spec.doc_length < 2 {
        return Err(CorpusError::InfeasibleSpec(
            "doc_length must be at least 2".into(),
        ));
    }
    if !(spec.anchor_mass > 0.0 && spec.anchor_mass <= 1.0) {
        return Err(CorpusError::InfeasibleSpec(format!(
            "anchor_mass {} outside (0, 1]",
            spec.anchor_mass
        )));
    }
    if spec.anchor_mass == 1.0 && n > k {
        return Err(CorpusError::InfeasibleSpec(
            "anchor_mass = 1 leaves non-anchor words with zero mass".into(),
        ));
    }
    if n == k && spec.anchor_mass < 1.0 {
        return Err(CorpusError::InfeasibleSpec(
            "no non-anchor words to receive the residual mass".into(),
        ));
    }
    if !(spec.dirichlet_doc > 0.0) {
        return Err(CorpusError::InfeasibleSpec(
            "dirichlet_doc must be positive".into(),
        ));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);

    // ground-truth word-topic matrix: anchors on the leading diagonal block,
    // the residual mass spread over non-anchor words
    let mut word_topic = Array2::<f64>::zeros((n, k));
    for topic in 0..k {
        word_topic[[topic, topic]] = spec.anchor_mass;
        if n > k {
            // Exp(1) weights normalized to the residual mass
            let mut weights: Vec<f64> = (k..n)
                .map(|_| -(1.0 - rng.random_range(0.0f64..1.0)).ln())
                .collect();
            let total: f64 = weights.iter().sum();
            let residual = 1.0 - spec.anchor_mass;
            for w in &mut weights {
                *w = *w / total * residual;
            }
            // renormalize once more so the column sums to one to roundoff
            let col_sum: f64 = spec.anchor_mass + weights.iter().sum::<f64>();
            for (i, w) in weights.iter().enumerate() {
                word_topic[[k + i, topic]] = w / col_sum;
            }
            word_topic[[topic, topic]] = spec.anchor_mass / col_sum;
        }
    }

    // per-topic cumulative distributions for token sampling
    let mut word_cdf = Array2::<f64>::zeros((n, k));
    for topic in 0..k {
        let mut acc = 0.0;
        for word in 0..n {
            acc += word_topic[[word, topic]];
            word_cdf[[word, topic]] = acc;
        }
    }

    let gamma = Gamma::new(spec.dirichlet_doc, 1.0)
        .map_err(|e| CorpusError::InfeasibleSpec(e.to_string()))?;
    let mut correlation = Array2::<f64>::zeros((k, k));
    let mut docs: Vec<Vec<(usize, u32)>> = Vec::with_capacity(m);

    for _ in 0..m {
        // symmetric Dirichlet draw via normalized gamma variates
        let mut theta: Vec<f64> = (0..k).map(|_| gamma.sample(&mut rng).max(1e-300)).collect();
        let total: f64 = theta.iter().sum();
        for t in &mut theta {
            *t /= total;
        }
        for a in 0..k {
            for b in 0..k {
                correlation[[a, b]] += theta[a] * theta[b];
            }
        }
        let mut theta_cdf = theta.clone();
        for i in 1..k {
            theta_cdf[i] += theta_cdf[i - 1];
        }

        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for _ in 0..spec.doc_length {
            let uz: f64 = rng.random_range(0.0..1.0);
            let topic = theta_cdf.partition_point(|&c| c < uz).min(k - 1);
            let uw: f64 = rng.random_range(0.0..1.0);
            let col = word_cdf.column(topic);
            let word = col
                .as_slice()
                .map(|s| s.partition_point(|&c| c < uw))
                .unwrap_or_else(|| col.iter().take_while(|&&c| c < uw).count())
                .min(n - 1);
            *counts.entry(word).or_insert(0) += 1;
        }
        docs.push(counts.into_iter().collect());
    }
    correlation.mapv_inplace(|v| v / m as f64);

    let topic_marginal = correlation.dot(&Array1::from_elem(k, 1.0));
    let word_marginal = word_topic.dot(&topic_marginal);
    let mut responsibility = Array2::<f64>::zeros((n, k));
    for word in 0..n {
        let d_i = word_marginal[word];
        if d_i > 0.0 {
            for topic in 0..k {
                responsibility[[word, topic]] =
                    word_topic[[word, topic]] * topic_marginal[topic] / d_i;
            }
        } else {
            responsibility.row_mut(word).fill(1.0 / k as f64);
        }
    }

    let terms: Vec<String> = (0..n).map(|i| format!("w{i:05}")).collect();
    let corpus = BagOfWords::new(Vocabulary::new(terms)?, docs)?;
    let model = TopicModel {
        anchors: PivotSet {
            indices: (0..k).collect(),
        },
        word_topic,
        responsibility,
        correlation,
        word_marginal,
        degenerate_rows: vec![],
    };
    Ok((corpus, model))
}
