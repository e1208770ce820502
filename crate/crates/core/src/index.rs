//! Vocabulary, corpus statistics and sparse weighted vectors.
//!
//! Document vectors carry BM25 weights
//!
//! ```text
//! w(t, d) = idf(t) · tf·(k1 + 1) / (tf + k1·(1 − b + b·|d| / avgdl))
//! idf(t)  = ln(1 + (N − df + 0.5) / (df + 0.5))
//! ```
//!
//! The idf is strictly positive for every `df ≤ N`, so every stored weight is
//! positive and element-wise maxima of vectors stay meaningful. TF-IDF vectors
//! (`tf · ln(N / df)`) are built lazily for the baseline ranker.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::ids::{QuestionId, StatementId};
use crate::ranking::{RankedItem, Ranking};
use crate::textpipe::TokenList;
use crate::tsv::write_file;

pub type TermId = u32;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    term_to_id: HashMap<String, TermId>,
    id_to_term: Vec<String>,
}

impl Vocabulary {
    fn intern(&mut self, term: &str) -> TermId {
        if let Some(&id) = self.term_to_id.get(term) {
            return id;
        }
        let id = self.id_to_term.len() as TermId;
        self.term_to_id.insert(term.to_owned(), id);
        self.id_to_term.push(term.to_owned());
        id
    }

    pub fn id(&self, term: &str) -> Option<TermId> {
        self.term_to_id.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> Option<&str> {
        self.id_to_term.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.id_to_term.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_term.is_empty()
    }
}

/// Sorted `(term, weight)` pairs with positive weights and a cached norm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(TermId, f64)>,
    norm: f64,
}

impl SparseVector {
    /// Builds a vector from pairs in any order. Duplicate terms keep the
    /// largest weight; non-positive and non-finite weights are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (TermId, f64)>) -> Self {
        let mut entries: Vec<(TermId, f64)> = pairs.into_iter().filter(|&(_, w)| w > 0.0 && w.is_finite()).collect();
        entries.sort_by_key(|&(t, _)| t);
        entries.dedup_by(|later, kept| {
            if later.0 == kept.0 {
                kept.1 = kept.1.max(later.1);
                true
            } else {
                false
            }
        });
        Self::from_sorted(entries)
    }

    fn from_sorted(entries: Vec<(TermId, f64)>) -> Self {
        let norm = entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        Self { entries, norm }
    }

    pub fn entries(&self) -> &[(TermId, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, term: TermId) -> f64 {
        self.entries
            .binary_search_by_key(&term, |&(t, _)| t)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_pairs(self.entries.iter().map(|&(t, w)| (t, w * factor)))
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    /// Element-wise maximum of `self` and `scale · other`.
    pub fn max_merge(&self, other: &SparseVector, scale: f64) -> Self {
        let scaled = other.entries.iter().map(|&(t, w)| (t, w * scale));
        Self::from_pairs(self.entries.iter().copied().chain(scaled))
    }
}

/// Cosine similarity; 0 when either vector is empty.
pub fn cosine(a: &SparseVector, b: &SparseVector) -> f64 {
    if a.norm == 0.0 || b.norm == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (a.norm * b.norm)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize, serde::Serialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.5, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && self.k1.is_finite()) {
            return Err(Error::InvalidParam(format!("k1 must be > 0, got {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParam(format!("b must be in [0, 1], got {}", self.b)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    Bm25,
    Tfidf,
}

#[derive(Debug)]
pub struct CorpusIndex {
    vocab: Vocabulary,
    doc_freq: Vec<u32>,
    doc_count: usize,
    avg_doc_len: f64,
    doc_lengths: Vec<usize>,
    doc_ids: Vec<StatementId>,
    /// Position of each document in statement-id order, for tie-breaking.
    id_order: Vec<u32>,
    term_counts: Vec<Vec<(TermId, u32)>>,
    doc_vectors: Vec<SparseVector>,
    tfidf_vectors: OnceLock<Vec<SparseVector>>,
    params: Bm25Params,
}

fn count_terms(tokens: &TokenList, mut lookup: impl FnMut(&str) -> Option<TermId>) -> Vec<(TermId, u32)> {
    let mut counts: HashMap<TermId, u32> = HashMap::new();
    for t in tokens.tokens() {
        if let Some(id) = lookup(t) {
            *counts.entry(id).or_default() += 1;
        }
    }
    let mut counts: Vec<_> = counts.into_iter().collect();
    counts.sort_unstable();
    counts
}

/// Builds the index over `(id, tokens)` documents in the given order.
pub fn build_index(docs: &[(StatementId, TokenList)], params: Bm25Params) -> Result<CorpusIndex> {
    params.validate()?;
    if docs.is_empty() || docs.iter().all(|(_, t)| t.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    let mut vocab = Vocabulary::default();
    let term_counts: Vec<Vec<(TermId, u32)>> = docs
        .iter()
        .map(|(_, tokens)| count_terms(tokens, |t| Some(vocab.intern(t))))
        .collect();
    let mut doc_freq = vec![0u32; vocab.len()];
    for counts in &term_counts {
        for &(t, _) in counts {
            doc_freq[t as usize] += 1;
        }
    }
    let doc_lengths: Vec<usize> = docs.iter().map(|(_, t)| t.len()).collect();
    let doc_count = docs.len();
    let avg_doc_len = doc_lengths.iter().sum::<usize>() as f64 / doc_count as f64;

    let mut by_id: Vec<usize> = (0..doc_count).collect();
    by_id.sort_by(|&a, &b| docs[a].0.cmp(&docs[b].0));
    let mut id_order = vec![0u32; doc_count];
    for (rank, &doc) in by_id.iter().enumerate() {
        id_order[doc] = rank as u32;
    }

    let mut index = CorpusIndex {
        vocab,
        doc_freq,
        doc_count,
        avg_doc_len,
        doc_lengths,
        doc_ids: docs.iter().map(|(id, _)| id.clone()).collect(),
        id_order,
        term_counts,
        doc_vectors: Vec::new(),
        tfidf_vectors: OnceLock::new(),
        params,
    };
    index.doc_vectors = (0..doc_count)
        .map(|d| index.bm25_vector(&index.term_counts[d], index.doc_lengths[d]))
        .collect();
    Ok(index)
}

impl CorpusIndex {
    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn doc_freq(&self, term: TermId) -> u32 {
        self.doc_freq[term as usize]
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn doc_lengths(&self) -> &[usize] {
        &self.doc_lengths
    }

    pub fn doc_ids(&self) -> &[StatementId] {
        &self.doc_ids
    }

    pub fn doc_vectors(&self) -> &[SparseVector] {
        &self.doc_vectors
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub(crate) fn id_order(&self, doc: usize) -> u32 {
        self.id_order[doc]
    }

    pub fn idf(&self, term: TermId) -> f64 {
        let n = self.doc_count as f64;
        let df = self.doc_freq[term as usize] as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    fn bm25_vector(&self, counts: &[(TermId, u32)], len: usize) -> SparseVector {
        let Bm25Params { k1, b } = self.params;
        let norm_len = if self.avg_doc_len > 0.0 {
            len as f64 / self.avg_doc_len
        } else {
            0.0
        };
        SparseVector::from_pairs(counts.iter().map(|&(t, tf)| {
            let tf = tf as f64;
            (t, self.idf(t) * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm_len)))
        }))
    }

    fn tfidf_vector(&self, counts: &[(TermId, u32)]) -> SparseVector {
        let n = self.doc_count as f64;
        SparseVector::from_pairs(
            counts
                .iter()
                .map(|&(t, tf)| (t, tf as f64 * (n / self.doc_freq[t as usize] as f64).ln())),
        )
    }

    pub fn tfidf_vectors(&self) -> &[SparseVector] {
        self.tfidf_vectors
            .get_or_init(|| self.term_counts.iter().map(|c| self.tfidf_vector(c)).collect())
    }

    pub fn vectors(&self, weighting: Weighting) -> &[SparseVector] {
        match weighting {
            Weighting::Bm25 => &self.doc_vectors,
            Weighting::Tfidf => self.tfidf_vectors(),
        }
    }

    /// Writes a plain-text dump: corpus statistics, the vocabulary with
    /// document frequencies, then one line per document vector.
    pub fn dump(&self, path: &Path) -> Result<()> {
        write_file(path, |w| {
            writeln!(w, "doc_count={}", self.doc_count)?;
            writeln!(w, "vocab_size={}", self.vocab.len())?;
            writeln!(w, "avg_doc_len={:.6}", self.avg_doc_len)?;
            writeln!(w, "k1={} b={}", self.params.k1, self.params.b)?;
            writeln!(w, "# term_id\tterm\tdoc_freq")?;
            for (id, term) in self.vocab.id_to_term.iter().enumerate() {
                writeln!(w, "{id}\t{term}\t{}", self.doc_freq[id])?;
            }
            writeln!(w, "# statement_id\tlength\tterm_id:weight ...")?;
            for (d, v) in self.doc_vectors.iter().enumerate() {
                write!(w, "{}\t{}", self.doc_ids[d], self.doc_lengths[d])?;
                for (t, wt) in v.entries() {
                    write!(w, "\t{t}:{wt:.6}")?;
                }
                writeln!(w)?;
            }
            Ok(())
        })
    }
}

/// Vector for a query in the document space; out-of-vocabulary tokens are dropped.
///
/// BM25 weighting applies the document formula with the query's own token count
/// as its length.
pub fn query_vector(tokens: &TokenList, index: &CorpusIndex, weighting: Weighting) -> SparseVector {
    let counts = count_terms(tokens, |t| index.vocab.id(t));
    match weighting {
        Weighting::Bm25 => index.bm25_vector(&counts, tokens.len()),
        Weighting::Tfidf => index.tfidf_vector(&counts),
    }
}

/// Orders `(doc, similarity)` by similarity descending, then statement id ascending.
pub(crate) fn by_similarity(index: &CorpusIndex) -> impl Fn(&(usize, f64), &(usize, f64)) -> Ordering + '_ {
    move |a, b| b.1.total_cmp(&a.1).then(index.id_order(a.0).cmp(&index.id_order(b.0)))
}

/// Top-`k` documents by cosine against `vectors`, ties by statement id.
pub(crate) fn rank_by_cosine(
    query: &SparseVector,
    index: &CorpusIndex,
    weighting: Weighting,
    k: usize,
) -> Vec<(usize, f64)> {
    let mut scored: Vec<(usize, f64)> = index
        .vectors(weighting)
        .iter()
        .enumerate()
        .map(|(d, v)| (d, cosine(query, v)))
        .collect();
    let cmp = by_similarity(index);
    let k = k.min(scored.len());
    if k < scored.len() {
        scored.select_nth_unstable_by(k, &cmp);
        scored.truncate(k);
    }
    scored.sort_by(&cmp);
    scored
}

fn to_ranking(question_id: QuestionId, index: &CorpusIndex, scored: Vec<(usize, f64)>) -> Ranking {
    Ranking::new(
        question_id,
        scored
            .into_iter()
            .map(|(d, s)| RankedItem::new(index.doc_ids[d].clone(), Some(s)))
            .collect(),
    )
}

/// Baseline: top-`k` statements by TF-IDF cosine.
pub fn tfidf_rank(question_id: QuestionId, query: &SparseVector, index: &CorpusIndex, k: usize) -> Result<Ranking> {
    if k == 0 {
        return Err(Error::InvalidParam("K must be positive".into()));
    }
    Ok(to_ranking(
        question_id,
        index,
        rank_by_cosine(query, index, Weighting::Tfidf, k),
    ))
}

/// Single-shot top-`k` statements by BM25 cosine.
pub fn bm25_rank(question_id: QuestionId, query: &SparseVector, index: &CorpusIndex, k: usize) -> Result<Ranking> {
    if k == 0 {
        return Err(Error::InvalidParam("K must be positive".into()));
    }
    Ok(to_ranking(
        question_id,
        index,
        rank_by_cosine(query, index, Weighting::Bm25, k),
    ))
}
