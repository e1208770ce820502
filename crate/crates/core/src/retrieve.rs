//! Iterative BM25 retrieval and its grid tuner.
//!
//! Each round scores every statement still in the pool by cosine against the
//! current query, moves the best `n` of them to the output, and max-merges
//! their down-scaled vectors into the query:
//!
//! ```text
//! agg = max(v_c for c in selected)        element-wise
//! q   = max(q, downscale · agg)           element-wise
//! n   = ceil(n · growth)
//! ```
//!
//! The output order is selection order. Rounds run until the pool is empty;
//! since later rounds only append, the loop stops as soon as `k` statements
//! have been emitted.

use std::collections::HashMap;

use crate::corpus::{question_query_text, Corpus, QueryMode, Question, RatingTable};
use crate::error::{Error, Result};
use crate::ids::{QuestionId, StatementId};
use crate::index::{
    build_index, by_similarity, query_vector, Bm25Params, CorpusIndex, SparseVector, TermId, Weighting,
};
use crate::ranking::{RankedItem, Ranking};
use crate::textpipe::{preprocess, PreprocessConfig, TokenList};

#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize, serde::Serialize)]
pub struct IbmParams {
    /// Statements selected in the first round.
    pub n0: usize,
    /// Multiplier applied to the selection size after each round.
    pub growth: f64,
    /// Factor applied to the aggregated vector before it is merged into the query.
    pub downscale: f64,
    /// Length of the returned candidate list.
    pub k: usize,
    pub query_mode: QueryMode,
    pub bm25: Bm25Params,
}

impl Default for IbmParams {
    fn default() -> Self {
        Self {
            n0: 16,
            growth: 2.0,
            downscale: 0.5,
            k: 200,
            query_mode: QueryMode::CorrectAnswerOnly,
            bm25: Bm25Params::default(),
        }
    }
}

impl IbmParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParam(m));
        if self.n0 == 0 {
            return fail("n0 must be positive".into());
        }
        if self.k == 0 {
            return fail("k must be positive".into());
        }
        if self.k < self.n0 {
            return fail(format!("k ({}) must be >= n0 ({})", self.k, self.n0));
        }
        if !(self.growth >= 1.0 && self.growth.is_finite()) {
            return fail(format!("growth must be >= 1, got {}", self.growth));
        }
        if !(0.0..=1.0).contains(&self.downscale) {
            return fail(format!("downscale must be in [0, 1], got {}", self.downscale));
        }
        self.bm25.validate()
    }
}

/// Query held as a dense array so that scoring a document costs O(|doc|).
struct DenseQuery {
    weights: Vec<f64>,
    support: Vec<TermId>,
    norm: f64,
}

impl DenseQuery {
    fn new(query: &SparseVector, vocab_len: usize) -> Self {
        let mut weights = vec![0.0; vocab_len];
        for &(t, w) in query.entries() {
            weights[t as usize] = w;
        }
        Self {
            weights,
            support: query.entries().iter().map(|&(t, _)| t).collect(),
            norm: query.norm(),
        }
    }

    /// Same value as [`crate::index::cosine`] against the sparse form of this query.
    fn cosine(&self, v: &SparseVector) -> f64 {
        if self.norm == 0.0 || v.norm() == 0.0 {
            return 0.0;
        }
        let dot: f64 = v.entries().iter().map(|&(t, w)| self.weights[t as usize] * w).sum();
        (dot / (self.norm * v.norm())).clamp(0.0, 1.0)
    }

    fn max_merge(&mut self, v: &SparseVector, scale: f64) {
        for &(t, w) in v.entries() {
            let scaled = w * scale;
            let slot = &mut self.weights[t as usize];
            if scaled > *slot {
                if *slot == 0.0 {
                    self.support.push(t);
                }
                *slot = scaled;
            }
        }
    }

    fn sparse(&self) -> SparseVector {
        SparseVector::from_pairs(self.support.iter().map(|&t| (t, self.weights[t as usize])))
    }

    fn refresh_norm(&mut self) {
        self.norm = self.sparse().norm();
    }
}

/// Per-round trace, exposed for inspection and tests.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrace {
    pub selected: Vec<usize>,
    pub query: SparseVector,
}

/// Runs iterative retrieval from an already-built query vector.
///
/// The index carries its own BM25 parameters; `p.bm25` is only used by the
/// callers that build the index.
pub fn ibm25_from_query(
    question_id: QuestionId,
    query: &SparseVector,
    index: &CorpusIndex,
    p: &IbmParams,
) -> Result<Ranking> {
    ibm25_traced(question_id, query, index, p, |_| {})
}

pub fn ibm25_traced(
    question_id: QuestionId,
    query: &SparseVector,
    index: &CorpusIndex,
    p: &IbmParams,
    mut on_round: impl FnMut(RoundTrace),
) -> Result<Ranking> {
    p.validate()?;
    let n_docs = index.doc_count();
    if n_docs == 0 {
        return Err(Error::EmptyCorpus);
    }
    let vectors = index.doc_vectors();
    let cmp = by_similarity(index);
    let limit = p.k.min(n_docs);

    let mut q = DenseQuery::new(query, index.vocab().len());
    let mut pool: Vec<usize> = (0..n_docs).collect();
    let mut taken = vec![false; n_docs];
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(limit);
    let mut n = p.n0;
    while !pool.is_empty() && out.len() < limit {
        let mut scored: Vec<(usize, f64)> = pool.iter().map(|&d| (d, q.cosine(&vectors[d]))).collect();
        let take = n.min(scored.len());
        if take < scored.len() {
            scored.select_nth_unstable_by(take, &cmp);
            scored.truncate(take);
        }
        scored.sort_by(&cmp);

        for &(d, _) in &scored {
            q.max_merge(&vectors[d], p.downscale);
            taken[d] = true;
        }
        q.refresh_norm();
        on_round(RoundTrace {
            selected: scored.iter().map(|&(d, _)| d).collect(),
            query: q.sparse(),
        });
        out.extend(scored);
        pool.retain(|&d| !taken[d]);
        n = ((n as f64 * p.growth).ceil() as usize).max(n);
    }
    out.truncate(p.k);
    Ok(Ranking::new(
        question_id,
        out.into_iter()
            .map(|(d, s)| RankedItem::new(index.doc_ids()[d].clone(), Some(s)))
            .collect(),
    ))
}

/// Preprocesses every statement of the corpus, in corpus order.
pub fn tokenize_corpus(corpus: &Corpus, cfg: &PreprocessConfig) -> Vec<(StatementId, TokenList)> {
    corpus
        .statements()
        .iter()
        .map(|s| (s.id.clone(), preprocess(&s.text, cfg)))
        .collect()
}

/// Retrieval methods over one index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Iterative BM25.
    Ibm25,
    /// Single-shot BM25 cosine.
    Bm25,
    /// Single-shot TF-IDF cosine.
    Tfidf,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ibm25" => Ok(Method::Ibm25),
            "bm25" => Ok(Method::Bm25),
            "tfidf" => Ok(Method::Tfidf),
            other => Err(Error::InvalidParam(format!("unknown retrieval method {other:?}"))),
        }
    }
}

pub struct Retriever<'a> {
    pub index: &'a CorpusIndex,
    pub preprocess: &'a PreprocessConfig,
}

impl Retriever<'_> {
    pub fn query_tokens(&self, q: &Question, mode: QueryMode) -> TokenList {
        preprocess(&question_query_text(q, mode), self.preprocess)
    }

    pub fn retrieve(&self, q: &Question, method: Method, p: &IbmParams) -> Result<Ranking> {
        let tokens = self.query_tokens(q, p.query_mode);
        match method {
            Method::Ibm25 => {
                let query = query_vector(&tokens, self.index, Weighting::Bm25);
                ibm25_from_query(q.id.clone(), &query, self.index, p)
            }
            Method::Bm25 => {
                let query = query_vector(&tokens, self.index, Weighting::Bm25);
                crate::index::bm25_rank(q.id.clone(), &query, self.index, p.k)
            }
            Method::Tfidf => {
                let query = query_vector(&tokens, self.index, Weighting::Tfidf);
                crate::index::tfidf_rank(q.id.clone(), &query, self.index, p.k)
            }
        }
    }

    /// Retrieves for every question on a pool of `threads` workers (`None`:
    /// available parallelism). Output order follows `questions`.
    pub fn retrieve_all(
        &self,
        questions: &[Question],
        method: Method,
        p: &IbmParams,
        threads: Option<usize>,
    ) -> Result<Vec<Ranking>> {
        p.validate()?;
        if matches!(method, Method::Tfidf) {
            // build the lazy vectors once, outside the workers
            self.index.tfidf_vectors();
        }
        par_map(questions, threads, |q| self.retrieve(q, method, p))
    }
}

pub(crate) fn par_map<T, U, F>(items: &[T], threads: Option<usize>, f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(f).collect())
}

/// Mean over rating categories `r >= 1` of the per-question recall of
/// `r`-rated statements within the first `k` items, averaged over the
/// questions that have at least one `r`-rated statement.
///
/// Questions without a ranking count as retrieving nothing. Returns `None`
/// when no question has a positively rated statement.
pub fn category_recall(rankings: &[Ranking], ratings: &RatingTable, questions: &[QuestionId], k: usize) -> Option<f64> {
    let by_question: HashMap<&str, &Ranking> = rankings.iter().map(|r| (r.question_id.as_str(), r)).collect();
    // category -> (sum of per-question recalls, question count)
    let mut per_category: std::collections::BTreeMap<u32, (f64, usize)> = Default::default();
    for q in questions {
        let Some(rated) = ratings.for_question(q.as_str()) else {
            continue;
        };
        let top: std::collections::HashSet<&str> = by_question
            .get(q.as_str())
            .map(|r| r.items.iter().take(k).map(|i| i.statement_id.as_str()).collect())
            .unwrap_or_default();
        let mut counts: HashMap<u32, (usize, usize)> = HashMap::new();
        for (s, &r) in rated {
            if r == 0 {
                continue;
            }
            let c = counts.entry(r).or_default();
            c.1 += 1;
            if top.contains(s.as_str()) {
                c.0 += 1;
            }
        }
        for (r, (hit, total)) in counts {
            let slot = per_category.entry(r).or_default();
            slot.0 += hit as f64 / total as f64;
            slot.1 += 1;
        }
    }
    if per_category.is_empty() {
        return None;
    }
    let sum: f64 = per_category.values().map(|&(s, n)| s / n as f64).sum();
    Some(sum / per_category.len() as f64)
}

/// Cartesian parameter grid. Expansion order is `k1`, `b`, `query_mode`,
/// `n0`, `growth`, `downscale` (outermost first).
#[derive(Debug, Clone, PartialEq, serde::Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
pub struct TuneGrid {
    pub n0: Vec<usize>,
    pub growth: Vec<f64>,
    pub downscale: Vec<f64>,
    #[serde(default = "default_k1")]
    pub k1: Vec<f64>,
    #[serde(default = "default_b")]
    pub b: Vec<f64>,
    #[serde(default = "default_modes")]
    pub query_mode: Vec<QueryMode>,
    #[serde(default = "default_k")]
    pub k: usize,
}

fn default_k1() -> Vec<f64> {
    vec![Bm25Params::default().k1]
}
fn default_b() -> Vec<f64> {
    vec![Bm25Params::default().b]
}
fn default_modes() -> Vec<QueryMode> {
    vec![QueryMode::CorrectAnswerOnly]
}
fn default_k() -> usize {
    IbmParams::default().k
}

impl TuneGrid {
    pub fn expand(&self) -> Vec<IbmParams> {
        let mut out = Vec::new();
        for &k1 in &self.k1 {
            for &b in &self.b {
                for &query_mode in &self.query_mode {
                    for &n0 in &self.n0 {
                        for &growth in &self.growth {
                            for &downscale in &self.downscale {
                                out.push(IbmParams {
                                    n0,
                                    growth,
                                    downscale,
                                    k: self.k,
                                    query_mode,
                                    bm25: Bm25Params { k1, b },
                                });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneRow {
    pub params: IbmParams,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuneOutcome {
    pub best: IbmParams,
    pub report: Vec<TuneRow>,
}

/// Evaluates every grid point with [`category_recall`] at its `k` and returns
/// the best one; ties go to the earlier grid point.
///
/// An index is built once per distinct BM25 setting.
pub fn tune(
    grid: &[IbmParams],
    questions: &[Question],
    ratings: &RatingTable,
    docs: &[(StatementId, TokenList)],
    cfg: &PreprocessConfig,
    threads: Option<usize>,
) -> Result<TuneOutcome> {
    if grid.is_empty() {
        return Err(Error::InvalidParam("empty tuning grid".into()));
    }
    for p in grid {
        p.validate()?;
    }
    let ids: Vec<QuestionId> = questions.iter().map(|q| q.id.clone()).collect();
    let has_rated = ids
        .iter()
        .filter_map(|q| ratings.for_question(q.as_str()))
        .any(|m| m.values().any(|&r| r > 0));
    if !has_rated {
        return Err(Error::NoRatedStatements);
    }

    let mut indexes: Vec<(Bm25Params, CorpusIndex)> = Vec::new();
    let mut report = Vec::with_capacity(grid.len());
    for p in grid {
        let pos = match indexes.iter().position(|(b, _)| *b == p.bm25) {
            Some(i) => i,
            None => {
                indexes.push((p.bm25, build_index(docs, p.bm25)?));
                indexes.len() - 1
            }
        };
        let retriever = Retriever {
            index: &indexes[pos].1,
            preprocess: cfg,
        };
        let rankings = retriever.retrieve_all(questions, Method::Ibm25, p, threads)?;
        let objective = category_recall(&rankings, ratings, &ids, p.k).ok_or(Error::NoRatedStatements)?;
        report.push(TuneRow { params: *p, objective });
    }
    let best = report
        .iter()
        .fold(
            &report[0],
            |best, row| if row.objective > best.objective { row } else { best },
        )
        .params;
    Ok(TuneOutcome { best, report })
}
