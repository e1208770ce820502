//! Ranked statement lists and the run file format.
//!
//! A run file (the candidate export read by re-rankers and the ensembler) is
//! tab-separated with the header `question_id\trank\tstatement_id\tscore`.
//! Ranks are 0-based, one contiguous block per question, questions in output
//! order. Scores are written with six decimals; an empty score field means the
//! ranking carried no score.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ids::{QuestionId, StatementId};
use crate::tsv::{read_to_string, write_file};

pub const RUN_HEADER: &str = "question_id\trank\tstatement_id\tscore";

#[derive(Debug, Clone, PartialEq)]
pub struct RankedItem {
    pub statement_id: StatementId,
    pub score: Option<f64>,
}

impl RankedItem {
    pub fn new(statement_id: StatementId, score: Option<f64>) -> Self {
        Self { statement_id, score }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub question_id: QuestionId,
    pub items: Vec<RankedItem>,
}

impl Ranking {
    pub fn new(question_id: QuestionId, items: Vec<RankedItem>) -> Self {
        Self { question_id, items }
    }

    /// Ranking without scores.
    pub fn from_ids<S: Into<StatementId>>(
        question_id: impl Into<QuestionId>,
        ids: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            question_id: question_id.into(),
            items: ids.into_iter().map(|id| RankedItem::new(id.into(), None)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.statement_id.as_str()).collect()
    }

    pub fn truncated(mut self, k: usize) -> Self {
        self.items.truncate(k);
        self
    }

    /// Fails on the first statement id that occurs twice.
    pub fn check_unique(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.items.len());
        for item in &self.items {
            if !seen.insert(item.statement_id.as_str()) {
                return Err(Error::DuplicateRankedId {
                    question: self.question_id.clone(),
                    statement: item.statement_id.clone(),
                });
            }
        }
        Ok(())
    }
}

pub fn write_run(rankings: &[Ranking], path: &Path) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "{RUN_HEADER}")?;
        for r in rankings {
            for (rank, item) in r.items.iter().enumerate() {
                write!(w, "{}\t{rank}\t{}\t", r.question_id, item.statement_id)?;
                if let Some(s) = item.score {
                    write!(w, "{s:.6}")?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    })
}

/// Reads a run file. Rows of a question must be contiguous with ranks 0, 1, 2, ...
pub fn read_run(path: &Path) -> Result<Vec<Ranking>> {
    if !path.is_file() {
        return Err(Error::MissingPath(path.to_path_buf()));
    }
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, h)) if h == RUN_HEADER => {}
        _ => {
            return Err(Error::Structure {
                path: path.to_path_buf(),
                message: format!("expected header {RUN_HEADER:?}"),
            })
        }
    }
    let mut out: Vec<Ranking> = Vec::new();
    let mut finished: HashSet<QuestionId> = HashSet::new();
    for (line, raw) in lines {
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let [q, rank, s, score] = fields[..] else {
            return Err(Error::row(
                path,
                line,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        };
        let rank: usize = rank
            .parse()
            .map_err(|_| Error::row(path, line, format!("bad rank {rank:?}")))?;
        let score = match score.trim() {
            "" => None,
            v => Some(
                v.parse::<f64>()
                    .map_err(|_| Error::row(path, line, format!("bad score {v:?}")))?,
            ),
        };
        let continues = out.last().is_some_and(|r| r.question_id.as_str() == q);
        if !continues {
            if let Some(prev) = out.last() {
                finished.insert(prev.question_id.clone());
            }
            if finished.contains(q) {
                return Err(Error::row(path, line, format!("question {q} appears in two blocks")));
            }
            out.push(Ranking::new(QuestionId::new(q), Vec::new()));
        }
        let current = out.last_mut().expect("pushed above");
        if rank != current.items.len() {
            return Err(Error::row(
                path,
                line,
                format!("expected rank {} for question {q}, found {rank}", current.items.len()),
            ));
        }
        current.items.push(RankedItem::new(StatementId::new(s), score));
    }
    for r in &out {
        r.check_unique()?;
    }
    Ok(out)
}
