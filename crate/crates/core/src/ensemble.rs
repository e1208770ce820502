//! Score files from external re-rankers and linear rank aggregation.
//!
//! Every member ranking orders the same candidate list. The aggregate score of
//! a statement is `Σ_i w_i · rank_i` with 0-based ranks; lower is better. Ties
//! go to the higher mean member score, then to the smaller statement id.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ids::{QuestionId, StatementId};
use crate::ranking::{RankedItem, Ranking};
use crate::tsv::{read_to_string, write_file};

pub const SCORE_HEADER: &str = "question_id\tstatement_id\tscore";

/// Scores produced by one re-ranker.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreFile {
    pub source_label: String,
    entries: BTreeMap<QuestionId, HashMap<StatementId, f64>>,
}

impl ScoreFile {
    pub fn new(source_label: impl Into<String>) -> Self {
        Self {
            source_label: source_label.into(),
            entries: BTreeMap::new(),
        }
    }

    /// Returns false (and keeps the old value) when the pair already has a score.
    pub fn insert(&mut self, question: QuestionId, statement: StatementId, score: f64) -> bool {
        let slot = self.entries.entry(question).or_default();
        if slot.contains_key(&statement) {
            return false;
        }
        slot.insert(statement, score);
        true
    }

    pub fn get(&self, question: &str, statement: &str) -> Option<f64> {
        self.entries.get(question).and_then(|m| m.get(statement)).copied()
    }

    pub fn for_question(&self, question: &str) -> Option<&HashMap<StatementId, f64>> {
        self.entries.get(question)
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Reads a score file (header `question_id\tstatement_id\tscore`).
    /// The label defaults to the file stem.
    pub fn read(path: &Path) -> Result<ScoreFile> {
        if !path.is_file() {
            return Err(Error::MissingPath(path.to_path_buf()));
        }
        let text = read_to_string(path)?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut out = ScoreFile::new(label);
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        match lines.next() {
            Some((_, h)) if h == SCORE_HEADER => {}
            _ => {
                return Err(Error::Structure {
                    path: path.to_path_buf(),
                    message: format!("expected header {SCORE_HEADER:?}"),
                })
            }
        }
        for (line, raw) in lines {
            if raw.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            let [q, s, score] = fields[..] else {
                return Err(Error::row(
                    path,
                    line,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            };
            let score: f64 = score
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::row(path, line, format!("bad score {score:?}")))?;
            if !out.insert(QuestionId::new(q), StatementId::new(s), score) {
                return Err(Error::row(path, line, format!("second score for ({q}, {s})")));
            }
        }
        Ok(out)
    }

    /// Writes rows grouped by question id, statements in id order.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_file(path, |w| {
            writeln!(w, "{SCORE_HEADER}")?;
            for (q, m) in &self.entries {
                let mut rows: Vec<_> = m.iter().collect();
                rows.sort_by(|a, b| a.0.cmp(b.0));
                for (s, v) in rows {
                    writeln!(w, "{q}\t{s}\t{v}")?;
                }
            }
            Ok(())
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rescored {
    pub ranking: Ranking,
    /// Statements scored for this question that are not among the candidates.
    pub ignored: Vec<StatementId>,
}

/// Reorders `candidates` by score descending; ties keep candidate order.
pub fn score_to_ranking(candidates: &Ranking, scores: &ScoreFile) -> Result<Rescored> {
    candidates.check_unique()?;
    let q = candidates.question_id.as_str();
    let empty = HashMap::new();
    let for_q = scores.for_question(q).unwrap_or(&empty);
    let missing: Vec<StatementId> = candidates
        .items
        .iter()
        .filter(|i| !for_q.contains_key(&i.statement_id))
        .map(|i| i.statement_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingScores {
            question: candidates.question_id.clone(),
            missing,
        });
    }
    let candidate_ids: HashSet<&StatementId> = candidates.items.iter().map(|i| &i.statement_id).collect();
    let mut ignored: Vec<StatementId> = for_q.keys().filter(|s| !candidate_ids.contains(s)).cloned().collect();
    ignored.sort();

    let mut items: Vec<(usize, RankedItem)> = candidates
        .items
        .iter()
        .enumerate()
        .map(|(rank, i)| {
            (
                rank,
                RankedItem::new(i.statement_id.clone(), Some(for_q[&i.statement_id])),
            )
        })
        .collect();
    // stable sort keeps the candidate order among equal scores
    items.sort_by(|a, b| b.1.score.unwrap_or(0.0).total_cmp(&a.1.score.unwrap_or(0.0)));
    Ok(Rescored {
        ranking: Ranking::new(
            candidates.question_id.clone(),
            items.into_iter().map(|(_, i)| i).collect(),
        ),
        ignored,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub weights: Vec<f64>,
}

impl EnsembleSpec {
    pub fn uniform(members: usize) -> Self {
        Self {
            weights: vec![1.0; members],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::InvalidParam("ensemble needs at least one member".into()));
        }
        if let Some(w) = self.weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidParam(format!(
                "ensemble weights must be finite and > 0, got {w}"
            )));
        }
        Ok(())
    }
}

/// Aggregates member rankings of one question by weighted rank sums.
///
/// The output score of a statement is its negated aggregate rank sum, so that
/// higher is better like every other score in the pipeline. A zero sum comes
/// out as `0`, not `-0`.
pub fn aggregate(rankings: &[Ranking], spec: &EnsembleSpec) -> Result<Ranking> {
    spec.validate()?;
    if rankings.len() != spec.weights.len() {
        return Err(Error::InvalidParam(format!(
            "{} rankings for {} ensemble weights",
            rankings.len(),
            spec.weights.len()
        )));
    }
    let first = &rankings[0];
    first.check_unique()?;
    let base: HashSet<&StatementId> = first.items.iter().map(|i| &i.statement_id).collect();
    for other in &rankings[1..] {
        other.check_unique()?;
        if other.question_id != first.question_id {
            return Err(Error::InvalidParam(format!(
                "cannot aggregate rankings of {} and {}",
                first.question_id, other.question_id
            )));
        }
        let ids: HashSet<&StatementId> = other.items.iter().map(|i| &i.statement_id).collect();
        if ids != base {
            let mut only_first: Vec<StatementId> = base.difference(&ids).map(|s| (*s).clone()).collect();
            let mut only_other: Vec<StatementId> = ids.difference(&base).map(|s| (*s).clone()).collect();
            only_first.sort();
            only_other.sort();
            return Err(Error::IdSetMismatch {
                question: first.question_id.clone(),
                only_first,
                only_other,
            });
        }
    }

    struct Acc {
        rank_sum: f64,
        score_sum: f64,
        scored: usize,
    }
    let mut acc: HashMap<&StatementId, Acc> = base
        .iter()
        .map(|&s| {
            (
                s,
                Acc {
                    rank_sum: 0.0,
                    score_sum: 0.0,
                    scored: 0,
                },
            )
        })
        .collect();
    for (ranking, &w) in rankings.iter().zip(&spec.weights) {
        for (rank, item) in ranking.items.iter().enumerate() {
            let a = acc.get_mut(&item.statement_id).expect("id sets checked");
            a.rank_sum += w * rank as f64;
            if let Some(s) = item.score {
                a.score_sum += s;
                a.scored += 1;
            }
        }
    }
    let mean_score = |a: &Acc| (a.scored > 0).then(|| a.score_sum / a.scored as f64);
    let mut order: Vec<(&StatementId, &Acc)> = acc.iter().map(|(s, a)| (*s, a)).collect();
    order.sort_by(|(sa, a), (sb, b)| {
        a.rank_sum
            .total_cmp(&b.rank_sum)
            .then_with(|| match (mean_score(a), mean_score(b)) {
                (Some(x), Some(y)) => y.total_cmp(&x),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
            .then_with(|| sa.cmp(sb))
    });
    Ok(Ranking::new(
        first.question_id.clone(),
        order
            .into_iter()
            .map(|(s, a)| RankedItem::new(s.clone(), Some(0.0 - a.rank_sum)))
            .collect(),
    ))
}

/// Writes `question_id\tstatement_id` lines, no header, rankings in the given
/// order and items in rank order.
pub fn write_submission(rankings: &[Ranking], path: &Path) -> Result<()> {
    write_file(path, |w| {
        for r in rankings {
            for item in &r.items {
                writeln!(w, "{}\t{}", r.question_id, item.statement_id)?;
            }
        }
        Ok(())
    })
}
