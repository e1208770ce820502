//! Graded-relevance evaluation: NDCG, oracle NDCG and recall by rating.
//!
//! ```text
//! DCG  = Σ_{i=1..n} gain(rel_i) / log2(i + 1)
//! IDCG = DCG of all positively rated statements of the question, rating-descending
//! NDCG = DCG / IDCG            (0 when IDCG = 0)
//! ```
//!
//! The ideal ordering includes rated statements missing from the ranking, so a
//! truncated list cannot reach 1. Unrated statements have rating 0.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::corpus::RatingTable;
use crate::error::{Error, Result};
use crate::ids::QuestionId;
use crate::ranking::{RankedItem, Ranking};
use crate::tsv::write_file;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gain {
    /// `2^r − 1`
    #[default]
    Exponential,
    /// `r`
    Linear,
}

impl Gain {
    pub fn of(self, rating: u32) -> f64 {
        match self {
            Gain::Exponential => 2f64.powi(rating as i32) - 1.0,
            Gain::Linear => rating as f64,
        }
    }
}

impl FromStr for Gain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" | "exp" => Ok(Gain::Exponential),
            "linear" => Ok(Gain::Linear),
            other => Err(Error::InvalidParam(format!("unknown gain {other:?}"))),
        }
    }
}

impl fmt::Display for Gain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gain::Exponential => "exponential",
            Gain::Linear => "linear",
        })
    }
}

/// Discounts use log base 2; a question with IDCG 0 scores 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalConfig {
    pub gain: Gain,
}

fn dcg(ratings: impl IntoIterator<Item = u32>, gain: Gain) -> f64 {
    ratings
        .into_iter()
        .enumerate()
        .map(|(i, r)| gain.of(r) / ((i + 2) as f64).log2())
        .sum()
}

fn ideal_dcg(ratings: &RatingTable, question: &str, gain: Gain) -> f64 {
    let Some(rated) = ratings.for_question(question) else {
        return 0.0;
    };
    let mut grades: Vec<u32> = rated.values().copied().filter(|&r| r > 0).collect();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    dcg(grades, gain)
}

pub fn ndcg(ranking: &Ranking, ratings: &RatingTable, cfg: &EvalConfig) -> Result<f64> {
    ranking.check_unique()?;
    let q = ranking.question_id.as_str();
    let ideal = ideal_dcg(ratings, q, cfg.gain);
    if ideal == 0.0 {
        return Ok(0.0);
    }
    let actual = dcg(
        ranking.items.iter().map(|i| ratings.get(q, i.statement_id.as_str())),
        cfg.gain,
    );
    Ok((actual / ideal).min(1.0))
}

/// Reorders the retrieved set by true rating (descending, ties by id).
pub fn oracle_order(retrieved: &Ranking, ratings: &RatingTable) -> Ranking {
    let q = retrieved.question_id.as_str();
    let mut items: Vec<RankedItem> = retrieved.items.clone();
    items.sort_by(|a, b| {
        ratings
            .get(q, b.statement_id.as_str())
            .cmp(&ratings.get(q, a.statement_id.as_str()))
            .then_with(|| a.statement_id.cmp(&b.statement_id))
    });
    Ranking::new(retrieved.question_id.clone(), items)
}

/// NDCG of the best possible reordering of `retrieved`.
pub fn oracle_ndcg(retrieved: &Ranking, ratings: &RatingTable, cfg: &EvalConfig) -> Result<f64> {
    retrieved.check_unique()?;
    ndcg(&oracle_order(retrieved, ratings), ratings, cfg)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub per_question: BTreeMap<QuestionId, f64>,
    pub mean_ndcg: f64,
    pub question_count: usize,
    /// Questions whose ideal DCG is 0; they score 0.
    pub zero_idcg: Vec<QuestionId>,
}

impl EvalReport {
    /// Per-question file: header `question_id\tndcg`, question id order, six decimals.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        write_file(path, |w| {
            writeln!(w, "question_id\tndcg")?;
            for (q, v) in &self.per_question {
                writeln!(w, "{q}\t{v:.6}")?;
            }
            Ok(())
        })
    }

    pub fn summary_line(&self) -> String {
        format!(
            "mean_ndcg={:.6} questions={} zero_idcg={}",
            self.mean_ndcg,
            self.question_count,
            self.zero_idcg.len()
        )
    }
}

/// Scores every ranked question and every rated question; rated questions
/// without a ranking score 0.
pub fn evaluate_run(rankings: &[Ranking], ratings: &RatingTable, cfg: &EvalConfig) -> Result<EvalReport> {
    evaluate_with(rankings, ratings, |r| ndcg(r, ratings, cfg))
}

/// Like [`evaluate_run`] with [`oracle_ndcg`] per question.
pub fn evaluate_oracle(rankings: &[Ranking], ratings: &RatingTable, cfg: &EvalConfig) -> Result<EvalReport> {
    evaluate_with(rankings, ratings, |r| oracle_ndcg(r, ratings, cfg))
}

fn evaluate_with(
    rankings: &[Ranking],
    ratings: &RatingTable,
    score: impl Fn(&Ranking) -> Result<f64>,
) -> Result<EvalReport> {
    let mut per_question = BTreeMap::new();
    for r in rankings {
        if per_question.insert(r.question_id.clone(), score(r)?).is_some() {
            return Err(Error::InvalidParam(format!("question {} ranked twice", r.question_id)));
        }
    }
    for q in ratings.questions() {
        per_question.entry(q.clone()).or_insert(0.0);
    }
    let zero_idcg = per_question
        .keys()
        .filter(|q| ideal_dcg(ratings, q.as_str(), Gain::Linear) == 0.0)
        .cloned()
        .collect();
    let question_count = per_question.len();
    // summed in question id order so the mean does not depend on run order
    let mean_ndcg = if question_count == 0 {
        0.0
    } else {
        per_question.values().sum::<f64>() / question_count as f64
    };
    Ok(EvalReport {
        per_question,
        mean_ndcg,
        question_count,
        zero_idcg,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RatingCategory {
    Exactly(u32),
    /// All ratings above zero.
    Positive,
}

impl fmt::Display for RatingCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RatingCategory::Exactly(r) => write!(f, "{r}"),
            RatingCategory::Positive => f.write_str(">0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecallRow {
    pub category: RatingCategory,
    pub depth: usize,
    pub found: usize,
    pub total: usize,
}

impl RecallRow {
    pub fn recall(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.found as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RecallTable {
    pub rows: Vec<RecallRow>,
}

impl RecallTable {
    pub fn get(&self, category: RatingCategory, depth: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.category == category && r.depth == depth)
            .map(RecallRow::recall)
    }

    /// Rows `rating\tk\trecall`; the aggregate category is written as `>0`.
    pub fn write_tsv(&self, path: &Path) -> Result<()> {
        write_file(path, |w| {
            writeln!(w, "rating\tk\trecall")?;
            for r in &self.rows {
                writeln!(w, "{}\t{}\t{:.6}", r.category, r.depth, r.recall())?;
            }
            Ok(())
        })
    }
}

/// Micro-averaged recall of each rating grade within the top `depth` items,
/// over the questions that have a ranking. Rows are ordered by category
/// (grades ascending, then `>0`) and depth ascending.
pub fn recall_by_rating(rankings: &[Ranking], ratings: &RatingTable, depths: &[usize]) -> Result<RecallTable> {
    if depths.contains(&0) {
        return Err(Error::InvalidParam("recall depths must be positive".into()));
    }
    let depths: BTreeSet<usize> = depths.iter().copied().collect();
    let mut counts: BTreeMap<(RatingCategory, usize), (usize, usize)> = BTreeMap::new();
    for r in rankings {
        let Some(rated) = ratings.for_question(r.question_id.as_str()) else {
            continue;
        };
        let position: std::collections::HashMap<&str, usize> = r
            .items
            .iter()
            .enumerate()
            .map(|(i, item)| (item.statement_id.as_str(), i))
            .collect();
        for (s, &grade) in rated.iter().filter(|(_, &g)| g > 0) {
            let pos = position.get(s.as_str()).copied();
            for &depth in &depths {
                let hit = pos.is_some_and(|p| p < depth);
                for cat in [RatingCategory::Exactly(grade), RatingCategory::Positive] {
                    let c = counts.entry((cat, depth)).or_default();
                    c.1 += 1;
                    c.0 += usize::from(hit);
                }
            }
        }
    }
    Ok(RecallTable {
        rows: counts
            .into_iter()
            .map(|((category, depth), (found, total))| RecallRow {
                category,
                depth,
                found,
                total,
            })
            .collect(),
    })
}

/// Fraction of positively rated statements of the ranked questions that
/// appear anywhere in their ranking.
pub fn coverage(rankings: &[Ranking], ratings: &RatingTable) -> f64 {
    let (mut found, mut total) = (0usize, 0usize);
    for r in rankings {
        let ids: HashSet<&str> = r.items.iter().map(|i| i.statement_id.as_str()).collect();
        if let Some(rated) = ratings.for_question(r.question_id.as_str()) {
            for (s, _) in rated.iter().filter(|(_, &g)| g > 0) {
                total += 1;
                found += usize::from(ids.contains(s.as_str()));
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        found as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(q: &str, entries: &[(&str, u32)]) -> RatingTable {
        let mut t = RatingTable::new();
        for &(s, r) in entries {
            t.insert(q.into(), s.into(), r);
        }
        t
    }

    const EXP: EvalConfig = EvalConfig {
        gain: Gain::Exponential,
    };

    #[test]
    fn hand_computed_ndcg() {
        let t = table("q", &[("a", 3), ("b", 2), ("c", 0)]);
        let v = ndcg(&Ranking::from_ids("q", ["b", "a", "c"]), &t, &EXP).unwrap();
        let dcg = 3.0 + 7.0 / 3f64.log2();
        let idcg = 7.0 + 3.0 / 3f64.log2();
        assert!((dcg - 7.41651).abs() < 1e-5);
        assert!((idcg - 8.89279).abs() < 1e-5);
        assert!((v - dcg / idcg).abs() < 1e-12);
        assert!((v - 0.8340).abs() < 1e-4);
    }

    #[test]
    fn perfect_and_zero() {
        let t = table("q", &[("a", 3), ("b", 2), ("c", 0)]);
        assert_eq!(ndcg(&Ranking::from_ids("q", ["a", "b"]), &t, &EXP).unwrap(), 1.0);
        let zeros = table("q", &[("a", 0), ("b", 0)]);
        assert_eq!(ndcg(&Ranking::from_ids("q", ["a", "b"]), &zeros, &EXP).unwrap(), 0.0);
        assert_eq!(ndcg(&Ranking::from_ids("unrated", ["a"]), &t, &EXP).unwrap(), 0.0);
    }

    #[test]
    fn linear_gain() {
        let t = table("q", &[("a", 3), ("b", 2)]);
        let v = ndcg(
            &Ranking::from_ids("q", ["b", "a"]),
            &t,
            &EvalConfig { gain: Gain::Linear },
        )
        .unwrap();
        let expected = (2.0 + 3.0 / 3f64.log2()) / (3.0 + 2.0 / 3f64.log2());
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn duplicate_ids_are_errors() {
        let t = table("q", &[("a", 1)]);
        assert!(matches!(
            ndcg(&Ranking::from_ids("q", ["a", "a"]), &t, &EXP),
            Err(Error::DuplicateRankedId { .. })
        ));
    }

    #[test]
    fn oracle_examples() {
        let t = table("q", &[("a", 3), ("b", 2)]);
        assert_eq!(
            oracle_ndcg(&Ranking::from_ids("q", ["x", "b", "a"]), &t, &EXP).unwrap(),
            1.0
        );
        let v = oracle_ndcg(&Ranking::from_ids("q", ["x", "a"]), &t, &EXP).unwrap();
        assert!((v - 7.0 / (7.0 + 3.0 / 3f64.log2())).abs() < 1e-12);
        assert!((v - 0.78716).abs() < 1e-5);
    }

    #[test]
    fn recall_examples() {
        let t = table("q", &[("a", 2), ("b", 2), ("c", 0)]);
        let runs = [Ranking::from_ids("q", ["a", "c"])];
        let tab = recall_by_rating(&runs, &t, &[2]).unwrap();
        assert_eq!(tab.get(RatingCategory::Exactly(2), 2), Some(0.5));
        assert_eq!(tab.get(RatingCategory::Positive, 2), Some(0.5));
        let full = [Ranking::from_ids("q", ["a", "b", "c"])];
        let tab = recall_by_rating(&full, &t, &[3, 10]).unwrap();
        assert!(tab.rows.iter().all(|r| r.recall() == 1.0));
        assert!(recall_by_rating(&runs, &t, &[0]).is_err());
    }

    #[test]
    fn evaluate_run_fills_missing_questions() {
        let mut t = table("q1", &[("a", 1)]);
        t.insert("q2".into(), "b".into(), 2);
        let report = evaluate_run(&[Ranking::from_ids("q1", ["a"])], &t, &EXP).unwrap();
        assert_eq!(report.question_count, 2);
        assert_eq!(report.per_question[&QuestionId::new("q2")], 0.0);
        assert!((report.mean_ndcg - 0.5).abs() < 1e-12);
        assert!(report.zero_idcg.is_empty());
    }
}
