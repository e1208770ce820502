//! Ingestion of WorldTree-style fact tables, questions and expert ratings,
//! plus the normalized snapshot that downstream stages read.
//!
//! Snapshot layout (all files UTF-8, tab-separated, one header row):
//!
//! ```text
//! statements.tsv  id  table  skipped_combined  text
//! questions.tsv   id  split  answer_key  question_text  [label  choice_text]...
//! ratings.tsv     question_id  statement_id  rating
//! meta.txt        key=value counts (statements, questions, rating_entries, max_rating_observed, ...)
//! ```
//!
//! Rows are written in load order for statements and questions and in
//! (question id, statement id) order for ratings.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ids::{QuestionId, StatementId};
use crate::tsv::{clean_cell, data_lines, read_to_string, write_file};

/// Header marker for columns excluded from sentence assembly.
pub const SKIP_MARKER: &str = "[SKIP]";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplanationStatement {
    pub id: StatementId,
    pub text: String,
    /// File stem of the table the row came from.
    pub table_name: String,
    /// True when a skip-marked column of this row held a value that was dropped.
    pub is_skipped_combined: bool,
}

/// Statements with an id lookup map.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    statements: Vec<ExplanationStatement>,
    by_id: HashMap<StatementId, usize>,
}

impl Corpus {
    pub fn from_statements(statements: Vec<ExplanationStatement>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(statements.len());
        for (pos, s) in statements.iter().enumerate() {
            if let Some(prev) = by_id.insert(s.id.clone(), pos) {
                return Err(Error::DuplicateStatement {
                    id: s.id.clone(),
                    first: statements[prev].table_name.clone(),
                    second: s.table_name.clone(),
                });
            }
        }
        Ok(Self { statements, by_id })
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn statements(&self) -> &[ExplanationStatement] {
        &self.statements
    }

    pub fn get(&self, id: &str) -> Option<&ExplanationStatement> {
        self.by_id.get(id).map(|&i| &self.statements[i])
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }
}

/// A row that was skipped during loading, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowIssue {
    pub path: PathBuf,
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RowIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.path.display(), self.line, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct TableLoad {
    pub corpus: Corpus,
    pub rejected: Vec<RowIssue>,
}

/// Loads every `*.tsv` table in `dir` (file name order) into one corpus.
///
/// The sentence of a row is the space-join of its non-empty content cells in
/// column order. Content cells are all columns except the UID column and the
/// columns whose header carries [`SKIP_MARKER`].
pub fn load_tables(dir: &Path) -> Result<TableLoad> {
    if !dir.is_dir() {
        return Err(Error::MissingPath(dir.to_path_buf()));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    files.sort();

    let mut statements = Vec::new();
    let mut seen: HashMap<StatementId, String> = HashMap::new();
    let mut rejected = Vec::new();
    for file in &files {
        for row in read_table(file, &mut rejected)? {
            if let Some(first) = seen.get(&row.id) {
                return Err(Error::DuplicateStatement {
                    id: row.id.clone(),
                    first: first.clone(),
                    second: file.display().to_string(),
                });
            }
            seen.insert(row.id.clone(), file.display().to_string());
            statements.push(row);
        }
    }
    Ok(TableLoad {
        corpus: Corpus::from_statements(statements)?,
        rejected,
    })
}

fn read_table(path: &Path, rejected: &mut Vec<RowIssue>) -> Result<Vec<ExplanationStatement>> {
    let text = read_to_string(path)?;
    let table_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let Some((_, header)) = lines.find(|(_, l)| !l.trim().is_empty()) else {
        return Ok(Vec::new());
    };
    let header: Vec<&str> = header.split('\t').collect();
    let uid_cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.contains("UID"))
        .map(|(i, _)| i)
        .collect();
    let uid_col = match uid_cols.as_slice() {
        [one] => *one,
        [] => {
            return Err(Error::Structure {
                path: path.to_path_buf(),
                message: "no header column contains \"UID\"".into(),
            })
        }
        _ => {
            return Err(Error::Structure {
                path: path.to_path_buf(),
                message: "more than one header column contains \"UID\"".into(),
            })
        }
    };
    let skipped: Vec<bool> = header
        .iter()
        .enumerate()
        .map(|(i, h)| i == uid_col || h.contains(SKIP_MARKER))
        .collect();

    let mut out = Vec::new();
    for (line, raw) in lines {
        let cells: Vec<&str> = raw.split('\t').collect();
        if cells.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let uid = cells.get(uid_col).map(|c| c.trim()).unwrap_or("");
        if uid.is_empty() {
            rejected.push(RowIssue {
                path: path.to_path_buf(),
                line,
                message: "empty UID".into(),
            });
            continue;
        }
        let mut parts = Vec::new();
        let mut dropped = false;
        for (i, cell) in cells.iter().enumerate() {
            let cell = clean_cell(cell);
            if cell.is_empty() {
                continue;
            }
            // cells past the header width count as content
            match skipped.get(i) {
                Some(true) if i != uid_col => dropped = true,
                Some(true) => {}
                _ => parts.push(cell),
            }
        }
        if parts.is_empty() {
            rejected.push(RowIssue {
                path: path.to_path_buf(),
                line,
                message: format!("row {uid} has no content cells"),
            });
            continue;
        }
        out.push(ExplanationStatement {
            id: StatementId::new(uid),
            text: parts.join(" "),
            table_name: table_name.clone(),
            is_skipped_combined: dropped,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidParam(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub id: QuestionId,
    pub question_text: String,
    /// Choice letter to choice text, letter order.
    pub choices: BTreeMap<char, String>,
    pub answer_key: char,
    pub split: Split,
}

impl Question {
    pub fn correct_answer(&self) -> &str {
        self.choices.get(&self.answer_key).map(String::as_str).unwrap_or("")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryMode {
    #[default]
    CorrectAnswerOnly,
    AllChoices,
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryMode::CorrectAnswerOnly => "correct_answer_only",
            QueryMode::AllChoices => "all_choices",
        })
    }
}

impl FromStr for QueryMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "correct_answer_only" => Ok(QueryMode::CorrectAnswerOnly),
            "all_choices" => Ok(QueryMode::AllChoices),
            other => Err(Error::InvalidParam(format!("unknown query mode {other:?}"))),
        }
    }
}

/// Text used to retrieve statements for `q`.
pub fn question_query_text(q: &Question, mode: QueryMode) -> String {
    let mut out = q.question_text.clone();
    let mut push = |s: &str| {
        if !s.is_empty() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(s);
        }
    };
    match mode {
        QueryMode::CorrectAnswerOnly => push(q.correct_answer()),
        QueryMode::AllChoices => q.choices.values().for_each(|c| push(c)),
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct QuestionLoad {
    pub questions: Vec<Question>,
    pub skipped: Vec<RowIssue>,
}

/// Maps "A".."Z" to themselves and "1".."9" to "A".."I".
fn normalize_label(raw: &str) -> Option<char> {
    let mut chars = raw.trim().chars();
    let c = chars.next()?;
    if chars.next().is_some() {
        return None;
    }
    match c {
        'A'..='Z' => Some(c),
        'a'..='z' => Some(c.to_ascii_uppercase()),
        '1'..='9' => Some((b'A' + (c as u8 - b'1')) as char),
        _ => None,
    }
}

/// Splits "stem (A) x (B) y" into the stem and labelled choices.
///
/// Markers must appear in sequence: `(A)`, `(B)`, ... or `(1)`, `(2)`, ...
fn split_choices(full: &str) -> (String, BTreeMap<char, String>) {
    for labels in [
        ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I'],
        ['1', '2', '3', '4', '5', '6', '7', '8', '9'],
    ] {
        let marker = |c: char| format!("({c})");
        let Some(first) = full.find(&marker(labels[0])) else {
            continue;
        };
        let stem = clean_cell(&full[..first]);
        let mut choices = BTreeMap::new();
        let mut start = first;
        for (i, &label) in labels.iter().enumerate() {
            let body_start = start + marker(label).len();
            let next = labels
                .get(i + 1)
                .and_then(|&n| full[body_start..].find(&marker(n)).map(|p| p + body_start));
            let end = next.unwrap_or(full.len());
            let letter = normalize_label(&label.to_string()).expect("static label");
            choices.insert(letter, clean_cell(&full[body_start..end]));
            match next {
                Some(n) => start = n,
                None => break,
            }
        }
        return (stem, choices);
    }
    (clean_cell(full), BTreeMap::new())
}

fn find_column(header: &[&str], names: &[&str]) -> Option<usize> {
    header
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

/// Loads a questions file. Columns are located by header name:
/// `QuestionID`, `AnswerKey` and `question` (case-insensitive).
pub fn load_questions(path: &Path, split: Split) -> Result<QuestionLoad> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let Some((_, header)) = lines.find(|(_, l)| !l.trim().is_empty()) else {
        return Ok(QuestionLoad::default());
    };
    let header: Vec<&str> = header.split('\t').collect();
    let col = |names: &[&str]| {
        find_column(&header, names).ok_or_else(|| Error::Structure {
            path: path.to_path_buf(),
            message: format!("missing column {:?}", names[0]),
        })
    };
    let id_col = col(&["QuestionID", "question_id", "id"])?;
    let key_col = col(&["AnswerKey", "answer_key"])?;
    let text_col = col(&["question", "question_text"])?;

    let mut load = QuestionLoad::default();
    let mut seen = HashMap::new();
    for (line, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = raw.split('\t').collect();
        let cell = |i: usize| cells.get(i).map(|c| c.trim()).unwrap_or("");
        let mut skip = |message: String| {
            load.skipped.push(RowIssue {
                path: path.to_path_buf(),
                line,
                message,
            })
        };
        let id = cell(id_col);
        if id.is_empty() {
            skip("empty question id".into());
            continue;
        }
        let (question_text, choices) = split_choices(cell(text_col));
        let Some(answer_key) = normalize_label(cell(key_col)).filter(|k| choices.contains_key(k)) else {
            skip(format!("answer key {:?} does not name a choice of {id}", cell(key_col)));
            continue;
        };
        if let Some(prev) = seen.insert(id.to_owned(), line) {
            skip(format!("question id {id} already defined on line {prev}"));
            continue;
        }
        load.questions.push(Question {
            id: QuestionId::new(id),
            question_text,
            choices,
            answer_key,
            split,
        });
    }
    Ok(load)
}

/// Expert ratings keyed by question, then statement.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RatingTable {
    by_question: BTreeMap<QuestionId, BTreeMap<StatementId, u32>>,
    max_rating_observed: u32,
}

impl RatingTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a rating, keeping the larger value for an existing pair.
    /// Returns true when the pair was already present.
    pub fn insert(&mut self, question: QuestionId, statement: StatementId, rating: u32) -> bool {
        self.max_rating_observed = self.max_rating_observed.max(rating);
        let slot = self.by_question.entry(question).or_default();
        match slot.get_mut(&statement) {
            Some(r) => {
                *r = (*r).max(rating);
                true
            }
            None => {
                slot.insert(statement, rating);
                false
            }
        }
    }

    pub fn get(&self, question: &str, statement: &str) -> u32 {
        self.by_question
            .get(question)
            .and_then(|m| m.get(statement))
            .copied()
            .unwrap_or(0)
    }

    pub fn for_question(&self, question: &str) -> Option<&BTreeMap<StatementId, u32>> {
        self.by_question.get(question)
    }

    pub fn questions(&self) -> impl Iterator<Item = &QuestionId> {
        self.by_question.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&QuestionId, &StatementId, u32)> {
        self.by_question
            .iter()
            .flat_map(|(q, m)| m.iter().map(move |(s, &r)| (q, s, r)))
    }

    pub fn len(&self) -> usize {
        self.by_question.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn max_rating_observed(&self) -> u32 {
        self.max_rating_observed
    }

    /// Keeps only the ratings of the given questions.
    pub fn restricted_to<'a>(&self, questions: impl IntoIterator<Item = &'a QuestionId>) -> RatingTable {
        let mut out = RatingTable::new();
        for q in questions {
            if let Some(m) = self.by_question.get(q) {
                for (s, &r) in m {
                    out.insert(q.clone(), s.clone(), r);
                }
            }
        }
        out
    }

    /// Counts ids that do not resolve against the loaded corpus and questions.
    pub fn unknown_ids(&self, corpus: &Corpus, questions: &[Question]) -> UnknownIds {
        let known: std::collections::HashSet<&str> = questions.iter().map(|q| q.id.as_str()).collect();
        let mut unknown = UnknownIds::default();
        for (q, m) in &self.by_question {
            if !known.contains(q.as_str()) {
                unknown.questions += 1;
            }
            unknown.statements += m.keys().filter(|s| !corpus.contains(s.as_str())).count();
        }
        unknown
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UnknownIds {
    /// Distinct question ids with ratings but no question row.
    pub questions: usize,
    /// Rating entries whose statement id is not in the corpus.
    pub statements: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RatingLoad {
    pub table: RatingTable,
    /// Rows that repeated an existing (question, statement) pair.
    pub duplicate_pairs: usize,
    pub row_errors: Vec<RowIssue>,
}

/// Loads `(question_id, statement_id, rating)` rows separated by tabs or commas.
///
/// A first line whose rating field contains no digit is taken as a header.
/// Malformed rows are skipped and reported in [`RatingLoad::row_errors`].
pub fn load_ratings(path: &Path) -> Result<RatingLoad> {
    let text = read_to_string(path)?;
    let mut load = RatingLoad::default();
    for (n, (line, raw)) in data_lines(&text).enumerate() {
        let sep = if raw.contains('\t') { '\t' } else { ',' };
        let fields: Vec<&str> = raw.split(sep).map(str::trim).collect();
        let mut fail = |message: String| {
            load.row_errors.push(RowIssue {
                path: path.to_path_buf(),
                line,
                message,
            })
        };
        if fields.len() != 3 {
            fail(format!("expected 3 fields, found {}", fields.len()));
            continue;
        }
        let (q, s, r) = (fields[0], fields[1], fields[2]);
        if n == 0 && !r.chars().any(|c| c.is_ascii_digit()) {
            continue;
        }
        let rating = match r.parse::<i64>() {
            Ok(v) if v < 0 => {
                fail(format!("negative rating {v}"));
                continue;
            }
            Ok(v) => match u32::try_from(v) {
                Ok(v) => v,
                Err(_) => {
                    fail(format!("rating {v} out of range"));
                    continue;
                }
            },
            Err(_) => {
                fail(format!("rating {r:?} is not an integer"));
                continue;
            }
        };
        if q.is_empty() || s.is_empty() {
            fail("empty id".into());
            continue;
        }
        if load.table.insert(QuestionId::new(q), StatementId::new(s), rating) {
            load.duplicate_pairs += 1;
        }
    }
    Ok(load)
}

/// The normalized collections that every later stage reads.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshot {
    pub corpus: Corpus,
    pub questions: Vec<Question>,
    pub ratings: RatingTable,
}

pub const STATEMENTS_FILE: &str = "statements.tsv";
pub const QUESTIONS_FILE: &str = "questions.tsv";
pub const RATINGS_FILE: &str = "ratings.tsv";
pub const META_FILE: &str = "meta.txt";

impl Snapshot {
    pub fn questions_in(&self, split: Split) -> Vec<Question> {
        self.questions.iter().filter(|q| q.split == split).cloned().collect()
    }

    /// Counts recorded in `meta.txt`, in file order.
    pub fn meta(&self) -> Vec<(String, String)> {
        let mut meta = vec![
            ("statements".to_string(), self.corpus.len().to_string()),
            ("questions".to_string(), self.questions.len().to_string()),
        ];
        for split in Split::ALL {
            let n = self.questions.iter().filter(|q| q.split == split).count();
            meta.push((format!("questions_{split}"), n.to_string()));
        }
        meta.push(("rating_entries".into(), self.ratings.len().to_string()));
        meta.push(("rated_questions".into(), self.ratings.questions().count().to_string()));
        meta.push((
            "max_rating_observed".into(),
            self.ratings.max_rating_observed().to_string(),
        ));
        meta
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_file(&dir.join(STATEMENTS_FILE), |w| {
            writeln!(w, "id\ttable\tskipped_combined\ttext")?;
            for s in self.corpus.statements() {
                writeln!(
                    w,
                    "{}\t{}\t{}\t{}",
                    s.id,
                    s.table_name,
                    u8::from(s.is_skipped_combined),
                    s.text
                )?;
            }
            Ok(())
        })?;
        write_file(&dir.join(QUESTIONS_FILE), |w| {
            writeln!(w, "id\tsplit\tanswer_key\tquestion_text\tchoices")?;
            for q in &self.questions {
                write!(w, "{}\t{}\t{}\t{}", q.id, q.split, q.answer_key, q.question_text)?;
                for (label, text) in &q.choices {
                    write!(w, "\t{label}\t{text}")?;
                }
                writeln!(w)?;
            }
            Ok(())
        })?;
        write_file(&dir.join(RATINGS_FILE), |w| {
            writeln!(w, "question_id\tstatement_id\trating")?;
            for (q, s, r) in self.ratings.iter() {
                writeln!(w, "{q}\t{s}\t{r}")?;
            }
            Ok(())
        })?;
        write_file(&dir.join(META_FILE), |w| {
            for (k, v) in self.meta() {
                writeln!(w, "{k}={v}")?;
            }
            Ok(())
        })
    }

    pub fn read(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            return Err(Error::MissingPath(dir.to_path_buf()));
        }
        Ok(Self {
            corpus: read_statements(&dir.join(STATEMENTS_FILE))?,
            questions: read_snapshot_questions(&dir.join(QUESTIONS_FILE))?,
            ratings: read_snapshot_ratings(&dir.join(RATINGS_FILE))?,
        })
    }
}

fn snapshot_rows(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    if !path.is_file() {
        return Err(Error::MissingPath(path.to_path_buf()));
    }
    let text = read_to_string(path)?;
    Ok(text
        .lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| (i + 1, l.split('\t').map(str::to_owned).collect()))
        .collect())
}

fn read_statements(path: &Path) -> Result<Corpus> {
    let mut statements = Vec::new();
    for (line, cells) in snapshot_rows(path)? {
        let [id, table, flag, text] = <[String; 4]>::try_from(cells)
            .map_err(|c| Error::row(path, line, format!("expected 4 fields, found {}", c.len())))?;
        statements.push(ExplanationStatement {
            id: StatementId::new(id),
            text,
            table_name: table,
            is_skipped_combined: flag == "1",
        });
    }
    Corpus::from_statements(statements)
}

fn read_snapshot_questions(path: &Path) -> Result<Vec<Question>> {
    let mut out = Vec::new();
    for (line, cells) in snapshot_rows(path)? {
        if cells.len() < 4 || cells.len() % 2 != 0 {
            return Err(Error::row(path, line, "malformed question row"));
        }
        let bad = |what: &str| Error::row(path, line, what.to_string());
        let split: Split = cells[1].parse()?;
        let answer_key = normalize_label(&cells[2]).ok_or_else(|| bad("bad answer key"))?;
        let mut choices = BTreeMap::new();
        for pair in cells[4..].chunks(2) {
            let label = normalize_label(&pair[0]).ok_or_else(|| bad("bad choice label"))?;
            choices.insert(label, pair[1].clone());
        }
        if !choices.contains_key(&answer_key) {
            return Err(bad("answer key names no choice"));
        }
        out.push(Question {
            id: QuestionId::new(cells[0].clone()),
            question_text: cells[3].clone(),
            choices,
            answer_key,
            split,
        });
    }
    Ok(out)
}

fn read_snapshot_ratings(path: &Path) -> Result<RatingTable> {
    let mut table = RatingTable::new();
    for (line, cells) in snapshot_rows(path)? {
        let [q, s, r] = <[String; 3]>::try_from(cells)
            .map_err(|c| Error::row(path, line, format!("expected 3 fields, found {}", c.len())))?;
        let r = r
            .parse()
            .map_err(|_| Error::row(path, line, format!("bad rating {r:?}")))?;
        table.insert(QuestionId::new(q), StatementId::new(s), r);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    fn question(text: &str, choices: &[(char, &str)], key: char) -> Question {
        Question {
            id: QuestionId::new("q"),
            question_text: text.into(),
            choices: choices.iter().map(|&(c, t)| (c, t.to_string())).collect(),
            answer_key: key,
            split: Split::Dev,
        }
    }

    #[test]
    fn tables_assemble_content_columns() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            "KINDOF.tsv",
            "[SKIP] COMMENTS\tX\tFILL\tY\t[SKIP] UID\n\
             note\ta plant\tis a kind of\torganism\tu1\n\
             \ta\tis a kind of\tb\tu2\n\
             \tsun\t\tstar\tu3\n",
        );
        let load = load_tables(dir.path()).unwrap();
        let c = &load.corpus;
        assert_eq!(c.len(), 3);
        assert_eq!(c.get("u1").unwrap().text, "a plant is a kind of organism");
        assert!(c.get("u1").unwrap().is_skipped_combined);
        assert!(!c.get("u2").unwrap().is_skipped_combined);
        assert_eq!(c.get("u3").unwrap().text, "sun star");
        assert_eq!(c.get("u3").unwrap().table_name, "KINDOF");
    }

    #[test]
    fn empty_uid_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "t.tsv", "A\tUID\nfoo\t\nbar\tu1\n\t\n");
        let load = load_tables(dir.path()).unwrap();
        assert_eq!(load.corpus.len(), 1);
        assert_eq!(load.rejected.len(), 1);
        assert_eq!(load.rejected[0].line, 2);
    }

    #[test]
    fn empty_directory_is_empty_corpus() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_tables(dir.path()).unwrap().corpus.is_empty());
    }

    #[test]
    fn missing_uid_column_names_file() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "bad.tsv", "A\tB\nx\ty\n");
        let err = load_tables(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Structure { .. }));
        assert!(err.to_string().contains("bad.tsv"));
    }

    #[test]
    fn duplicate_uid_across_files_lists_both() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.tsv", "X\tUID\nfoo\tu1\n");
        write(dir.path(), "b.tsv", "X\tUID\nbar\tu1\n");
        let err = load_tables(dir.path()).unwrap_err().to_string();
        assert!(err.contains("a.tsv") && err.contains("b.tsv"), "{err}");
    }

    #[test]
    fn questions_parse_choices_and_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "q.tsv",
            "QuestionID\tAnswerKey\tquestion\n\
             q1\tA\tWhich gas do plants produce? (A) oxygen (B) nitrogen\n\
             q2\t2\tPick one (A) red (B) blue\n\
             q3\tC\tBroken (A) x (B) y\n",
        );
        let load = load_questions(&p, Split::Dev).unwrap();
        assert_eq!(load.questions.len(), 2);
        assert_eq!(load.skipped.len(), 1);
        assert_eq!(load.skipped[0].line, 4);
        let q1 = &load.questions[0];
        assert_eq!(q1.question_text, "Which gas do plants produce?");
        assert_eq!(q1.choices[&'A'], "oxygen");
        assert_eq!(q1.choices[&'B'], "nitrogen");
        assert_eq!(q1.answer_key, 'A');
        assert_eq!(load.questions[1].answer_key, 'B');
    }

    #[test]
    fn numeric_choice_markers_map_to_letters() {
        let (stem, choices) = split_choices("How many? (1) one (2) two (3) three");
        assert_eq!(stem, "How many?");
        assert_eq!(choices.keys().collect::<String>(), "ABC");
        assert_eq!(choices[&'C'], "three");
    }

    #[test]
    fn header_only_questions_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "q.tsv", "QuestionID\tAnswerKey\tquestion\n");
        assert!(load_questions(&p, Split::Train).unwrap().questions.is_empty());
    }

    #[test]
    fn ratings_load_and_track_max() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "r.tsv", "q1\ta\t0\nq1\tb\t2\nq1\tc\t3\n");
        let load = load_ratings(&p).unwrap();
        assert_eq!(load.table.len(), 3);
        assert_eq!(load.table.max_rating_observed(), 3);
        assert!(load.row_errors.is_empty());
    }

    #[test]
    fn ratings_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "r.tsv", "");
        let load = load_ratings(&p).unwrap();
        assert!(load.table.is_empty());
        assert_eq!(load.table.max_rating_observed(), 0);
    }

    #[test]
    fn ratings_bad_rows_report_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "r.csv",
            "question_id,statement_id,rating\nq1,a,-1\nq1,b,2.5\nq1,c,4\nq1,c,1\n",
        );
        let load = load_ratings(&p).unwrap();
        let lines: Vec<usize> = load.row_errors.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![2, 3]);
        assert_eq!(load.table.get("q1", "c"), 4);
        assert_eq!(load.duplicate_pairs, 1);
    }

    #[test]
    fn unknown_ids_are_counted() {
        let corpus = Corpus::from_statements(vec![ExplanationStatement {
            id: "a".into(),
            text: "x".into(),
            table_name: "t".into(),
            is_skipped_combined: false,
        }])
        .unwrap();
        let mut table = RatingTable::new();
        table.insert("q".into(), "a".into(), 1);
        table.insert("q".into(), "zz".into(), 1);
        table.insert("other".into(), "a".into(), 1);
        let u = table.unknown_ids(&corpus, &[question("x", &[('A', "y")], 'A')]);
        assert_eq!(
            u,
            UnknownIds {
                questions: 1,
                statements: 1
            }
        );
    }

    #[test]
    fn query_text_modes() {
        let q = question(
            "Which gas do plants produce?",
            &[('A', "oxygen"), ('B', "nitrogen")],
            'A',
        );
        assert_eq!(
            question_query_text(&q, QueryMode::CorrectAnswerOnly),
            "Which gas do plants produce? oxygen"
        );
        assert_eq!(
            question_query_text(&q, QueryMode::AllChoices),
            "Which gas do plants produce? oxygen nitrogen"
        );
        let single = question("Why?", &[('A', "because")], 'A');
        assert_eq!(
            question_query_text(&single, QueryMode::CorrectAnswerOnly),
            question_query_text(&single, QueryMode::AllChoices)
        );
    }
}
