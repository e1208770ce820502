//! Text preprocessing: lowercase, tokenize, lemmatize, drop stopwords.
//!
//! The order is fixed. Stopwords are checked against the lemma, so a
//! stopword list entry such as `be` also removes `was` and `is` when the lemma
//! table maps them there.

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::tsv::{data_lines, read_to_string};

const SHIPPED_STOPWORDS: &str = include_str!("../resources/stopwords.txt");
const SHIPPED_LEMMAS: &str = include_str!("../resources/lemmas.tsv");

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub stopwords: HashSet<String>,
    pub lemma_map: HashMap<String, String>,
    pub lowercase: bool,
    /// Tokens are maximal alphanumeric runs when set; whitespace-separated chunks otherwise.
    pub strip_punctuation: bool,
}

impl Default for PreprocessConfig {
    /// No stopwords, identity lemmas.
    fn default() -> Self {
        Self {
            stopwords: HashSet::new(),
            lemma_map: HashMap::new(),
            lowercase: true,
            strip_punctuation: true,
        }
    }
}

impl PreprocessConfig {
    /// English stopword list and inflection table bundled with the crate.
    pub fn shipped() -> Self {
        static SHIPPED: OnceLock<PreprocessConfig> = OnceLock::new();
        SHIPPED
            .get_or_init(|| Self {
                stopwords: parse_stopwords(SHIPPED_STOPWORDS),
                lemma_map: parse_lemmas(SHIPPED_LEMMAS, Path::new("<shipped lemmas>"))
                    .expect("shipped lemma table is valid"),
                ..Self::default()
            })
            .clone()
    }

    pub fn lemma<'a>(&'a self, token: &'a str) -> &'a str {
        self.lemma_map.get(token).map(String::as_str).unwrap_or(token)
    }
}

/// Ordered lemmas of one text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl FromIterator<String> for TokenList {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        TokenList(iter.into_iter().filter(|t| !t.is_empty()).collect())
    }
}

pub fn preprocess(text: &str, cfg: &PreprocessConfig) -> TokenList {
    let lowered;
    let text = if cfg.lowercase {
        lowered = text.to_lowercase();
        lowered.as_str()
    } else {
        text
    };
    let raw: Box<dyn Iterator<Item = &str>> = if cfg.strip_punctuation {
        Box::new(text.split(|c: char| !c.is_alphanumeric()))
    } else {
        Box::new(text.split_whitespace())
    };
    TokenList(
        raw.filter(|t| !t.is_empty())
            .map(|t| cfg.lemma(t))
            .filter(|l| !cfg.stopwords.contains(*l))
            .map(str::to_owned)
            .collect(),
    )
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    data_lines(text).map(|(_, l)| l.trim().to_owned()).collect()
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && s.chars().all(char::is_alphanumeric)
}

fn parse_lemmas(text: &str, path: &Path) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    let mut lines = HashMap::new();
    for (line, raw) in data_lines(text) {
        let fields: Vec<&str> = raw.split('\t').map(str::trim).collect();
        let [token, lemma] = fields[..] else {
            return Err(Error::row(
                path,
                line,
                format!("expected 2 fields, found {}", fields.len()),
            ));
        };
        if !is_token(token) || !is_token(lemma) {
            return Err(Error::row(
                path,
                line,
                "token and lemma must be single alphanumeric tokens",
            ));
        }
        map.insert(token.to_owned(), lemma.to_owned());
        lines.insert(token.to_owned(), line);
    }
    // Lemmas must map to themselves so that preprocessing a token list is a no-op.
    let mut bad: Vec<(&String, &String)> = map
        .iter()
        .filter(|(_, lemma)| map.get(*lemma).is_some_and(|l| l != *lemma))
        .collect();
    bad.sort();
    if let Some((token, lemma)) = bad.first() {
        return Err(Error::row(
            path,
            lines[*token],
            format!("lemma {lemma:?} of {token:?} is itself mapped to {:?}", map[*lemma]),
        ));
    }
    Ok(map)
}

/// Loads stopword and lemma resources. `None` stands for an empty resource
/// (no stopwords, identity lemmas).
pub fn load_preprocess_config(stopword_path: Option<&Path>, lemma_path: Option<&Path>) -> Result<PreprocessConfig> {
    let mut cfg = PreprocessConfig::default();
    if let Some(p) = stopword_path {
        cfg.stopwords = parse_stopwords(&read_to_string(p)?);
    }
    if let Some(p) = lemma_path {
        cfg.lemma_map = parse_lemmas(&read_to_string(p)?, p)?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(list: &TokenList) -> Vec<&str> {
        list.tokens().iter().map(String::as_str).collect()
    }

    #[test]
    fn lemmatizes_and_strips_punctuation() {
        let cfg = PreprocessConfig {
            lemma_map: [("plants".to_string(), "plant".to_string())].into(),
            ..Default::default()
        };
        assert_eq!(
            toks(&preprocess("Plants produce oxygen.", &cfg)),
            ["plant", "produce", "oxygen"]
        );
    }

    #[test]
    fn empty_and_all_stopwords() {
        let cfg = PreprocessConfig::shipped();
        assert!(preprocess("", &cfg).is_empty());
        assert!(preprocess("the of a", &cfg).is_empty());
    }

    #[test]
    fn stopwords_apply_after_lemmatization() {
        let cfg = PreprocessConfig::shipped();
        // "was" lemmatizes to "be", which is a stopword
        assert_eq!(toks(&preprocess("The ice was melting", &cfg)), ["ice", "melt"]);
    }

    #[test]
    fn digits_are_kept() {
        let cfg = PreprocessConfig::default();
        assert_eq!(toks(&preprocess("boils at 100 C", &cfg)), ["boils", "at", "100", "c"]);
    }

    #[test]
    fn whitespace_tokens_without_punctuation_stripping() {
        let cfg = PreprocessConfig {
            strip_punctuation: false,
            ..Default::default()
        };
        assert_eq!(toks(&preprocess("H2O, ice", &cfg)), ["h2o,", "ice"]);
    }

    #[test]
    fn resource_files() {
        let dir = tempfile::tempdir().unwrap();
        let stop = dir.path().join("stop.txt");
        let lem = dir.path().join("lem.tsv");
        std::fs::write(&stop, "# comment\nthe\n\nof\n").unwrap();
        std::fs::write(&lem, "running\trun\n").unwrap();
        let cfg = load_preprocess_config(Some(&stop), Some(&lem)).unwrap();
        assert_eq!(cfg.stopwords.len(), 2);
        assert_eq!(cfg.lemma("running"), "run");

        let identity = load_preprocess_config(Some(&stop), None).unwrap();
        assert!(identity.lemma_map.is_empty());
        assert_eq!(identity.lemma("running"), "running");
    }

    #[test]
    fn malformed_lemma_row_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let lem = dir.path().join("lem.tsv");
        std::fs::write(&lem, "a\tb\nbroken row\n").unwrap();
        match load_preprocess_config(None, Some(&lem)) {
            Err(Error::Row { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn lemma_chains_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let lem = dir.path().join("lem.tsv");
        std::fs::write(&lem, "ran\trunning\nrunning\trun\n").unwrap();
        assert!(matches!(
            load_preprocess_config(None, Some(&lem)),
            Err(Error::Row { line: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn preprocessing_is_idempotent(text in "[A-Za-z0-9 ,.;'!?-]{0,80}") {
            let cfg = PreprocessConfig::shipped();
            let once = preprocess(&text, &cfg);
            let twice = preprocess(&once.join(), &cfg);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn idempotent_on_real_words(words in proptest::collection::vec(
            proptest::sample::select(vec!["plants", "leaves", "was", "running", "mice", "cells",
                "heated", "The", "oxygen", "better", "Data", "uses", "taller", "is"]), 0..12)) {
            let cfg = PreprocessConfig::shipped();
            let once = preprocess(&words.join(" "), &cfg);
            prop_assert_eq!(preprocess(&once.join(), &cfg), once);
        }
    }
}
