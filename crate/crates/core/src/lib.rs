//! Retrieval, re-ranking support and graded-relevance evaluation for
//! explanation statements of multiple-choice science questions.
//!
//! The pipeline is split into small modules that exchange plain values:
//!
//! - [`corpus`] loads fact tables, questions and expert ratings and persists a
//!   normalized snapshot.
//! - [`textpipe`] turns raw text into lemmatized, stopword-free token lists.
//! - [`index`] holds the vocabulary, BM25 / TF-IDF sparse vectors and cosine
//!   similarity.
//! - [`retrieve`] runs iterative BM25 retrieval (query expansion by max-merging
//!   the vectors of the statements selected so far) and its grid tuner.
//! - [`eval`] computes NDCG, oracle NDCG and recall-by-rating tables.
//! - [`ensemble`] turns external score files into rankings and aggregates
//!   several rankings by weighted rank sums.
//! - [`ranking`] is the shared [`Ranking`] type and its run-file format.
//! - [`cli`] wires everything into the `hoprank` command.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod ensemble;
pub mod error;
pub mod eval;
pub mod ids;
pub mod index;
pub mod ranking;
pub mod retrieve;
pub mod textpipe;
mod tsv;

pub use error::{Error, Result};
pub use ids::{QuestionId, StatementId};
pub use ranking::{RankedItem, Ranking};
