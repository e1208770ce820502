//! Loads raw explanation tables, questions and ratings, reports rejected
//! rows, and writes a normalized snapshot.
//!
//! ```text
//! cargo run --example ingest_snapshot [-- <out-dir>]
//! ```

use std::path::{Path, PathBuf};

use hoprank::corpus::{load_questions, load_ratings, load_tables, Snapshot, Split};

fn main() -> hoprank::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/data");
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hoprank-snapshot"));

    let tables = load_tables(&data.join("tables"))?;
    println!("{} statements", tables.corpus.len());
    for issue in &tables.rejected {
        println!("  rejected {issue}");
    }
    let first = &tables.corpus.statements()[0];
    println!("  e.g. [{}] {} (from {})", first.id, first.text, first.table_name);

    let mut questions = load_questions(&data.join("questions.dev.tsv"), Split::Dev)?.questions;
    questions.extend(load_questions(&data.join("questions.train.tsv"), Split::Train)?.questions);
    let q = &questions[0];
    println!(
        "{} questions; {}: {} -> {}",
        questions.len(),
        q.id,
        q.question_text,
        q.correct_answer()
    );

    let ratings = load_ratings(&data.join("ratings.tsv"))?;
    println!(
        "{} ratings, {} malformed rows, {} duplicate pairs",
        ratings.table.len(),
        ratings.row_errors.len(),
        ratings.duplicate_pairs
    );

    let snap = Snapshot {
        corpus: tables.corpus,
        questions,
        ratings: ratings.table,
    };
    snap.write(&out)?;
    assert_eq!(Snapshot::read(&out)?, snap);
    println!("snapshot written to {} and read back", out.display());
    for (k, v) in snap.meta() {
        println!("  {k}={v}");
    }
    Ok(())
}
