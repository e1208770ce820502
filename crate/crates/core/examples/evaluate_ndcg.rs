//! NDCG of a small hand-made ranking under both gain functions, then the
//! mean over the fixture's golden run file.

use std::path::Path;

use hoprank::corpus::{RatingTable, Snapshot, Split};
use hoprank::eval::{evaluate_run, ndcg, EvalConfig, Gain};
use hoprank::ranking::{read_run, Ranking};

fn main() -> hoprank::Result<()> {
    let mut ratings = RatingTable::new();
    ratings.insert("q".into(), "a".into(), 3);
    ratings.insert("q".into(), "b".into(), 2);
    ratings.insert("q".into(), "c".into(), 0);
    for order in [["a", "b", "c"], ["b", "a", "c"], ["c", "b", "a"]] {
        let r = Ranking::from_ids("q", order);
        println!(
            "{order:?}: exponential {:.4}, linear {:.4}",
            ndcg(
                &r,
                &ratings,
                &EvalConfig {
                    gain: Gain::Exponential
                }
            )?,
            ndcg(&r, &ratings, &EvalConfig { gain: Gain::Linear })?,
        );
    }

    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden");
    let snap = Snapshot::read(&golden.join("snapshot"))?;
    let dev: Vec<_> = snap.questions_in(Split::Dev).into_iter().map(|q| q.id).collect();
    let report = evaluate_run(
        &read_run(&golden.join("run.dev.tsv"))?,
        &snap.ratings.restricted_to(&dev),
        &EvalConfig::default(),
    )?;
    println!("fixture run: {}", report.summary_line());
    let (worst, v) = report
        .per_question
        .iter()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty report");
    println!("hardest question {worst}: {v:.4}");
    Ok(())
}
