//! How much a perfect re-ranker could gain on the fixture candidates
//! (oracle NDCG) and how many rated statements the candidates contain at
//! each depth.

use std::path::Path;

use hoprank::corpus::{Snapshot, Split};
use hoprank::eval::{evaluate_oracle, evaluate_run, recall_by_rating, EvalConfig};
use hoprank::ranking::read_run;

fn main() -> hoprank::Result<()> {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden");
    let snap = Snapshot::read(&golden.join("snapshot"))?;
    let dev: Vec<_> = snap.questions_in(Split::Dev).into_iter().map(|q| q.id).collect();
    let ratings = snap.ratings.restricted_to(&dev);
    let runs = read_run(&golden.join("run.dev.tsv"))?;
    let cfg = EvalConfig::default();

    let actual = evaluate_run(&runs, &ratings, &cfg)?.mean_ndcg;
    let oracle = evaluate_oracle(&runs, &ratings, &cfg)?.mean_ndcg;
    println!(
        "retrieval NDCG {actual:.4}, oracle NDCG {oracle:.4}, headroom {:.4}",
        oracle - actual
    );

    let depths = [1, 5, 10, 20, 40];
    let table = recall_by_rating(&runs, &ratings, &depths)?;
    print!("rating");
    for k in depths {
        print!("  @{k:<5}");
    }
    println!();
    for chunk in table.rows.chunks(depths.len()) {
        print!("{:>6}", chunk[0].category.to_string());
        for row in chunk {
            print!("  {:.4}", row.recall());
        }
        println!();
    }
    Ok(())
}
