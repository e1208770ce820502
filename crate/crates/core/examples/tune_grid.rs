//! Grid search over iterative BM25 parameters on the fixture's dev split,
//! scored by recall averaged over rating grades.

use std::path::Path;

use hoprank::corpus::{Snapshot, Split};
use hoprank::retrieve::{tokenize_corpus, tune, TuneGrid};
use hoprank::textpipe::PreprocessConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let snap = Snapshot::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden/snapshot"))?;
    let grid: TuneGrid = toml::from_str(
        r#"
        n0 = [1, 2, 4, 8]
        growth = [1.5, 2.0]
        downscale = [0.0, 0.25, 0.5, 1.0]
        k = 20
        "#,
    )?;
    let cfg = PreprocessConfig::shipped();
    let docs = tokenize_corpus(&snap.corpus, &cfg);
    let questions = snap.questions_in(Split::Dev);
    let outcome = tune(&grid.expand(), &questions, &snap.ratings, &docs, &cfg, None)?;

    let mut rows = outcome.report.clone();
    rows.sort_by(|a, b| b.objective.total_cmp(&a.objective));
    println!("  n0  growth  downscale  objective");
    for row in rows.iter().take(5) {
        let p = &row.params;
        println!("{:>4}  {:>6}  {:>9}  {:.4}", p.n0, p.growth, p.downscale, row.objective);
    }
    let flat = outcome
        .report
        .iter()
        .filter(|r| r.params.downscale == 0.0)
        .map(|r| r.objective)
        .fold(0.0, f64::max);
    println!("best without expansion (downscale 0): {flat:.4}");
    println!(
        "chosen: n0={} growth={} downscale={}",
        outcome.best.n0, outcome.best.growth, outcome.best.downscale
    );
    Ok(())
}
