//! Re-ranks the fixture candidates with two score files standing in for
//! fine-tuned re-rankers, then fuses them by weighted rank sums.

use std::path::Path;

use hoprank::corpus::{Snapshot, Split};
use hoprank::ensemble::{aggregate, score_to_ranking, EnsembleSpec, ScoreFile};
use hoprank::eval::{evaluate_run, EvalConfig};
use hoprank::ranking::{read_run, Ranking};

fn main() -> hoprank::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let snap = Snapshot::read(&root.join("golden/snapshot"))?;
    let candidates = read_run(&root.join("golden/candidates.dev.tsv"))?;
    let members = [
        ScoreFile::read(&root.join("scores/reranker_a.tsv"))?,
        ScoreFile::read(&root.join("scores/reranker_b.tsv"))?,
    ];
    let dev: Vec<_> = snap.questions_in(Split::Dev).into_iter().map(|q| q.id).collect();
    let ratings = snap.ratings.restricted_to(&dev);
    let cfg = EvalConfig::default();
    let mean = |runs: &[Ranking]| evaluate_run(runs, &ratings, &cfg).map(|r| r.mean_ndcg);

    println!("first stage        {:.4}", mean(&candidates)?);
    let mut per_member: Vec<Vec<Ranking>> = Vec::new();
    for m in &members {
        let ranked = candidates
            .iter()
            .map(|c| score_to_ranking(c, m).map(|r| r.ranking))
            .collect::<hoprank::Result<Vec<_>>>()?;
        println!("{:<18} {:.4}", m.source_label, mean(&ranked)?);
        per_member.push(ranked);
    }
    for weights in [vec![1.0, 1.0], vec![2.0, 1.0], vec![4.0, 1.0]] {
        let spec = EnsembleSpec {
            weights: weights.clone(),
        };
        let fused = (0..candidates.len())
            .map(|q| aggregate(&[per_member[0][q].clone(), per_member[1][q].clone()], &spec))
            .collect::<hoprank::Result<Vec<_>>>()?;
        println!("ensemble {weights:?}  {:.4}", mean(&fused)?);
    }
    Ok(())
}
