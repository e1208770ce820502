//! Iterative BM25 on the fixture question where query expansion helps most,
//! printing each round: which statements were selected and how the query
//! grew.

use std::path::Path;

use hoprank::corpus::{question_query_text, Snapshot, Split};
use hoprank::eval::{ndcg, EvalConfig};
use hoprank::index::{bm25_rank, build_index, query_vector, Weighting};
use hoprank::retrieve::{ibm25_from_query, ibm25_traced, tokenize_corpus, IbmParams};
use hoprank::textpipe::{preprocess, PreprocessConfig};

fn main() -> hoprank::Result<()> {
    let snap = Snapshot::read(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/golden/snapshot"))?;
    let cfg = PreprocessConfig::shipped();
    let eval = EvalConfig::default();
    let p = IbmParams {
        n0: 2,
        growth: 2.0,
        downscale: 0.5,
        k: 20,
        ..IbmParams::default()
    };
    let index = build_index(&tokenize_corpus(&snap.corpus, &cfg), p.bm25)?;

    let mut best = None;
    for q in snap.questions_in(Split::Dev) {
        let query = query_vector(
            &preprocess(&question_query_text(&q, p.query_mode), &cfg),
            &index,
            Weighting::Bm25,
        );
        let iterative = ndcg(
            &ibm25_from_query(q.id.clone(), &query, &index, &p)?,
            &snap.ratings,
            &eval,
        )?;
        let plain = ndcg(&bm25_rank(q.id.clone(), &query, &index, p.k)?, &snap.ratings, &eval)?;
        if best.as_ref().is_none_or(|(_, _, gain, _)| iterative - plain > *gain) {
            best = Some((q, query, iterative - plain, (iterative, plain)));
        }
    }
    let (q, query, _, (iterative, plain)) = best.expect("dev questions");
    println!("{}: {}", q.id, question_query_text(&q, p.query_mode));

    let mut round = 0;
    ibm25_traced(q.id.clone(), &query, &index, &p, |trace| {
        round += 1;
        if round > 3 {
            return;
        }
        let picked: Vec<String> = trace
            .selected
            .iter()
            .map(|&d| {
                let id = &index.doc_ids()[d];
                let text = &snap.corpus.get(id.as_str()).expect("indexed statement").text;
                format!("    [{}] {text}", snap.ratings.get(q.id.as_str(), id.as_str()))
            })
            .collect();
        println!(
            "round {round}, query of {} terms selected:",
            trace.query.entries().len()
        );
        println!("{}", picked.join("\n"));
    })?;
    println!("NDCG@{}  iterative {iterative:.4}  single-shot {plain:.4}", p.k);
    Ok(())
}
