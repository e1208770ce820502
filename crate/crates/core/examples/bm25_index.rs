//! Builds a BM25 index over a handful of statements and compares BM25 and
//! TF-IDF cosine rankings for one query.

use hoprank::index::{bm25_rank, build_index, query_vector, tfidf_rank, Bm25Params, Weighting};
use hoprank::textpipe::{preprocess, PreprocessConfig};
use hoprank::StatementId;

fn main() -> hoprank::Result<()> {
    let cfg = PreprocessConfig::shipped();
    let statements = [
        ("s1", "the sun is a source of heat and light"),
        ("s2", "a star is a source of light"),
        ("s3", "the sun is a kind of star"),
        ("s4", "heat energy melts ice"),
        ("s5", "rocks are made of minerals"),
    ];
    let docs: Vec<_> = statements
        .iter()
        .map(|(id, text)| (StatementId::new(*id), preprocess(text, &cfg)))
        .collect();
    let index = build_index(&docs, Bm25Params { k1: 1.2, b: 0.75 })?;
    println!(
        "{} docs, {} terms, average length {:.2}",
        index.doc_count(),
        index.vocab().len(),
        index.avg_doc_len()
    );
    for term in ["sun", "light", "mineral"] {
        if let Some(t) = index.vocab().id(term) {
            println!("  idf({term}) = {:.4}, df = {}", index.idf(t), index.doc_freq(t));
        }
    }

    let query = preprocess("What gives off light like the sun?", &cfg);
    println!("query tokens: {:?}", query.tokens());
    let bm25 = bm25_rank("q".into(), &query_vector(&query, &index, Weighting::Bm25), &index, 5)?;
    let tfidf = tfidf_rank("q".into(), &query_vector(&query, &index, Weighting::Tfidf), &index, 5)?;
    println!("rank  bm25          tfidf");
    for (i, (a, b)) in bm25.items.iter().zip(&tfidf.items).enumerate() {
        println!(
            "{i:>4}  {} {:.4}     {} {:.4}",
            a.statement_id,
            a.score.unwrap(),
            b.statement_id,
            b.score.unwrap()
        );
    }
    Ok(())
}
