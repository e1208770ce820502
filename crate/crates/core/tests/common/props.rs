//! Randomized property checks. Each returns a short detail string on success
//! and a counterexample description on failure, so the acceptance report and
//! the individual tests can share them.

use hoprank::corpus::RatingTable;
use hoprank::ensemble::{aggregate, EnsembleSpec};
use hoprank::eval::{ndcg, recall_by_rating, EvalConfig, RatingCategory};
use hoprank::index::{bm25_rank, build_index, query_vector, Bm25Params, CorpusIndex, Weighting};
use hoprank::ranking::{RankedItem, Ranking};
use hoprank::retrieve::{ibm25_from_query, IbmParams};
use hoprank::textpipe::TokenList;
use hoprank::{QuestionId, StatementId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

const VOCAB: [&str; 12] = [
    "sun", "heat", "light", "water", "rock", "soil", "plant", "leaf", "cell", "energy", "ice", "gas",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn tokens(rng: &mut ChaCha8Rng, min: usize, max: usize) -> TokenList {
    let n = rng.random_range(min..=max);
    (0..n)
        .map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string())
        .collect()
}

/// A random corpus with at least one non-empty document, and a query.
pub fn random_corpus(rng: &mut ChaCha8Rng) -> (CorpusIndex, TokenList) {
    let n = rng.random_range(3..40);
    let mut docs: Vec<(StatementId, TokenList)> = (0..n)
        .map(|i| (StatementId::new(format!("s{i:02}")), tokens(rng, 0, 6)))
        .collect();
    docs[0].1 = tokens(rng, 1, 6);
    docs.shuffle(rng);
    let params = Bm25Params {
        k1: rng.random_range(0.5..2.0),
        b: rng.random_range(0.0..=1.0),
    };
    (build_index(&docs, params).unwrap(), tokens(rng, 1, 4))
}

/// One question with `n` ranked statements and random grades in 0..=3;
/// some ranked statements are unrated and some rated ones are not ranked.
fn random_rated_list(rng: &mut ChaCha8Rng) -> (Ranking, RatingTable) {
    let n = rng.random_range(2..20);
    let mut ids: Vec<String> = (0..n + 5).map(|i| format!("s{i:02}")).collect();
    ids.shuffle(rng);
    let mut ratings = RatingTable::new();
    for id in &ids {
        if rng.random_bool(0.8) {
            ratings.insert("q".into(), id.as_str().into(), rng.random_range(0..=3));
        }
    }
    (Ranking::from_ids("q", ids.into_iter().take(n)), ratings)
}

/// Moving a strictly better-graded item up one place strictly raises NDCG;
/// swapping equal grades leaves it unchanged.
pub fn ndcg_adjacent_swap(instances: usize, seed: u64) -> Check {
    let rng = &mut rng(seed);
    let cfg = EvalConfig::default();
    let mut strict = 0;
    for case in 0..instances {
        let (ranking, ratings) = random_rated_list(rng);
        let i = rng.random_range(0..ranking.len() - 1);
        let grade = |r: &Ranking, j: usize| ratings.get("q", r.items[j].statement_id.as_str());
        let mut swapped = ranking.clone();
        swapped.items.swap(i, i + 1);
        let before = ndcg(&ranking, &ratings, &cfg).map_err(|e| e.to_string())?;
        let after = ndcg(&swapped, &ratings, &cfg).map_err(|e| e.to_string())?;
        let (a, b) = (grade(&ranking, i), grade(&ranking, i + 1));
        let ok = match b.cmp(&a) {
            std::cmp::Ordering::Greater => {
                strict += 1;
                after > before
            }
            std::cmp::Ordering::Equal => after == before,
            std::cmp::Ordering::Less => after < before,
        };
        if !ok || !(0.0..=1.0).contains(&before) {
            return Err(format!(
                "case {case}: swap at {i} (grades {a},{b}) moved NDCG {before} -> {after}"
            ));
        }
    }
    Ok(format!("{instances} instances, {strict} strict improvements"))
}

/// Recall of every grade never decreases with list depth.
pub fn recall_monotone_in_k(instances: usize, seed: u64) -> Check {
    let rng = &mut rng(seed);
    for case in 0..instances {
        let mut runs = Vec::new();
        let mut ratings = RatingTable::new();
        for q in 0..rng.random_range(1..5) {
            let qid = format!("q{q}");
            let (mut ranking, table) = random_rated_list(rng);
            ranking.question_id = QuestionId::new(qid.as_str());
            for (_, s, r) in table.iter() {
                ratings.insert(qid.as_str().into(), s.clone(), r);
            }
            runs.push(ranking);
        }
        let depths: Vec<usize> = (1..=25).collect();
        let table = recall_by_rating(&runs, &ratings, &depths).map_err(|e| e.to_string())?;
        let mut cats: Vec<RatingCategory> = (1..=3).map(RatingCategory::Exactly).collect();
        cats.push(RatingCategory::Positive);
        for cat in cats {
            let mut prev = 0.0;
            for &k in &depths {
                if let Some(r) = table.get(cat, k) {
                    if r < prev || r > 1.0 {
                        return Err(format!("case {case}: recall of {cat:?} fell to {r} at K={k}"));
                    }
                    prev = r;
                }
            }
        }
    }
    Ok(format!("{instances} instances, depths 1..=25"))
}

fn ibm(index: &CorpusIndex, query: &TokenList, p: &IbmParams) -> Ranking {
    let v = query_vector(query, index, Weighting::Bm25);
    ibm25_from_query("q".into(), &v, index, p).unwrap()
}

fn random_ibm_params(rng: &mut ChaCha8Rng, n_docs: usize) -> IbmParams {
    let n0 = rng.random_range(1..=8);
    IbmParams {
        n0,
        growth: [1.0, 1.5, 2.0, 3.0][rng.random_range(0..4)],
        downscale: rng.random_range(0.0..=1.0),
        k: rng.random_range(n0..=n0 + n_docs + 5),
        ..IbmParams::default()
    }
}

/// I-BM25 output has no repeated statement and never exceeds K.
pub fn ibm25_duplicate_free(instances: usize, seed: u64) -> Check {
    let rng = &mut rng(seed);
    for case in 0..instances {
        let (index, query) = random_corpus(rng);
        let p = random_ibm_params(rng, index.doc_count());
        let r = ibm(&index, &query, &p);
        if r.check_unique().is_err() {
            return Err(format!("case {case}: repeated statement in {:?}", r.ids()));
        }
        if r.len() != p.k.min(index.doc_count()) {
            return Err(format!(
                "case {case}: {} items for K={} over {} docs",
                r.len(),
                p.k,
                index.doc_count()
            ));
        }
    }
    Ok(format!("{instances} random corpora"))
}

fn same_order(a: &Ranking, b: &Ranking) -> bool {
    a.ids() == b.ids()
}

/// downscale = 0 and n0 >= |corpus| both reproduce single-shot BM25 order.
pub fn degenerate_parameters_match_bm25(instances: usize, seed: u64) -> Check {
    let rng = &mut rng(seed);
    for case in 0..instances {
        let (index, query) = random_corpus(rng);
        let n = index.doc_count();
        let v = query_vector(&query, &index, Weighting::Bm25);
        let mut p = random_ibm_params(rng, n);
        let plain = bm25_rank("q".into(), &v, &index, p.k).unwrap();

        p.downscale = 0.0;
        let flat = ibm(&index, &query, &p);
        if !same_order(&flat, &plain) {
            return Err(format!(
                "case {case}: downscale=0 gave {:?}, BM25 {:?}",
                flat.ids(),
                plain.ids()
            ));
        }
        let mut wide = random_ibm_params(rng, n);
        wide.n0 = n + rng.random_range(0..3);
        wide.k = wide.n0.max(wide.k);
        let one_round = ibm(&index, &query, &wide);
        let plain = bm25_rank("q".into(), &v, &index, wide.k).unwrap();
        if !same_order(&one_round, &plain) {
            return Err(format!(
                "case {case}: n0={} gave {:?}, BM25 {:?}",
                wide.n0,
                one_round.ids(),
                plain.ids()
            ));
        }
    }
    Ok(format!("{instances} random corpora, both reductions"))
}

/// Random member rankings over one id set, with small integer scores so
/// that score sums are exact.
fn random_members(rng: &mut ChaCha8Rng) -> Vec<Ranking> {
    let n = rng.random_range(1..30);
    let m = rng.random_range(1..5);
    (0..m)
        .map(|_| {
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(rng);
            let mut score = 100.0;
            let items = ids
                .into_iter()
                .map(|i| {
                    score -= rng.random_range(0..3) as f64;
                    RankedItem::new(StatementId::new(format!("s{i:02}")), Some(score))
                })
                .collect();
            Ranking::new("q".into(), items)
        })
        .collect()
}

/// Weights k/8: every rank sum below is exact in binary floating point, so
/// summation order cannot break a tie differently.
fn dyadic_weights(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(1..=16) as f64 / 8.0).collect()
}

/// Identity (one member), symmetry (member order) and positive weight scaling.
pub fn ensemble_invariances(instances: usize, seed: u64) -> Check {
    let rng = &mut rng(seed);
    for case in 0..instances {
        let members = random_members(rng);
        let weights = dyadic_weights(rng, members.len());
        let spec = EnsembleSpec {
            weights: weights.clone(),
        };
        let base = aggregate(&members, &spec).map_err(|e| e.to_string())?;

        let single = aggregate(
            &members[..1],
            &EnsembleSpec {
                weights: vec![weights[0]],
            },
        )
        .unwrap();
        if !same_order(&single, &members[0]) {
            return Err(format!("case {case}: single member reordered"));
        }

        let mut perm: Vec<usize> = (0..members.len()).collect();
        perm.shuffle(rng);
        let shuffled: Vec<Ranking> = perm.iter().map(|&i| members[i].clone()).collect();
        let spec2 = EnsembleSpec {
            weights: perm.iter().map(|&i| weights[i]).collect(),
        };
        let permuted = aggregate(&shuffled, &spec2).unwrap();
        if permuted != base {
            return Err(format!("case {case}: member order {perm:?} changed the result"));
        }

        let c = [0.5, 2.0, 3.0, 10.0][rng.random_range(0..4)];
        let scaled = aggregate(
            &members,
            &EnsembleSpec {
                weights: weights.iter().map(|w| w * c).collect(),
            },
        )
        .unwrap();
        if !same_order(&scaled, &base) {
            return Err(format!("case {case}: scaling weights by {c} changed the order"));
        }
    }
    Ok(format!("{instances} random ensembles"))
}

/// Retrieval of every fixture question gives identical rankings, scores
/// included, on 1, 2, 4 and 8 worker threads, for several parameter settings.
pub fn ibm25_thread_determinism(settings: usize, seed: u64) -> Check {
    use hoprank::corpus::{Snapshot, Split};
    use hoprank::retrieve::{tokenize_corpus, Method, Retriever};
    use hoprank::textpipe::PreprocessConfig;

    let snap = Snapshot::read(&super::golden_dir().join("snapshot")).map_err(|e| e.to_string())?;
    let cfg = PreprocessConfig::shipped();
    let docs = tokenize_corpus(&snap.corpus, &cfg);
    let mut questions = snap.questions_in(Split::Dev);
    questions.extend(snap.questions_in(Split::Train));
    let rng = &mut rng(seed);
    for case in 0..settings {
        let p = random_ibm_params(rng, docs.len());
        let index = build_index(&docs, p.bm25).unwrap();
        let retriever = Retriever {
            index: &index,
            preprocess: &cfg,
        };
        let reference = retriever.retrieve_all(&questions, Method::Ibm25, &p, Some(1)).unwrap();
        for threads in [2, 4, 8] {
            let got = retriever
                .retrieve_all(&questions, Method::Ibm25, &p, Some(threads))
                .unwrap();
            if got != reference {
                return Err(format!("case {case}: {threads} threads differ from 1 thread for {p:?}"));
            }
        }
    }
    Ok(format!(
        "{settings} settings x {} questions, threads 1/2/4/8",
        questions.len()
    ))
}
