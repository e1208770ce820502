//! Writes the bundled synthetic fixture: explanation tables, questions,
//! ratings and two reranker stand-in score files.
//!
//! Each topic owns three query terms (spread over the question and its correct
//! answer) and two bridge terms. Direct statements share query terms with the
//! question; hop statements share only a bridge term with a direct statement,
//! so single-shot retrieval ranks them by accident while iterative retrieval
//! reaches them through the expanded query.
//!
//! ```text
//! cargo run --example generate_fixture [-- <out-dir>]
//! ```
//!
//! The default output directory is `crates/core/fixtures`. Output is fully
//! determined by the seed below.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hoprank::corpus::{load_questions, load_tables, Split};
use hoprank::ensemble::ScoreFile;
use hoprank::index::build_index;
use hoprank::retrieve::{tokenize_corpus, IbmParams, Method, Retriever};
use hoprank::textpipe::{preprocess, PreprocessConfig};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_190_611;
const TOPICS: usize = 20;
const DEV_TOPICS: usize = 16;
const DISTRACTORS: usize = 60;

/// Retrieval settings of the fixture run, mirrored in `fixtures/fixture.toml`.
fn fixture_params() -> IbmParams {
    IbmParams {
        n0: 4,
        k: 40,
        ..IbmParams::default()
    }
}

struct Topic {
    query: [String; 3],
    bridge: [String; 2],
    hop: [String; 2],
}

struct Row {
    table: usize,
    uid: String,
    cells: Vec<String>,
    comment: Option<String>,
}

/// Table layouts: file name, header, and the fixed filler cell that sits
/// between the two content slots.
const TABLES: [(&str, &str, &str); 4] = [
    ("causes", "[SKIP] COMMENT\tCAUSE\tFILL\tEFFECT\t[SKIP] UID", "causes"),
    (
        "kindof",
        "[SKIP] COMMENT\tHYPONYM\tFILL\tHYPERNYM\t[SKIP] UID",
        "is a kind of",
    ),
    (
        "properties",
        "[SKIP] COMMENT\tOBJECT\tFILL\tPROPERTY\t[SKIP] UID",
        "has the property",
    ),
    (
        "uses",
        "[SKIP] COMMENT\tAGENT\tFILL\tPURPOSE\t[SKIP] UID",
        "is used for",
    ),
];

/// Pronounceable words that the bundled preprocessing keeps unchanged.
fn word_pool(rng: &mut ChaCha8Rng, n: usize, cfg: &PreprocessConfig) -> Vec<String> {
    const ONSET: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
    const VOWEL: [&str; 5] = ["a", "e", "i", "o", "u"];
    const CODA: [&str; 6] = ["", "n", "r", "l", "x", "m"];
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSET.choose(rng).unwrap());
            w.push_str(VOWEL.choose(rng).unwrap());
        }
        w.push_str(CODA.choose(rng).unwrap());
        let kept = preprocess(&w, cfg);
        if kept.tokens() == [w.clone()] && seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn uid(rng: &mut ChaCha8Rng) -> String {
    let mut s = String::new();
    for i in 0..4 {
        if i > 0 {
            s.push('-');
        }
        write!(s, "{:04x}", rng.random::<u16>()).unwrap();
    }
    s
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    let rng = &mut ChaCha8Rng::seed_from_u64(SEED);
    let cfg = PreprocessConfig::shipped();

    let mut words = word_pool(rng, TOPICS * 7 + 40, &cfg).into_iter();
    let mut take = || words.next().expect("pool is large enough");
    let topics: Vec<Topic> = (0..TOPICS)
        .map(|_| Topic {
            query: [take(), take(), take()],
            bridge: [take(), take()],
            hop: [take(), take()],
        })
        .collect();
    let filler: Vec<String> = (0..40).map(|_| take()).collect();
    let fill = |rng: &mut ChaCha8Rng| filler.choose(rng).unwrap().clone();

    // (row, question index, rating)
    let mut rows: Vec<Row> = Vec::new();
    let mut ratings: Vec<(usize, usize, u32)> = Vec::new();
    for (t, topic) in topics.iter().enumerate() {
        let [q1, q2, q3] = &topic.query;
        let [b1, b2] = &topic.bridge;
        let [h1, h2] = &topic.hop;
        let planted: [(Vec<String>, u32); 7] = [
            (vec![format!("{q1} {q2}"), b1.clone()], 3),
            (vec![format!("{q2} {q3}"), b2.clone()], 3),
            (vec![q1.clone(), format!("{q3} {}", fill(rng))], 2),
            (vec![format!("{b1} {}", fill(rng)), h1.clone()], 2),
            (vec![b2.clone(), format!("{h2} {}", fill(rng))], 1),
            (vec![format!("{} {}", fill(rng), q3), fill(rng)], 1),
            (
                vec![q1.clone(), format!("{} {}", topics[(t + 1) % TOPICS].hop[0], fill(rng))],
                0,
            ),
        ];
        for (cells, rating) in planted {
            let table = rng.random_range(0..TABLES.len());
            let comment = rng.random_bool(0.15).then(|| format!("see {}", fill(rng)));
            ratings.push((rows.len(), t, rating));
            rows.push(Row {
                table,
                uid: uid(rng),
                cells,
                comment,
            });
        }
    }
    for _ in 0..DISTRACTORS {
        let mut a = format!("{} {}", fill(rng), fill(rng));
        if rng.random_bool(0.3) {
            let t = &topics[rng.random_range(0..TOPICS)];
            a.push(' ');
            a.push_str(&t.query[rng.random_range(0..3)]);
        }
        rows.push(Row {
            table: rng.random_range(0..TABLES.len()),
            uid: uid(rng),
            cells: vec![a, fill(rng)],
            comment: None,
        });
    }
    // order within a table file is arbitrary in real data
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(rng);

    let data = out.join("data");
    let tables_dir = data.join("tables");
    fs::create_dir_all(&tables_dir)?;
    for (ti, (name, header, verb)) in TABLES.iter().enumerate() {
        let mut text = format!("{header}\n");
        for &r in order.iter().filter(|&&r| rows[r].table == ti) {
            let row = &rows[r];
            let comment = row.comment.as_deref().unwrap_or("");
            writeln!(
                text,
                "{comment}\t{}\t{verb}\t{}\t{}",
                row.cells[0], row.cells[1], row.uid
            )?;
        }
        if ti == 0 {
            // one malformed row: exercised by ingest's rejection report
            writeln!(text, "orphan\t{}\t{verb}\t{}\t", fill(rng), fill(rng))?;
        }
        fs::write(tables_dir.join(format!("{name}.tsv")), text)?;
    }

    let labels = ['A', 'B', 'C', 'D'];
    let mut dev = String::from("QuestionID\tAnswerKey\tquestion\n");
    let mut train = dev.clone();
    for (t, topic) in topics.iter().enumerate() {
        let [q1, q2, q3] = &topic.query;
        let key = rng.random_range(0..4);
        let mut text = format!("Which {q1} {} the {q2}?", fill(rng));
        for (i, label) in labels.iter().enumerate() {
            let choice = if i == key {
                q3.clone()
            } else {
                topics[(t + 3 + i) % TOPICS].query[2].clone()
            };
            write!(text, " ({label}) {choice}")?;
        }
        // a few questions use numeric answer keys
        let key_cell = if t % 5 == 4 {
            (key + 1).to_string()
        } else {
            labels[key].to_string()
        };
        let line = format!("Q{:03}\t{key_cell}\t{text}\n", t + 1);
        if t < DEV_TOPICS {
            dev.push_str(&line);
        } else {
            train.push_str(&line);
        }
    }
    fs::write(data.join("questions.dev.tsv"), dev)?;
    fs::write(data.join("questions.train.tsv"), train)?;

    let mut rating_text = String::from("QuestionID\tExplanationID\trating\n");
    for &(r, t, rating) in &ratings {
        writeln!(rating_text, "Q{:03}\t{}\t{rating}", t + 1, rows[r].uid)?;
    }
    fs::write(data.join("ratings.tsv"), rating_text)?;

    write_scores(&out, &data, &ratings, &rows, rng)?;
    println!("wrote fixture to {}", out.display());
    Ok(())
}

/// Score files over the fixture's dev candidate lists: the planted rating plus
/// noise, at two noise levels.
fn write_scores(
    out: &Path,
    data: &Path,
    ratings: &[(usize, usize, u32)],
    rows: &[Row],
    rng: &mut ChaCha8Rng,
) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = PreprocessConfig::shipped();
    let corpus = load_tables(&data.join("tables"))?.corpus;
    let questions = load_questions(&data.join("questions.dev.tsv"), Split::Dev)?.questions;
    let p = fixture_params();
    let index = build_index(&tokenize_corpus(&corpus, &cfg), p.bm25)?;
    let retriever = Retriever {
        index: &index,
        preprocess: &cfg,
    };
    let runs = retriever.retrieve_all(&questions, Method::Ibm25, &p, Some(1))?;
    let rating_of = |q: &str, s: &str| {
        ratings
            .iter()
            .find(|&&(r, t, _)| format!("Q{:03}", t + 1) == q && rows[r].uid == s)
            .map_or(0, |&(_, _, rating)| rating)
    };
    let dir = out.join("scores");
    fs::create_dir_all(&dir)?;
    for (name, noise) in [("reranker_a", 0.6), ("reranker_b", 1.2)] {
        let mut file = ScoreFile::new(name);
        for run in &runs {
            for item in &run.items {
                let planted = rating_of(run.question_id.as_str(), item.statement_id.as_str()) as f64;
                let score = planted + rng.random_range(-noise..noise);
                file.insert(
                    run.question_id.clone(),
                    item.statement_id.clone(),
                    (score * 1e4).round() / 1e4,
                );
            }
        }
        file.write(&dir.join(format!("{name}.tsv")))?;
    }
    Ok(())
}
