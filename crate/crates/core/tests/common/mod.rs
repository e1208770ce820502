//! Helpers shared by the integration tests: fixture locations, a runner for
//! the `hoprank` binary, the golden pipeline, and reference implementations
//! written independently of the library.

#![allow(dead_code)]

pub mod props;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_config() -> PathBuf {
    fixtures().join("fixture.toml")
}

pub fn golden_dir() -> PathBuf {
    fixtures().join("golden")
}

/// Runs the binary with `HOPRANK_CONFIG` cleared so the caller controls the config.
pub fn hoprank<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_hoprank"))
        .args(args)
        .env_remove("HOPRANK_CONFIG")
        .output()
        .expect("spawn hoprank")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs `args` and returns stdout, panicking with stderr on a non-zero exit.
pub fn ok<I, S>(args: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let o = hoprank(args);
    assert!(o.status.success(), "exit {:?}\n{}", o.status.code(), stderr(&o));
    stdout(&o)
}

/// Files produced by the golden pipeline, relative to its work directory.
pub const GOLDEN_FILES: &[&str] = &[
    "snapshot/statements.tsv",
    "snapshot/questions.tsv",
    "snapshot/ratings.tsv",
    "snapshot/meta.txt",
    "index.txt",
    "run.dev.tsv",
    "eval.dev.tsv",
    "oracle.dev.tsv",
    "recall.dev.tsv",
    "candidates.dev.tsv",
    "ensemble.dev.tsv",
    "submission.dev.txt",
    "stdout.txt",
];

/// ingest, index, retrieve, evaluate, oracle, recall-curve, export, ensemble
/// and submit on the bundled fixture, all writing under `work`.
///
/// Stdout of the steps whose summary holds no paths is collected in
/// `stdout.txt`.
pub fn run_golden_pipeline(work: &Path, threads: usize) {
    let cfg = fixture_config();
    let w = |name: &str| work.join(name);
    let snap = w("snapshot");
    let threads = threads.to_string();
    let base = |cmd: &str| -> Vec<std::ffi::OsString> {
        vec![
            "--config".into(),
            cfg.clone().into(),
            "--threads".into(),
            threads.clone().into(),
            cmd.into(),
        ]
    };
    let with = |cmd: &str, rest: &[&dyn AsRef<std::ffi::OsStr>]| {
        let mut v = base(cmd);
        v.extend(rest.iter().map(|a| a.as_ref().to_owned()));
        v
    };
    let mut log = String::new();
    log += &ok(with("ingest", &[&"--snapshot", &snap]));
    log += &ok(with("index", &[&"--snapshot", &snap, &"--out", &w("index.txt")]));
    ok(with("retrieve", &[&"--snapshot", &snap, &"--out", &w("run.dev.tsv")]));
    log += &ok(with(
        "evaluate",
        &[
            &"--snapshot",
            &snap,
            &"--run",
            &w("run.dev.tsv"),
            &"--out",
            &w("eval.dev.tsv"),
        ],
    ));
    log += &ok(with(
        "oracle",
        &[
            &"--snapshot",
            &snap,
            &"--run",
            &w("run.dev.tsv"),
            &"--out",
            &w("oracle.dev.tsv"),
        ],
    ));
    ok(with(
        "recall-curve",
        &[
            &"--snapshot",
            &snap,
            &"--run",
            &w("run.dev.tsv"),
            &"--depths",
            &"5,10,20,40",
            &"--out",
            &w("recall.dev.tsv"),
        ],
    ));
    ok(with(
        "export-candidates",
        &[
            &"--snapshot",
            &snap,
            &"--run",
            &w("run.dev.tsv"),
            &"--out",
            &w("candidates.dev.tsv"),
        ],
    ));
    let scores = fixtures().join("scores");
    ok(with(
        "ensemble",
        &[
            &"--candidates",
            &w("candidates.dev.tsv"),
            &"--scores",
            &scores.join("reranker_a.tsv"),
            &"--scores",
            &scores.join("reranker_b.tsv"),
            &"--out",
            &w("ensemble.dev.tsv"),
        ],
    ));
    log += &ok(with(
        "evaluate",
        &[&"--snapshot", &snap, &"--run", &w("ensemble.dev.tsv")],
    ));
    ok(with(
        "submit",
        &[&"--run", &w("ensemble.dev.tsv"), &"--out", &w("submission.dev.txt")],
    ));
    std::fs::write(w("stdout.txt"), log).unwrap();
}

/// Names of the golden files whose bytes differ from the pipeline output in
/// `work`. Setting `HOPRANK_BLESS=1` rewrites the golden copies instead.
pub fn golden_mismatches(work: &Path) -> Vec<String> {
    let bless = std::env::var_os("HOPRANK_BLESS").is_some_and(|v| v == "1");
    let mut bad = Vec::new();
    for name in GOLDEN_FILES {
        let got = std::fs::read(work.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let golden = golden_dir().join(name);
        if bless {
            std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
            std::fs::write(&golden, &got).unwrap();
            continue;
        }
        match std::fs::read(&golden) {
            Ok(want) if want == got => {}
            _ => bad.push(name.to_string()),
        }
    }
    bad
}

/// Reads a `question_id\trank\tstatement_id\tscore` run file into
/// `(question, [statement])` without going through the library.
pub fn parse_run(path: &Path) -> Vec<(String, Vec<String>)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut out: Vec<(String, Vec<String>)> = Vec::new();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split('\t').collect();
        match out.last_mut() {
            Some((q, ids)) if q == f[0] => ids.push(f[2].to_string()),
            _ => out.push((f[0].to_string(), vec![f[2].to_string()])),
        }
    }
    out
}

/// Reads raw fixture ratings (`question, statement, rating` with a header).
pub fn parse_ratings(path: &Path) -> std::collections::HashMap<(String, String), u32> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            ((f[0].to_string(), f[1].to_string()), f[2].parse().unwrap())
        })
        .collect()
}

/// Reference NDCG with exponential gain: `rels` are the grades in list order,
/// `all` every grade rated for the question.
pub fn reference_ndcg(rels: &[u32], all: &[u32]) -> f64 {
    let dcg = |grades: &[u32]| -> f64 {
        let mut total = 0.0;
        for (i, &g) in grades.iter().enumerate() {
            total += (2f64.powi(g as i32) - 1.0) / (i as f64 + 2.0).log2();
        }
        total
    };
    let mut ideal = all.to_vec();
    ideal.sort_by(|a, b| b.cmp(a));
    let idcg = dcg(&ideal);
    if idcg == 0.0 {
        0.0
    } else {
        dcg(rels) / idcg
    }
}

/// Best reference NDCG over every permutation of `rels`.
pub fn brute_force_best(rels: &[u32], all: &[u32]) -> f64 {
    fn permute(v: &mut Vec<u32>, k: usize, all: &[u32], best: &mut f64) {
        if k == v.len() {
            *best = best.max(reference_ndcg(v, all));
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, all, best);
            v.swap(k, i);
        }
    }
    let mut best = 0.0;
    permute(&mut rels.to_vec(), 0, all, &mut best);
    best
}
