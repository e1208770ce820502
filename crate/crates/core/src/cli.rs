//! The `hoprank` command.
//!
//! Every subcommand reads and writes files. Progress goes to standard error
//! and a single `key=value` summary line to standard output. Exit codes: 0 on
//! success, 1 on usage errors, 2 on data errors.

use std::ffi::OsString;
use std::fmt::{self, Display};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::corpus::{load_questions, load_ratings, load_tables, QueryMode, RatingTable, Snapshot, Split};
use crate::ensemble::{aggregate, score_to_ranking, write_submission, EnsembleSpec, ScoreFile};
use crate::error::Error;
use crate::eval::{coverage, evaluate_oracle, evaluate_run, recall_by_rating, Gain};
use crate::index::build_index;
use crate::ranking::{read_run, write_run, Ranking};
use crate::retrieve::{tokenize_corpus, tune, IbmParams, Method, Retriever, TuneGrid};

#[derive(Debug, Parser)]
#[command(
    name = "hoprank",
    version,
    about = "Explanation retrieval, ensembling and NDCG evaluation"
)]
struct Cli {
    /// Config file (default: $HOPRANK_CONFIG, else built-in defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for per-question work (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load tables, questions and ratings into a normalized snapshot.
    Ingest(IngestArgs),
    /// Build the index and optionally dump it.
    Index(IndexArgs),
    /// Retrieve candidate lists for a split and write a run file.
    Retrieve(RetrieveArgs),
    /// Grid-search retrieval parameters on category-averaged recall.
    Tune(TuneArgs),
    /// Mean NDCG of a run file.
    Evaluate(EvalArgs),
    /// Mean NDCG of the best reordering of each candidate list.
    Oracle(EvalArgs),
    /// Recall of each rating grade at several list depths.
    RecallCurve(RecallArgs),
    /// Validate a run against the snapshot and write the candidate export.
    ExportCandidates(ExportArgs),
    /// Rank candidates by external score files and aggregate the ranks.
    Ensemble(EnsembleArgs),
    /// Write a run in submission format.
    Submit(SubmitArgs),
}

#[derive(Debug, Args)]
struct SnapshotArgs {
    /// Snapshot directory written by `ingest`.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Question split.
    #[arg(long)]
    split: Option<Split>,
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Directory with `tables/`, `questions.<split>.tsv` and ratings files.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Tables directory (default: <data-dir>/tables).
    #[arg(long)]
    tables: Option<PathBuf>,
    #[arg(long)]
    questions_train: Option<PathBuf>,
    #[arg(long)]
    questions_dev: Option<PathBuf>,
    #[arg(long)]
    questions_test: Option<PathBuf>,
    /// Ratings files (default: <data-dir>/ratings.tsv and ratings.<split>.tsv when present).
    #[arg(long)]
    ratings: Vec<PathBuf>,
    /// Output snapshot directory.
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Plain-text index dump.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
}

#[derive(Debug, Args)]
struct RetrievalFlags {
    /// ibm25, bm25 or tfidf.
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    n0: Option<usize>,
    #[arg(long)]
    growth: Option<f64>,
    #[arg(long)]
    downscale: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// correct_answer_only or all_choices.
    #[arg(long)]
    query_mode: Option<QueryMode>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
}

#[derive(Debug, Args)]
struct RetrieveArgs {
    #[command(flatten)]
    snap: SnapshotArgs,
    #[command(flatten)]
    params: RetrievalFlags,
    /// Run file (default: <output_dir>/run.<split>.tsv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    snap: SnapshotArgs,
    /// TOML grid: lists for n0, growth, downscale and optionally k1, b, query_mode; scalar k.
    #[arg(long)]
    grid: PathBuf,
    /// Per-config report (default: <output_dir>/tune.<split>.tsv).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    snap: SnapshotArgs,
    /// Run file to score.
    #[arg(long)]
    run: PathBuf,
    /// exponential or linear.
    #[arg(long)]
    gain: Option<Gain>,
    /// Per-question report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecallArgs {
    #[command(flatten)]
    snap: SnapshotArgs,
    #[arg(long)]
    run: PathBuf,
    /// Comma-separated list depths.
    #[arg(long, value_delimiter = ',', default_value = "10,25,50,100,200,300,500,1000")]
    depths: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long)]
    run: PathBuf,
    /// Keep the first K candidates of each question.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    /// Candidate export the score files refer to.
    #[arg(long)]
    candidates: PathBuf,
    /// Score files, one per member.
    #[arg(long = "scores", required = true)]
    scores: Vec<PathBuf>,
    /// Comma-separated member weights (default: uniform).
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SubmitArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

type CmdResult = std::result::Result<Summary, Failure>;

/// Ordered `key=value` pairs printed as one stdout line.
#[derive(Default)]
struct Summary(Vec<(String, String)>);

impl Summary {
    fn with(mut self, key: &str, value: impl Display) -> Self {
        self.0.push((key.to_owned(), value.to_string()));
        self
    }
}

impl Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun `hoprank --help` for usage.");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Ctx {
    cfg: RunConfig,
    threads: Option<usize>,
}

fn execute(cli: Cli) -> CmdResult {
    let cfg = RunConfig::resolve(cli.config.as_deref())?;
    if cli.threads == Some(0) {
        return Err(Failure::Usage("--threads must be positive".into()));
    }
    let ctx = Ctx {
        threads: cli.threads.or(cfg.run.threads),
        cfg,
    };
    match cli.command {
        Command::Ingest(a) => ingest(&ctx, a),
        Command::Index(a) => index(&ctx, a),
        Command::Retrieve(a) => retrieve(&ctx, a),
        Command::Tune(a) => tune_cmd(&ctx, a),
        Command::Evaluate(a) => evaluate(&ctx, a, false),
        Command::Oracle(a) => evaluate(&ctx, a, true),
        Command::RecallCurve(a) => recall_curve(&ctx, a),
        Command::ExportCandidates(a) => export_candidates(&ctx, a),
        Command::Ensemble(a) => ensemble(a),
        Command::Submit(a) => submit(a),
    }
}

fn existing(path: PathBuf) -> std::result::Result<PathBuf, Failure> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Failure::Data(Error::MissingPath(path)))
    }
}

impl Ctx {
    fn snapshot_dir(&self, flag: Option<PathBuf>) -> std::result::Result<PathBuf, Failure> {
        let path = flag
            .or_else(|| self.cfg.paths.snapshot_dir.clone())
            .ok_or_else(|| Failure::Usage("no snapshot directory (--snapshot or [paths] snapshot_dir)".into()))?;
        existing(path)
    }

    fn split(&self, flag: Option<Split>) -> std::result::Result<Split, Failure> {
        Ok(match flag {
            Some(s) => s,
            None => self.cfg.split()?,
        })
    }

    fn output(&self, flag: Option<PathBuf>, default_name: String) -> std::result::Result<PathBuf, Failure> {
        flag.or_else(|| self.cfg.paths.output_dir.as_ref().map(|d| d.join(&default_name)))
            .ok_or_else(|| {
                Failure::Usage(format!(
                    "no output path (--out or [paths] output_dir for {default_name})"
                ))
            })
    }

    fn load_snapshot(&self, flag: Option<PathBuf>) -> std::result::Result<Snapshot, Failure> {
        let dir = self.snapshot_dir(flag)?;
        let started = Instant::now();
        let snap = Snapshot::read(&dir)?;
        eprintln!(
            "snapshot {}: {} statements, {} questions, {} ratings ({:.1?})",
            dir.display(),
            snap.corpus.len(),
            snap.questions.len(),
            snap.ratings.len(),
            started.elapsed()
        );
        Ok(snap)
    }

    fn ibm_params(&self, f: &RetrievalFlags) -> IbmParams {
        let d = self.cfg.ibm_params();
        IbmParams {
            n0: f.n0.unwrap_or(d.n0),
            growth: f.growth.unwrap_or(d.growth),
            downscale: f.downscale.unwrap_or(d.downscale),
            k: f.k.unwrap_or(d.k),
            query_mode: f.query_mode.unwrap_or(d.query_mode),
            bm25: crate::index::Bm25Params {
                k1: f.k1.unwrap_or(d.bm25.k1),
                b: f.b.unwrap_or(d.bm25.b),
            },
        }
    }
}

fn split_ratings(snap: &Snapshot, split: Split) -> RatingTable {
    let ids: Vec<_> = snap.questions_in(split).into_iter().map(|q| q.id).collect();
    snap.ratings.restricted_to(&ids)
}

fn report_issues(what: &str, issues: &[crate::corpus::RowIssue]) {
    if issues.is_empty() {
        return;
    }
    eprintln!("{what}: {} rows skipped", issues.len());
    for issue in issues.iter().take(5) {
        eprintln!("  {issue}");
    }
}

fn ingest(ctx: &Ctx, a: IngestArgs) -> CmdResult {
    let data_dir = a.data_dir.or_else(|| ctx.cfg.paths.data_dir.clone());
    if let Some(d) = &data_dir {
        existing(d.clone())?;
    }
    let tables = a
        .tables
        .or_else(|| data_dir.as_ref().map(|d| d.join("tables")))
        .ok_or_else(|| Failure::Usage("no tables directory (--tables or --data-dir)".into()))?;
    let tables = existing(tables)?;
    let out = a
        .snapshot
        .or_else(|| ctx.cfg.paths.snapshot_dir.clone())
        .ok_or_else(|| Failure::Usage("no snapshot directory (--snapshot or [paths] snapshot_dir)".into()))?;

    let mut question_files = Vec::new();
    for (split, flag) in [
        (Split::Train, a.questions_train),
        (Split::Dev, a.questions_dev),
        (Split::Test, a.questions_test),
    ] {
        match flag {
            Some(p) => question_files.push((split, existing(p)?)),
            None => {
                if let Some(p) = data_dir.as_ref().map(|d| d.join(format!("questions.{split}.tsv"))) {
                    if p.is_file() {
                        question_files.push((split, p));
                    }
                }
            }
        }
    }
    let mut rating_files = Vec::new();
    for p in a.ratings {
        rating_files.push(existing(p)?);
    }
    if rating_files.is_empty() {
        if let Some(d) = &data_dir {
            let mut names = vec!["ratings.tsv".to_string()];
            names.extend(Split::ALL.iter().map(|s| format!("ratings.{s}.tsv")));
            rating_files.extend(names.iter().map(|n| d.join(n)).filter(|p| p.is_file()));
        }
    }

    let started = Instant::now();
    let tables = load_tables(&tables)?;
    report_issues("tables", &tables.rejected);
    let mut questions = Vec::new();
    for (split, path) in &question_files {
        let load = load_questions(path, *split)?;
        eprintln!("{}: {} {split} questions", path.display(), load.questions.len());
        report_issues("questions", &load.skipped);
        questions.extend(load.questions);
    }
    {
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = questions.iter().find(|q| !seen.insert(q.id.clone())) {
            return Err(Failure::Data(Error::InvalidParam(format!(
                "question id {} appears in more than one split",
                dup.id
            ))));
        }
    }
    let mut ratings = RatingTable::new();
    let mut duplicates = 0;
    for path in &rating_files {
        let load = load_ratings(path)?;
        eprintln!("{}: {} rating entries", path.display(), load.table.len());
        report_issues("ratings", &load.row_errors);
        duplicates += load.duplicate_pairs;
        for (q, s, r) in load.table.iter() {
            if ratings.insert(q.clone(), s.clone(), r) {
                duplicates += 1;
            }
        }
    }
    if duplicates > 0 {
        eprintln!("warning: {duplicates} duplicate rating pairs resolved by maximum");
    }
    let snap = Snapshot {
        corpus: tables.corpus,
        questions,
        ratings,
    };
    let unknown = snap.ratings.unknown_ids(&snap.corpus, &snap.questions);
    if unknown.questions + unknown.statements > 0 {
        eprintln!(
            "warning: ratings reference {} unknown questions and {} unknown statements (kept)",
            unknown.questions, unknown.statements
        );
    }
    snap.write(&out)?;
    eprintln!("wrote {} ({:.1?})", out.display(), started.elapsed());
    let mut summary = Summary::default();
    for (k, v) in snap.meta() {
        summary = summary.with(&k, v);
    }
    Ok(summary
        .with("unknown_rating_questions", unknown.questions)
        .with("unknown_rating_statements", unknown.statements))
}

fn index(ctx: &Ctx, a: IndexArgs) -> CmdResult {
    let snap = ctx.load_snapshot(a.snapshot)?;
    let pre = ctx.cfg.preprocess_config()?;
    let mut params = ctx.cfg.ibm_params().bm25;
    params.k1 = a.k1.unwrap_or(params.k1);
    params.b = a.b.unwrap_or(params.b);
    let idx = build_index(&tokenize_corpus(&snap.corpus, &pre), params)?;
    if let Some(out) = &a.out {
        idx.dump(out)?;
        eprintln!("wrote {}", out.display());
    }
    Ok(Summary::default()
        .with("doc_count", idx.doc_count())
        .with("vocab_size", idx.vocab().len())
        .with("avg_doc_len", format!("{:.6}", idx.avg_doc_len())))
}

fn retrieve(ctx: &Ctx, a: RetrieveArgs) -> CmdResult {
    let split = ctx.split(a.snap.split)?;
    let out = ctx.output(a.out, format!("run.{split}.tsv"))?;
    let snap = ctx.load_snapshot(a.snap.snapshot)?;
    let method = match a.params.method {
        Some(m) => m,
        None => ctx.cfg.method()?,
    };
    let params = ctx.ibm_params(&a.params);
    params.validate()?;
    let pre = ctx.cfg.preprocess_config()?;
    let idx = build_index(&tokenize_corpus(&snap.corpus, &pre), params.bm25)?;
    let questions = snap.questions_in(split);
    let started = Instant::now();
    let retriever = Retriever {
        index: &idx,
        preprocess: &pre,
    };
    let runs = retriever.retrieve_all(&questions, method, &params, ctx.threads)?;
    eprintln!("retrieved {} questions ({:.1?})", runs.len(), started.elapsed());
    write_run(&runs, &out)?;
    let ratings = split_ratings(&snap, split);
    let mut summary = Summary::default()
        .with("split", split)
        .with("questions", runs.len())
        .with("k", params.k);
    if !ratings.is_empty() {
        summary = summary.with("recall_gt0", format!("{:.6}", coverage(&runs, &ratings)));
    }
    Ok(summary.with("out", out.display()))
}

fn tune_cmd(ctx: &Ctx, a: TuneArgs) -> CmdResult {
    let split = ctx.split(a.snap.split)?;
    let out = ctx.output(a.out, format!("tune.{split}.tsv"))?;
    let grid_path = existing(a.grid)?;
    let grid_text = std::fs::read_to_string(&grid_path).map_err(|e| Error::Io {
        path: grid_path.clone(),
        source: e,
    })?;
    let grid: TuneGrid =
        toml::from_str(&grid_text).map_err(|e| Error::Config(format!("{}: {e}", grid_path.display())))?;
    let snap = ctx.load_snapshot(a.snap.snapshot)?;
    let pre = ctx.cfg.preprocess_config()?;
    let docs = tokenize_corpus(&snap.corpus, &pre);
    let questions = snap.questions_in(split);
    let ratings = split_ratings(&snap, split);
    let points = grid.expand();
    eprintln!(
        "tuning {} configurations on {} {split} questions",
        points.len(),
        questions.len()
    );
    let started = Instant::now();
    let outcome = tune(&points, &questions, &ratings, &docs, &pre, ctx.threads)?;
    eprintln!("done ({:.1?})", started.elapsed());
    crate::tsv::write_file(&out, |w| {
        writeln!(w, "n0\tgrowth\tdownscale\tk1\tb\tquery_mode\tk\tobjective")?;
        for row in &outcome.report {
            let p = &row.params;
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.6}",
                p.n0, p.growth, p.downscale, p.bm25.k1, p.bm25.b, p.query_mode, p.k, row.objective
            )?;
        }
        Ok(())
    })?;
    let best = outcome.best;
    let objective = outcome
        .report
        .iter()
        .find(|r| r.params == best)
        .map(|r| r.objective)
        .unwrap_or(0.0);
    Ok(Summary::default()
        .with("configs", outcome.report.len())
        .with("best_n0", best.n0)
        .with("best_growth", best.growth)
        .with("best_downscale", best.downscale)
        .with("best_k1", best.bm25.k1)
        .with("best_b", best.bm25.b)
        .with("best_query_mode", best.query_mode)
        .with("objective", format!("{objective:.6}"))
        .with("out", out.display()))
}

fn load_runs(path: PathBuf) -> std::result::Result<Vec<Ranking>, Failure> {
    Ok(read_run(&existing(path)?)?)
}

fn evaluate(ctx: &Ctx, a: EvalArgs, oracle: bool) -> CmdResult {
    let split = ctx.split(a.snap.split)?;
    let runs = load_runs(a.run)?;
    let snap = ctx.load_snapshot(a.snap.snapshot)?;
    let mut cfg = ctx.cfg.eval_config();
    if let Some(g) = a.gain {
        cfg.gain = g;
    }
    let ratings = split_ratings(&snap, split);
    let report = if oracle {
        evaluate_oracle(&runs, &ratings, &cfg)?
    } else {
        evaluate_run(&runs, &ratings, &cfg)?
    };
    if !report.zero_idcg.is_empty() {
        eprintln!(
            "{} questions have no positively rated statements",
            report.zero_idcg.len()
        );
    }
    if let Some(out) = &a.out {
        report.write_tsv(out)?;
    }
    let key = if oracle { "oracle_ndcg" } else { "mean_ndcg" };
    Ok(Summary::default()
        .with(key, format!("{:.6}", report.mean_ndcg))
        .with("questions", report.question_count)
        .with("zero_idcg", report.zero_idcg.len())
        .with("gain", cfg.gain))
}

fn recall_curve(ctx: &Ctx, a: RecallArgs) -> CmdResult {
    let split = ctx.split(a.snap.split)?;
    let out = ctx.output(a.out, format!("recall.{split}.tsv"))?;
    let runs = load_runs(a.run)?;
    let snap = ctx.load_snapshot(a.snap.snapshot)?;
    let ratings = split_ratings(&snap, split);
    let table = recall_by_rating(&runs, &ratings, &a.depths)?;
    table.write_tsv(&out)?;
    let mut summary = Summary::default().with("rows", table.rows.len());
    if let Some(&max) = a.depths.iter().max() {
        if let Some(r) = table.get(crate::eval::RatingCategory::Positive, max) {
            summary = summary.with(&format!("recall_gt0_at_{max}"), format!("{r:.6}"));
        }
    }
    Ok(summary.with("out", out.display()))
}

fn export_candidates(ctx: &Ctx, a: ExportArgs) -> CmdResult {
    let runs = load_runs(a.run)?;
    let snap = ctx.load_snapshot(a.snapshot)?;
    let k = a.k.or(ctx.cfg.retrieval.k).unwrap_or(usize::MAX);
    if k == 0 {
        return Err(Failure::Usage("--k must be positive".into()));
    }
    let mut rows = 0;
    let runs: Vec<Ranking> = runs
        .into_iter()
        .map(|r| {
            let r = r.truncated(k);
            rows += r.len();
            r
        })
        .collect();
    for r in &runs {
        if let Some(bad) = r.items.iter().find(|i| !snap.corpus.contains(i.statement_id.as_str())) {
            return Err(Failure::Data(Error::UnknownStatement(bad.statement_id.clone())));
        }
    }
    write_run(&runs, &a.out)?;
    Ok(Summary::default()
        .with("questions", runs.len())
        .with("rows", rows)
        .with("out", a.out.display()))
}

fn ensemble(a: EnsembleArgs) -> CmdResult {
    let candidates = load_runs(a.candidates)?;
    let mut members = Vec::new();
    for p in a.scores {
        members.push(ScoreFile::read(&existing(p)?)?);
    }
    let spec = if a.weights.is_empty() {
        EnsembleSpec::uniform(members.len())
    } else {
        EnsembleSpec { weights: a.weights }
    };
    if spec.weights.len() != members.len() {
        return Err(Failure::Usage(format!(
            "{} weights for {} score files",
            spec.weights.len(),
            members.len()
        )));
    }
    spec.validate()?;
    let mut ignored = 0;
    let mut out = Vec::with_capacity(candidates.len());
    for cand in &candidates {
        let mut ranked = Vec::with_capacity(members.len());
        for m in &members {
            let r = score_to_ranking(cand, m)?;
            ignored += r.ignored.len();
            ranked.push(r.ranking);
        }
        out.push(aggregate(&ranked, &spec)?);
    }
    if ignored > 0 {
        eprintln!("warning: {ignored} scores refer to statements outside the candidate lists (ignored)");
    }
    write_run(&out, &a.out)?;
    Ok(Summary::default()
        .with("questions", out.len())
        .with("members", members.len())
        .with("ignored_scores", ignored)
        .with("out", a.out.display()))
}

fn submit(a: SubmitArgs) -> CmdResult {
    let runs = load_runs(a.run)?;
    write_submission(&runs, &a.out)?;
    Ok(Summary::default()
        .with("questions", runs.len())
        .with("lines", runs.iter().map(Ranking::len).sum::<usize>())
        .with("out", a.out.display()))
}
