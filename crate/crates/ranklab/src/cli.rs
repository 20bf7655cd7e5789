//! Batch orchestration of the pipeline: index, retrieve, train,
//! rerank, eval, compare, and an end-to-end demo on generated
//! fixtures.
//!
//! Configuration comes from flags plus an optional flat `key = value`
//! file (`--config`); flags win. Exit codes: 0 success, 1 usage error,
//! 2 data error, 3 internal error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::corpus::{
    build_balanced_training_set, load_training_pairs, write_training_pairs, Collection, Qrels,
    QuerySet, ReferenceAnswers, Run, RunEntry, TrainingPair,
};
use crate::error::{Error, Result};
use crate::metrics::{self, MetricReport, PerQuery, RougeInputs};
use crate::retriever::{Bm25Params, InvertedIndex};
use crate::scorer::{rerank_cross_encoder, rerank_mcqa, LinearScorer, ScoreMode};
use crate::synth::{generate, SynthConfig};
use crate::training::{train, TrainConfig, ValidationSet};

#[derive(Debug, Parser)]
#[command(
    name = "ranklab",
    version,
    about = "BM25 retrieval, linear reranking, and IR evaluation"
)]
struct Cli {
    /// Flat `key = value` defaults file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and serialize an inverted index from a collection TSV.
    Index(IndexArgs),
    /// Write a BM25 run file for a query set.
    Retrieve(RetrieveArgs),
    /// Train the linear scorer; writes model file and history CSV.
    Train(TrainArgs),
    /// Rerank a first-stage run with a trained model.
    Rerank(RerankArgs),
    /// Evaluate run file(s) against qrels; prints a metrics table.
    Eval(EvalArgs),
    /// Paired sign-flip permutation test between two per-query CSVs.
    Compare(CompareArgs),
    /// Run the whole pipeline end-to-end on generated fixtures.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[arg(long)]
    collection: Option<PathBuf>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RetrieveArgs {
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    /// Candidates to retrieve per query.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tag: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    collection: Option<PathBuf>,
    /// Training query set.
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Training pairs JSONL; generated from qrels plus hard negatives
    /// when absent.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Write the training pairs actually used.
    #[arg(long)]
    pairs_out: Option<PathBuf>,
    /// Hard negatives sampled per query when generating pairs.
    #[arg(long)]
    hard_negatives: Option<usize>,
    /// First-stage run holding validation candidates.
    #[arg(long)]
    val_run: Option<PathBuf>,
    /// Validation queries (defaults to --queries).
    #[arg(long)]
    val_queries: Option<PathBuf>,
    /// Validation qrels (defaults to --qrels).
    #[arg(long)]
    val_qrels: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[arg(long)]
    history_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RerankArgs {
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long)]
    collection: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// First-stage run to rerank.
    #[arg(long)]
    run: Option<PathBuf>,
    /// `cross-encoder` (alias `ce`) or `mcqa`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Run file(s) to evaluate; repeatable.
    #[arg(long = "run")]
    runs: Vec<PathBuf>,
    #[arg(long)]
    qrels: Option<PathBuf>,
    /// Needed together with --references for the ROUGE-L column.
    #[arg(long)]
    collection: Option<PathBuf>,
    #[arg(long)]
    references: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated recall cutoffs, e.g. `1,5`.
    #[arg(long)]
    recall_cutoffs: Option<String>,
    #[arg(long)]
    mrr_cutoff: Option<usize>,
    /// Also write the table here.
    #[arg(long)]
    table_out: Option<PathBuf>,
    /// Aggregate metrics as CSV.
    #[arg(long)]
    csv_out: Option<PathBuf>,
    /// Directory for per-query CSVs (one per run, named by tag).
    #[arg(long)]
    per_query_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Per-query CSV of system A.
    #[arg(long)]
    a: Option<PathBuf>,
    /// Per-query CSV of system B.
    #[arg(long)]
    b: Option<PathBuf>,
    /// Column to compare (default `reciprocal_rank`).
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Flat `key = value` defaults, lowest precedence.
struct ConfigMap(BTreeMap<String, String>);

impl ConfigMap {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let raw = fs::read_to_string(path).map_err(|e| {
                Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (lineno, line) in raw.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "{}:{}: expected `key = value`",
                        path.display(),
                        lineno + 1
                    ))
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(ConfigMap(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|_| {
                Error::InvalidArgument(format!("config key `{key}`: cannot parse `{raw}`"))
            }),
        }
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::InvalidArgument(format!("missing required --{flag}")))
}

fn parse_mode(raw: &str) -> Result<ScoreMode> {
    match raw {
        "cross-encoder" | "ce" => Ok(ScoreMode::CrossEncoder),
        "mcqa" => Ok(ScoreMode::Mcqa),
        other => Err(Error::InvalidArgument(format!(
            "mode must be `cross-encoder` or `mcqa`, got `{other}`"
        ))),
    }
}

fn parse_cutoffs(raw: &str) -> Result<Vec<usize>> {
    let cutoffs: Vec<usize> = raw
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("invalid cutoff `{s}`")))
        })
        .collect::<Result<_>>()?;
    if cutoffs.is_empty() || cutoffs.contains(&0) {
        return Err(Error::InvalidArgument(
            "cutoffs must be positive integers".to_string(),
        ));
    }
    Ok(cutoffs)
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Tag for a reranked run: model file stem, an 8-hex-digit hash of the
/// model bytes, and the head; e.g. `model-1a2b3c4d-ce`.
fn rerank_tag(model_path: &Path, mode: ScoreMode) -> Result<String> {
    let bytes = fs::read(model_path).map_err(|e| Error::io(model_path, e))?;
    let stem: String = model_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".to_string())
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '-' })
        .collect();
    let hash = fnv1a64(&bytes) as u32;
    let suffix = match mode {
        ScoreMode::CrossEncoder => "ce",
        ScoreMode::Mcqa => "mcqa",
    };
    Ok(format!("{stem}-{hash:08x}-{suffix}"))
}

/// Split a run tag into table columns. Tags produced by `rerank` end
/// in the head name; anything else is treated as a plain retriever run.
fn split_tag(tag: &str) -> (String, String) {
    if let Some(model) = tag.strip_suffix("-ce") {
        (model.to_string(), "cross-encoder".to_string())
    } else if let Some(model) = tag.strip_suffix("-mcqa") {
        (model.to_string(), "mcqa".to_string())
    } else {
        (tag.to_string(), "retrieval".to_string())
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct IndexParams {
    collection: PathBuf,
    k1: f64,
    b: f64,
    out: PathBuf,
}

fn cmd_index(params: &IndexParams) -> Result<()> {
    let collection = Collection::load(&params.collection)?;
    let index = InvertedIndex::build(&collection, Bm25Params::new(params.k1, params.b)?)?;
    index.save(&params.out)?;
    println!(
        "indexed {} documents ({} terms) -> {}",
        index.doc_count(),
        index.term_count(),
        params.out.display()
    );
    Ok(())
}

struct RetrieveParams {
    index: PathBuf,
    queries: PathBuf,
    k: usize,
    tag: String,
    out: PathBuf,
}

fn cmd_retrieve(params: &RetrieveParams) -> Result<()> {
    let index = InvertedIndex::load(&params.index)?;
    let queries = QuerySet::load(&params.queries)?;
    let mut entries = Vec::new();
    for query in queries.iter() {
        entries.extend(index.retrieve_topk(query, params.k)?);
    }
    let run = Run::from_entries(entries)?;
    run.write(&params.tag, &params.out)?;
    println!(
        "retrieved {} candidates over {} queries -> {}",
        run.entry_count(),
        run.query_count(),
        params.out.display()
    );
    Ok(())
}

struct TrainParams {
    index: PathBuf,
    collection: PathBuf,
    queries: PathBuf,
    qrels: PathBuf,
    pairs: Option<PathBuf>,
    pairs_out: Option<PathBuf>,
    hard_negatives: usize,
    val_run: PathBuf,
    val_queries: Option<PathBuf>,
    val_qrels: Option<PathBuf>,
    config: TrainConfig,
    model_out: PathBuf,
    history_out: PathBuf,
}

fn cmd_train(params: &TrainParams) -> Result<()> {
    let index = InvertedIndex::load(&params.index)?;
    let collection = Collection::load(&params.collection)?;
    let queries = QuerySet::load(&params.queries)?;
    let qrels = Qrels::load(&params.qrels)?;

    let pairs: Vec<TrainingPair> = match &params.pairs {
        Some(path) => load_training_pairs(path)?,
        None => {
            let train_qrels = qrels.filter_queries(&queries);
            let mut negatives = Vec::new();
            for query in queries.iter() {
                negatives.extend(crate::training::sample_hard_negatives(
                    &index,
                    &train_qrels,
                    query,
                    params.hard_negatives,
                    params.config.seed,
                )?);
            }
            build_balanced_training_set(&train_qrels, &negatives, params.config.seed)?
        }
    };
    if let Some(path) = &params.pairs_out {
        write_training_pairs(&pairs, path)?;
    }

    let val_run = Run::load(&params.val_run)?;
    let val_queries = match &params.val_queries {
        Some(path) => QuerySet::load(path)?,
        None => queries.clone(),
    };
    let val_qrels = match &params.val_qrels {
        Some(path) => Qrels::load(path)?,
        None => qrels.clone(),
    };
    let validation = ValidationSet {
        queries: &val_queries,
        qrels: &val_qrels,
        candidates: &val_run,
    };

    let (scorer, history) = train(
        &LinearScorer::zeros(),
        &pairs,
        &validation,
        &params.config,
        &collection,
        &queries,
        &index,
    )?;
    scorer.save(&params.model_out)?;
    fs::write(&params.history_out, history.to_csv())
        .map_err(|e| Error::io(&params.history_out, e))?;
    let last = history.records.last().expect("at least one epoch");
    println!(
        "trained on {} pairs for {} epochs (best epoch {}, val MRR@10 {:.4}) -> {}",
        pairs.len(),
        history.records.len(),
        history.best_epoch,
        history
            .records
            .iter()
            .find(|r| r.epoch == history.best_epoch)
            .unwrap_or(last)
            .val_mrr10,
        params.model_out.display()
    );
    Ok(())
}

struct RerankParams {
    index: PathBuf,
    collection: PathBuf,
    queries: PathBuf,
    model: PathBuf,
    run: PathBuf,
    mode: ScoreMode,
    out: PathBuf,
}

fn cmd_rerank(params: &RerankParams) -> Result<()> {
    let index = InvertedIndex::load(&params.index)?;
    let collection = Collection::load(&params.collection)?;
    let queries = QuerySet::load(&params.queries)?;
    let scorer = LinearScorer::load(&params.model)?;
    let first_stage = Run::load(&params.run)?;

    let mut entries = Vec::new();
    for (qid, list) in first_stage.rankings() {
        let query = queries
            .get(qid)
            .ok_or_else(|| Error::Data(format!("query `{qid}` not in query set")))?;
        let candidates: Vec<_> = list
            .iter()
            .map(|e| {
                collection
                    .get(&e.doc_id)
                    .cloned()
                    .ok_or_else(|| Error::Data(format!("document `{}` not in collection", e.doc_id)))
            })
            .collect::<Result<_>>()?;
        let reranked = match params.mode {
            ScoreMode::CrossEncoder => rerank_cross_encoder(&scorer, query, &candidates, &index)?,
            ScoreMode::Mcqa => rerank_mcqa(&scorer, query, &candidates, &index)?,
        };
        // The run score column carries the logit shared by both heads,
        // so the two modes serialize identical rankings.
        entries.extend(reranked.into_iter().enumerate().map(|(i, c)| RunEntry {
            query_id: qid.to_string(),
            doc_id: c.doc_id,
            rank: i + 1,
            score: c.logit,
        }));
    }
    let run = Run::from_entries(entries)?;
    let tag = rerank_tag(&params.model, params.mode)?;
    run.write(&tag, &params.out)?;
    println!(
        "reranked {} queries with mode {} -> {}",
        run.query_count(),
        params.mode,
        params.out.display()
    );
    Ok(())
}

struct EvalParams {
    runs: Vec<PathBuf>,
    qrels: PathBuf,
    collection: Option<PathBuf>,
    references: Option<PathBuf>,
    beta: f64,
    recall_cutoffs: Vec<usize>,
    mrr_cutoff: usize,
    table_out: Option<PathBuf>,
    csv_out: Option<PathBuf>,
    per_query_dir: Option<PathBuf>,
}

fn render_table(rows: &[(String, String, &MetricReport)], cutoffs: &[usize], mrr_cutoff: usize) -> String {
    let mut header: Vec<String> = vec!["Model".to_string(), "Mode".to_string()];
    for k in cutoffs {
        header.push(format!("Recall@{k}"));
    }
    header.push(format!("MRR@{mrr_cutoff}"));
    header.push("ROUGE-L".to_string());

    let mut body: Vec<Vec<String>> = Vec::new();
    for (model, mode, report) in rows {
        let mut row = vec![model.clone(), mode.clone()];
        for k in cutoffs {
            row.push(format!("{:.4}", report.recall[k]));
        }
        row.push(format!("{:.4}", report.mrr));
        row.push(
            report
                .rouge_l
                .map_or_else(|| "-".to_string(), |r| format!("{r:.4}")),
        );
        body.push(row);
    }

    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String], widths: &[usize]| -> String {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let _ = writeln!(out, "{}", render_row(&header, &widths));
    let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    for row in &body {
        let _ = writeln!(out, "{}", render_row(row, &widths));
    }
    out
}

fn report_csv(rows: &[(String, String, &MetricReport)], cutoffs: &[usize], mrr_cutoff: usize) -> String {
    let mut out = String::from("model,mode");
    for k in cutoffs {
        let _ = write!(out, ",recall@{k}");
    }
    let _ = write!(out, ",mrr@{mrr_cutoff},rouge_l");
    out.push('\n');
    for (model, mode, report) in rows {
        let _ = write!(out, "{model},{mode}");
        for k in cutoffs {
            let _ = write!(out, ",{:.6}", report.recall[k]);
        }
        let _ = write!(out, ",{:.6}", report.mrr);
        match report.rouge_l {
            Some(r) => {
                let _ = writeln!(out, ",{r:.6}");
            }
            None => out.push_str(",\n"),
        }
    }
    out
}

fn per_query_csv(report: &MetricReport) -> String {
    let mut out = String::from("query_id");
    for k in &report.recall_cutoffs {
        let _ = write!(out, ",recall@{k}");
    }
    out.push_str(",reciprocal_rank,rouge_l\n");
    for (qid, m) in &report.per_query {
        let _ = write!(out, "{qid}");
        for k in &report.recall_cutoffs {
            match m.recall.get(k) {
                Some(v) => {
                    let _ = write!(out, ",{v:.6}");
                }
                None => out.push(','),
            }
        }
        match m.reciprocal_rank {
            Some(v) => {
                let _ = write!(out, ",{v:.6}");
            }
            None => out.push(','),
        }
        match m.rouge_l {
            Some(v) => {
                let _ = writeln!(out, ",{v:.6}");
            }
            None => out.push_str(",\n"),
        }
    }
    out
}

fn cmd_eval(params: &EvalParams) -> Result<()> {
    if params.runs.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one --run is required".to_string(),
        ));
    }
    let qrels = Qrels::load(&params.qrels)?;
    let rouge_inputs = match (&params.collection, &params.references) {
        (Some(coll), Some(refs)) => Some((Collection::load(coll)?, ReferenceAnswers::load(refs)?)),
        (None, None) => None,
        _ => {
            return Err(Error::InvalidArgument(
                "--collection and --references must be given together".to_string(),
            ))
        }
    };

    let mut reports: Vec<(String, String, MetricReport)> = Vec::new();
    for path in &params.runs {
        let (run, tag) = Run::load_tagged(path)?;
        let tag = tag.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".to_string())
        });
        let rouge = rouge_inputs.as_ref().map(|(coll, refs)| RougeInputs {
            collection: coll,
            references: refs,
            beta: params.beta,
        });
        let report = metrics::evaluate_run(
            &run,
            &qrels,
            &params.recall_cutoffs,
            params.mrr_cutoff,
            rouge.as_ref(),
        )?;
        let (model, mode) = split_tag(&tag);
        reports.push((model, mode, report));
    }

    let rows: Vec<(String, String, &MetricReport)> = reports
        .iter()
        .map(|(m, d, r)| (m.clone(), d.clone(), r))
        .collect();
    let table = render_table(&rows, &params.recall_cutoffs, params.mrr_cutoff);
    print!("{table}");
    if let Some(path) = &params.table_out {
        fs::write(path, &table).map_err(|e| Error::io(path, e))?;
    }
    if let Some(path) = &params.csv_out {
        fs::write(path, report_csv(&rows, &params.recall_cutoffs, params.mrr_cutoff))
            .map_err(|e| Error::io(path, e))?;
    }
    if let Some(dir) = &params.per_query_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for ((model, mode, report), path) in reports.iter().zip(&params.runs) {
            let tag = Run::load_tagged(path)?
                .1
                .unwrap_or_else(|| format!("{model}-{mode}"));
            let file = dir.join(format!("per_query_{tag}.csv"));
            fs::write(&file, per_query_csv(report)).map_err(|e| Error::io(&file, e))?;
        }
    }
    Ok(())
}

struct CompareParams {
    a: PathBuf,
    b: PathBuf,
    metric: String,
    iterations: usize,
    seed: u64,
    out: Option<PathBuf>,
}

fn read_per_query_column(path: &Path, metric: &str) -> Result<PerQuery> {
    let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = raw.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(path, 1, "empty per-query CSV"))?;
    let columns: Vec<&str> = header.split(',').collect();
    let col = columns
        .iter()
        .position(|c| *c == metric)
        .ok_or_else(|| {
            Error::Data(format!(
                "column `{metric}` not found in {}; available: {}",
                path.display(),
                columns.join(", ")
            ))
        })?;
    let mut values = PerQuery::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != columns.len() {
            return Err(Error::parse(path, lineno + 1, "ragged CSV row"));
        }
        let cell = cells[col];
        if cell.is_empty() {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("query {} has no `{metric}` value", cells[0]),
            ));
        }
        let value: f64 = cell.parse().map_err(|_| {
            Error::parse(path, lineno + 1, format!("invalid value `{cell}`"))
        })?;
        if values.insert(cells[0].to_string(), value).is_some() {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("duplicate query id `{}`", cells[0]),
            ));
        }
    }
    Ok(values)
}

fn cmd_compare(params: &CompareParams) -> Result<()> {
    let a = read_per_query_column(&params.a, &params.metric)?;
    let b = read_per_query_column(&params.b, &params.metric)?;
    let p = metrics::paired_permutation_test(&a, &b, params.iterations, params.seed)?;
    println!(
        "p-value ({}, {} iterations): {p:.6}",
        params.metric, params.iterations
    );
    if let Some(path) = &params.out {
        let contents = format!(
            "metric,iterations,p_value\n{},{},{p:.6}\n",
            params.metric, params.iterations
        );
        fs::write(path, contents).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

struct DemoParams {
    out_dir: PathBuf,
    seed: u64,
}

fn cmd_demo(params: &DemoParams) -> Result<()> {
    let out = &params.out_dir;
    let data = out.join("data");
    let runs = out.join("runs");
    let eval = out.join("eval");
    for dir in [out, &data, &runs, &eval] {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    println!("generating synthetic benchmark (seed {})", params.seed);
    let bench = generate(&SynthConfig {
        seed: params.seed,
        ..SynthConfig::default()
    })?;
    let collection_path = data.join("collection.tsv");
    let queries_path = data.join("queries.tsv");
    let train_queries_path = data.join("queries_train.tsv");
    let val_queries_path = data.join("queries_val.tsv");
    let qrels_path = data.join("qrels.txt");
    let references_path = data.join("references.tsv");
    bench.collection.write(&collection_path)?;
    bench.queries.write(&queries_path)?;
    bench.train_queries.write(&train_queries_path)?;
    bench.val_queries.write(&val_queries_path)?;
    bench.qrels.write(&qrels_path)?;
    bench.references.write(&references_path)?;

    let index_path = out.join("index.json");
    cmd_index(&IndexParams {
        collection: collection_path.clone(),
        k1: 1.2,
        b: 0.75,
        out: index_path.clone(),
    })?;

    let bm25_run = runs.join("bm25.run");
    cmd_retrieve(&RetrieveParams {
        index: index_path.clone(),
        queries: queries_path.clone(),
        k: 10,
        tag: "bm25".to_string(),
        out: bm25_run.clone(),
    })?;
    let val_run = runs.join("val.run");
    cmd_retrieve(&RetrieveParams {
        index: index_path.clone(),
        queries: val_queries_path.clone(),
        k: 10,
        tag: "bm25".to_string(),
        out: val_run.clone(),
    })?;

    let model_path = out.join("model.txt");
    let history_path = out.join("history.csv");
    cmd_train(&TrainParams {
        index: index_path.clone(),
        collection: collection_path.clone(),
        queries: train_queries_path.clone(),
        qrels: qrels_path.clone(),
        pairs: None,
        pairs_out: Some(out.join("pairs.jsonl")),
        hard_negatives: 4,
        val_run: val_run.clone(),
        val_queries: Some(val_queries_path.clone()),
        val_qrels: None,
        // Gentler rate than the training default: the benchmark's BM25
        // and idf-overlap features reach magnitudes near 12, where 0.1
        // makes plain GD oscillate.
        config: TrainConfig {
            seed: params.seed,
            learning_rate: 0.02,
            ..TrainConfig::default()
        },
        model_out: model_path.clone(),
        history_out: history_path,
    })?;

    let ce_run = runs.join("rerank_ce.run");
    let mcqa_run = runs.join("rerank_mcqa.run");
    for (mode, path) in [(ScoreMode::CrossEncoder, &ce_run), (ScoreMode::Mcqa, &mcqa_run)] {
        cmd_rerank(&RerankParams {
            index: index_path.clone(),
            collection: collection_path.clone(),
            queries: queries_path.clone(),
            model: model_path.clone(),
            run: bm25_run.clone(),
            mode,
            out: path.clone(),
        })?;
    }

    cmd_eval(&EvalParams {
        runs: vec![bm25_run, ce_run, mcqa_run],
        qrels: qrels_path,
        collection: Some(collection_path),
        references: Some(references_path),
        beta: 1.2,
        recall_cutoffs: vec![1, 5],
        mrr_cutoff: 10,
        table_out: Some(eval.join("report.txt")),
        csv_out: Some(eval.join("report.csv")),
        per_query_dir: Some(eval.clone()),
    })?;

    let ce_tag = rerank_tag(&model_path, ScoreMode::CrossEncoder)?;
    cmd_compare(&CompareParams {
        a: eval.join(format!("per_query_{ce_tag}.csv")),
        b: eval.join("per_query_bm25.csv"),
        metric: "reciprocal_rank".to_string(),
        iterations: 10_000,
        seed: params.seed,
        out: Some(eval.join("significance.csv")),
    })?;

    println!("demo outputs in {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

fn dispatch(cli: Cli) -> Result<()> {
    let config = ConfigMap::load(cli.config.as_deref())?;
    match cli.command {
        Command::Index(args) => cmd_index(&IndexParams {
            collection: require(args.collection.or(config.get("collection")?), "collection")?,
            k1: args.k1.or(config.get("k1")?).unwrap_or(1.2),
            b: args.b.or(config.get("b")?).unwrap_or(0.75),
            out: require(args.out.or(config.get("out")?), "out")?,
        }),
        Command::Retrieve(args) => cmd_retrieve(&RetrieveParams {
            index: require(args.index.or(config.get("index")?), "index")?,
            queries: require(args.queries.or(config.get("queries")?), "queries")?,
            k: args.k.or(config.get("k")?).unwrap_or(10),
            tag: args.tag.or(config.get("tag")?).unwrap_or_else(|| "bm25".to_string()),
            out: require(args.out.or(config.get("out")?), "out")?,
        }),
        Command::Train(args) => {
            let defaults = TrainConfig::default();
            cmd_train(&TrainParams {
                index: require(args.index.or(config.get("index")?), "index")?,
                collection: require(args.collection.or(config.get("collection")?), "collection")?,
                queries: require(args.queries.or(config.get("queries")?), "queries")?,
                qrels: require(args.qrels.or(config.get("qrels")?), "qrels")?,
                pairs: args.pairs.or(config.get("pairs")?),
                pairs_out: args.pairs_out.or(config.get("pairs_out")?),
                hard_negatives: args
                    .hard_negatives
                    .or(config.get("hard_negatives")?)
                    .unwrap_or(4),
                val_run: require(args.val_run.or(config.get("val_run")?), "val-run")?,
                val_queries: args.val_queries.or(config.get("val_queries")?),
                val_qrels: args.val_qrels.or(config.get("val_qrels")?),
                config: TrainConfig {
                    epochs: args.epochs.or(config.get("epochs")?).unwrap_or(defaults.epochs),
                    batch_size: args
                        .batch_size
                        .or(config.get("batch_size")?)
                        .unwrap_or(defaults.batch_size),
                    learning_rate: args
                        .learning_rate
                        .or(config.get("learning_rate")?)
                        .unwrap_or(defaults.learning_rate),
                    seed: args.seed.or(config.get("seed")?).unwrap_or(defaults.seed),
                    patience: args
                        .patience
                        .or(config.get("patience")?)
                        .unwrap_or(defaults.patience),
                },
                model_out: require(args.model_out.or(config.get("model_out")?), "model-out")?,
                history_out: require(
                    args.history_out.or(config.get("history_out")?),
                    "history-out",
                )?,
            })
        }
        Command::Rerank(args) => cmd_rerank(&RerankParams {
            index: require(args.index.or(config.get("index")?), "index")?,
            collection: require(args.collection.or(config.get("collection")?), "collection")?,
            queries: require(args.queries.or(config.get("queries")?), "queries")?,
            model: require(args.model.or(config.get("model")?), "model")?,
            run: require(args.run.or(config.get("run")?), "run")?,
            mode: parse_mode(&require(args.mode.or(config.get("mode")?), "mode")?)?,
            out: require(args.out.or(config.get("out")?), "out")?,
        }),
        Command::Eval(args) => {
            let runs = if args.runs.is_empty() {
                config
                    .get::<String>("run")?
                    .map(|raw| raw.split(',').map(PathBuf::from).collect())
                    .unwrap_or_default()
            } else {
                args.runs
            };
            cmd_eval(&EvalParams {
                runs,
                qrels: require(args.qrels.or(config.get("qrels")?), "qrels")?,
                collection: args.collection.or(config.get("collection")?),
                references: args.references.or(config.get("references")?),
                beta: args.beta.or(config.get("beta")?).unwrap_or(1.2),
                recall_cutoffs: parse_cutoffs(
                    &args
                        .recall_cutoffs
                        .or(config.get("recall_cutoffs")?)
                        .unwrap_or_else(|| "1,5".to_string()),
                )?,
                mrr_cutoff: args.mrr_cutoff.or(config.get("mrr_cutoff")?).unwrap_or(10),
                table_out: args.table_out.or(config.get("table_out")?),
                csv_out: args.csv_out.or(config.get("csv_out")?),
                per_query_dir: args.per_query_dir.or(config.get("per_query_dir")?),
            })
        }
        Command::Compare(args) => cmd_compare(&CompareParams {
            a: require(args.a.or(config.get("a")?), "a")?,
            b: require(args.b.or(config.get("b")?), "b")?,
            metric: args
                .metric
                .or(config.get("metric")?)
                .unwrap_or_else(|| "reciprocal_rank".to_string()),
            iterations: args
                .iterations
                .or(config.get("iterations")?)
                .unwrap_or(10_000),
            seed: args.seed.or(config.get("seed")?).unwrap_or(0),
            out: args.out.or(config.get("out")?),
        }),
        Command::Demo(args) => cmd_demo(&DemoParams {
            out_dir: require(args.out_dir.or(config.get("out_dir")?), "out-dir")?,
            seed: args.seed.or(config.get("seed")?).unwrap_or(42),
        }),
    }
}

/// Parse arguments, run the selected command, and map the outcome to a
/// process exit code: 0 success, 1 usage error, 2 data error,
/// 3 internal error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| dispatch(cli))) {
        Ok(Ok(())) => 0,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal failure");
            3
        }
    }
}
