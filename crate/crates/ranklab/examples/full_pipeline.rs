//! The whole pipeline in memory: generate a benchmark, retrieve with
//! BM25, train the scorer, rerank with both heads, evaluate, and test
//! significance. The file-based equivalent is `ranklab demo`.
//!
//! Run: `cargo run --example full_pipeline`

use ranklab::corpus::{build_balanced_training_set, Run, RunEntry};
use ranklab::metrics::{evaluate_run, paired_permutation_test, MetricReport};
use ranklab::retriever::{Bm25Params, InvertedIndex};
use ranklab::scorer::{rerank_cross_encoder, rerank_mcqa, LinearScorer, ScoreMode};
use ranklab::synth::{generate, SynthConfig};
use ranklab::training::{sample_hard_negatives, train, TrainConfig, ValidationSet};

const SEED: u64 = 42;

fn main() -> ranklab::Result<()> {
    let bench = generate(&SynthConfig {
        seed: SEED,
        ..SynthConfig::default()
    })?;
    println!(
        "benchmark: {} docs, {} queries ({} train / {} validation)",
        bench.collection.len(),
        bench.queries.len(),
        bench.train_queries.len(),
        bench.val_queries.len(),
    );

    let index = InvertedIndex::build(&bench.collection, Bm25Params::default())?;

    // First stage: BM25 top-10 per query.
    let mut bm25_entries = Vec::new();
    for query in bench.queries.iter() {
        bm25_entries.extend(index.retrieve_topk(query, 10)?);
    }
    let bm25_run = Run::from_entries(bm25_entries)?;

    // Training pairs: qrels positives balanced against hard negatives.
    let train_qrels = bench.qrels.filter_queries(&bench.train_queries);
    let mut negatives = Vec::new();
    for query in bench.train_queries.iter() {
        negatives.extend(sample_hard_negatives(&index, &train_qrels, query, 4, SEED)?);
    }
    let pairs = build_balanced_training_set(&train_qrels, &negatives, SEED)?;

    let mut val_entries = Vec::new();
    for query in bench.val_queries.iter() {
        val_entries.extend(index.retrieve_topk(query, 10)?);
    }
    let val_run = Run::from_entries(val_entries)?;
    let validation = ValidationSet {
        queries: &bench.val_queries,
        qrels: &bench.qrels,
        candidates: &val_run,
    };
    let (scorer, history) = train(
        &LinearScorer::zeros(),
        &pairs,
        &validation,
        &TrainConfig {
            learning_rate: 0.02,
            seed: SEED,
            ..TrainConfig::default()
        },
        &bench.collection,
        &bench.train_queries,
        &index,
    )?;
    println!(
        "trained on {} pairs, {} epochs, best epoch {}",
        pairs.len(),
        history.records.len(),
        history.best_epoch,
    );

    // Rerank the BM25 candidates with each head.
    let rerank = |mode: ScoreMode| -> ranklab::Result<Run> {
        let mut entries = Vec::new();
        for (qid, list) in bm25_run.rankings() {
            let query = bench.queries.get(qid).expect("query exists");
            let candidates: Vec<_> = list
                .iter()
                .map(|e| bench.collection.get(&e.doc_id).expect("doc exists").clone())
                .collect();
            let reranked = match mode {
                ScoreMode::CrossEncoder => {
                    rerank_cross_encoder(&scorer, query, &candidates, &index)?
                }
                ScoreMode::Mcqa => rerank_mcqa(&scorer, query, &candidates, &index)?,
            };
            entries.extend(reranked.into_iter().enumerate().map(|(i, c)| RunEntry {
                query_id: qid.to_string(),
                doc_id: c.doc_id,
                rank: i + 1,
                score: c.logit,
            }));
        }
        Run::from_entries(entries)
    };
    let ce_run = rerank(ScoreMode::CrossEncoder)?;
    let mcqa_run = rerank(ScoreMode::Mcqa)?;

    let eval = |run: &Run| -> ranklab::Result<MetricReport> {
        evaluate_run(run, &bench.qrels, &[1, 5], 10, None)
    };
    let bm25_report = eval(&bm25_run)?;
    let ce_report = eval(&ce_run)?;
    let mcqa_report = eval(&mcqa_run)?;

    println!("\nsystem            recall@1  recall@5  mrr@10");
    for (name, report) in [
        ("bm25", &bm25_report),
        ("cross-encoder", &ce_report),
        ("mcqa", &mcqa_report),
    ] {
        println!(
            "{name:<16}  {:>8.4}  {:>8.4}  {:>6.4}",
            report.recall[&1], report.recall[&5], report.mrr,
        );
    }

    let rr = |report: &MetricReport| {
        report
            .per_query
            .iter()
            .map(|(q, m)| (q.clone(), m.reciprocal_rank.unwrap()))
            .collect()
    };
    let p = paired_permutation_test(&rr(&ce_report), &rr(&bm25_report), 10_000, SEED)?;
    println!("\nreranker vs bm25, reciprocal rank: p = {p:.6}");
    Ok(())
}
