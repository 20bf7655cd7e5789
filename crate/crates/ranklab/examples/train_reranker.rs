//! Train the linear scorer with BCE-with-logits and hard negatives
//! mined from the BM25 ranking.
//!
//! Run: `cargo run --example train_reranker`

use ranklab::corpus::{build_balanced_training_set, Run};
use ranklab::retriever::{Bm25Params, InvertedIndex};
use ranklab::scorer::LinearScorer;
use ranklab::synth::{generate, SynthConfig};
use ranklab::training::{sample_hard_negatives, train, TrainConfig, ValidationSet};

fn main() -> ranklab::Result<()> {
    // A generated corpus with planted relevance; see the synth module.
    let bench = generate(&SynthConfig {
        num_queries: 30,
        background_docs: 40,
        seed: 9,
    })?;
    let index = InvertedIndex::build(&bench.collection, Bm25Params::default())?;

    // Positives come from qrels; negatives are the top-ranked
    // not-relevant BM25 hits, the hardest examples available.
    let train_qrels = bench.qrels.filter_queries(&bench.train_queries);
    let mut negatives = Vec::new();
    for query in bench.train_queries.iter() {
        negatives.extend(sample_hard_negatives(&index, &train_qrels, query, 4, 9)?);
    }
    let pairs = build_balanced_training_set(&train_qrels, &negatives, 9)?;
    println!(
        "training pairs: {} ({} positive, {} negative)",
        pairs.len(),
        pairs.iter().filter(|p| p.label == 1).count(),
        pairs.iter().filter(|p| p.label == 0).count(),
    );

    // Validation candidates: BM25 top-10 for the held-out queries.
    let mut val_entries = Vec::new();
    for query in bench.val_queries.iter() {
        val_entries.extend(index.retrieve_topk(query, 10)?);
    }
    let candidates = Run::from_entries(val_entries)?;
    let validation = ValidationSet {
        queries: &bench.val_queries,
        qrels: &bench.qrels,
        candidates: &candidates,
    };

    let config = TrainConfig {
        batch_size: 8,
        learning_rate: 0.02,
        seed: 9,
        ..TrainConfig::default()
    };
    let (scorer, history) = train(
        &LinearScorer::zeros(),
        &pairs,
        &validation,
        &config,
        &bench.collection,
        &bench.train_queries,
        &index,
    )?;

    println!("\nepoch  train_loss  val_loss  val_mrr@10");
    for r in &history.records {
        println!(
            "{:>5}  {:>10.4}  {:>8.4}  {:>10.4}",
            r.epoch, r.train_loss, r.val_loss, r.val_mrr10
        );
    }
    println!("\nbest epoch: {}", history.best_epoch);
    println!("weights: {:?}", scorer.weights.map(|w| (w * 1e4).round() / 1e4));
    println!("bias: {:.4}", scorer.bias);
    Ok(())
}
