//! The evaluation suite on a hand-built run: Recall@k, MRR@n, and
//! ROUGE-L of the rank-1 passage against a reference answer.
//!
//! Run: `cargo run --example evaluate_run`

use ranklab::corpus::{Collection, Document, Qrels, ReferenceAnswers, Run, RunEntry};
use ranklab::metrics::{evaluate_run, rouge_l, RougeInputs};

fn main() -> ranklab::Result<()> {
    let collection = Collection::from_documents(vec![
        Document {
            id: "d1".to_string(),
            text: "the cat sat on the mat".to_string(),
        },
        Document {
            id: "d2".to_string(),
            text: "dogs chase the mail carrier".to_string(),
        },
        Document {
            id: "d3".to_string(),
            text: "cats nap in the afternoon sun".to_string(),
        },
    ])?;

    // Two queries: q1 ranks its relevant doc first, q2 buries it.
    let run = Run::from_entries(vec![
        RunEntry { query_id: "q1".into(), doc_id: "d1".into(), rank: 1, score: 3.0 },
        RunEntry { query_id: "q1".into(), doc_id: "d2".into(), rank: 2, score: 2.0 },
        RunEntry { query_id: "q2".into(), doc_id: "d2".into(), rank: 1, score: 4.0 },
        RunEntry { query_id: "q2".into(), doc_id: "d1".into(), rank: 2, score: 3.5 },
        RunEntry { query_id: "q2".into(), doc_id: "d3".into(), rank: 3, score: 1.0 },
    ])?;

    let mut qrels = Qrels::new();
    qrels.add("q1", "d1", 1)?;
    qrels.add("q2", "d3", 1)?;

    let mut references = ReferenceAnswers::new();
    references.add("q1", "the cat sat on a mat")?;
    references.add("q2", "cats nap in the sun")?;

    let report = evaluate_run(
        &run,
        &qrels,
        &[1, 5],
        10,
        Some(&RougeInputs {
            collection: &collection,
            references: &references,
            beta: 1.2,
        }),
    )?;

    println!("aggregate:");
    for (k, v) in &report.recall {
        println!("  recall@{k}: {v:.4}");
    }
    println!("  mrr@{}: {:.4}", report.mrr_cutoff, report.mrr);
    println!("  rouge-l: {:.4}", report.rouge_l.unwrap());

    println!("\nper query:");
    for (qid, m) in &report.per_query {
        println!(
            "  {qid}: recall@1 {:.2}, rr {:.4}, rouge-l {:.4}",
            m.recall[&1],
            m.reciprocal_rank.unwrap(),
            m.rouge_l.unwrap(),
        );
    }

    // ROUGE-L by itself, with the recall-leaning beta.
    let score = rouge_l("the cat sat", "the cat ate", 1.2)?;
    println!("\nrouge_l(\"the cat sat\", \"the cat ate\") = {score:.4}");
    Ok(())
}
