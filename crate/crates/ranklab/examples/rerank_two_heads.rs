//! One set of weights, two heads: the cross-encoder head scores each
//! candidate independently through a sigmoid, the MCQA head treats the
//! candidates as a multiple-choice option set and softmax-normalizes.
//! Both are strictly increasing in the shared logit, so the rankings
//! always agree.
//!
//! Run: `cargo run --example rerank_two_heads`

use ranklab::corpus::{Collection, Document, Query};
use ranklab::retriever::{Bm25Params, InvertedIndex};
use ranklab::scorer::{rerank_cross_encoder, rerank_mcqa, LinearScorer, FEATURE_DIM};

fn main() -> ranklab::Result<()> {
    let candidates = vec![
        Document {
            id: "a".to_string(),
            text: "resetting a password is done from the login page".to_string(),
        },
        Document {
            id: "b".to_string(),
            text: "our business hours are nine to five".to_string(),
        },
        Document {
            id: "c".to_string(),
            text: "password rules require twelve characters".to_string(),
        },
        Document {
            id: "d".to_string(),
            text: "check your connection and try again".to_string(),
        },
    ];
    let collection = Collection::from_documents(candidates.clone())?;
    let index = InvertedIndex::build(&collection, Bm25Params::default())?;
    let query = Query {
        id: "q1".to_string(),
        text: "how can i reset my password".to_string(),
    };

    // A scorer with hand-set weights on overlap, bm25, and coverage.
    let mut weights = [0.0; FEATURE_DIM];
    weights[0] = 0.6;
    weights[2] = 0.4;
    weights[5] = 1.5;
    let scorer = LinearScorer::new(weights, -1.0)?;

    let ce = rerank_cross_encoder(&scorer, &query, &candidates, &index)?;
    let mcqa = rerank_mcqa(&scorer, &query, &candidates, &index)?;

    println!("query: {:?}\n", query.text);
    println!("cross-encoder head (independent sigmoid probabilities):");
    for c in &ce {
        println!("  {}  logit {:+.4}  p = {:.4}", c.doc_id, c.logit, c.probability);
    }
    println!("\nmcqa head (softmax over the option set, sums to 1):");
    for c in &mcqa {
        println!("  {}  logit {:+.4}  p = {:.4}", c.doc_id, c.logit, c.probability);
    }

    let same_order = ce
        .iter()
        .zip(&mcqa)
        .all(|(x, y)| x.doc_id == y.doc_id);
    println!("\nidentical ranking: {same_order}");
    let total: f64 = mcqa.iter().map(|c| c.probability).sum();
    println!("mcqa probabilities sum to {total:.12}");
    Ok(())
}
