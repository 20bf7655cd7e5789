//! First-stage retrieval: build an inverted index over a tiny corpus
//! and rank documents with BM25.
//!
//! Run: `cargo run --example bm25_search`

use ranklab::corpus::{Collection, Document, Query};
use ranklab::retriever::{Bm25Params, InvertedIndex};
use ranklab::text::tokenize;

fn main() -> ranklab::Result<()> {
    let docs = [
        ("d1", "green tea contains antioxidants and may improve brain function"),
        ("d2", "black tea and green tea both come from the same plant"),
        ("d3", "coffee beans are roasted at high temperature"),
        ("d4", "tea tea tea tea tea"),
        ("d5", "a general discussion of beverages around the world"),
    ];
    let collection = Collection::from_documents(
        docs.iter()
            .map(|(id, text)| Document {
                id: id.to_string(),
                text: text.to_string(),
            })
            .collect(),
    )?;

    let index = InvertedIndex::build(&collection, Bm25Params::default())?;
    println!(
        "indexed {} documents, avg length {:.2} tokens",
        index.doc_count(),
        index.stats().avg_doc_len()
    );

    let query = Query {
        id: "q1".to_string(),
        text: "green tea health benefits".to_string(),
    };
    println!("\nquery: {:?}", query.text);
    println!("tokens: {:?}\n", tokenize(&query.text));

    for entry in index.retrieve_topk(&query, 10)? {
        let text = &collection.get(&entry.doc_id).unwrap().text;
        println!("rank {}  {:.4}  {}  {}", entry.rank, entry.score, entry.doc_id, text);
    }

    // Keyword stuffing saturates: d4 repeats "tea" five times but does
    // not dominate the list.
    let stuffed = index.bm25_score(&tokenize("tea"), "d4")?;
    let single = index.bm25_score(&tokenize("tea"), "d2")?;
    println!("\nscore for bare `tea`: d4 (tf=5) {stuffed:.4} vs d2 (tf=2) {single:.4}");
    Ok(())
}
