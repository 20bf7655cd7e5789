//! The joint feature encoding behind the relevance scorer: eight
//! numbers per (query, document) pair.
//!
//! Run: `cargo run --example encode_features`

use ranklab::corpus::{Collection, Document, Query};
use ranklab::retriever::{Bm25Params, InvertedIndex};
use ranklab::scorer::encode;

const FEATURE_NAMES: [&str; 8] = [
    "unigram overlap",
    "idf-weighted overlap",
    "bm25 score",
    "jaccard",
    "bigram overlap",
    "query coverage",
    "log(1+doc len)",
    "log(1+query len)",
];

fn main() -> ranklab::Result<()> {
    let docs = vec![
        Document {
            id: "relevant".to_string(),
            text: "green tea improves health and focus".to_string(),
        },
        Document {
            id: "stuffed".to_string(),
            text: "green green green tea tea discussion of other plants entirely \
                   with much longer rambling text about nothing in particular"
                .to_string(),
        },
        Document {
            id: "unrelated".to_string(),
            text: "compilers translate source code".to_string(),
        },
    ];
    let collection = Collection::from_documents(docs.clone())?;
    let index = InvertedIndex::build(&collection, Bm25Params::default())?;
    let query = Query {
        id: "q1".to_string(),
        text: "green tea benefits".to_string(),
    };

    println!("query: {:?}\n", query.text);
    for doc in &docs {
        let fv = encode(&query, doc, &index)?;
        println!("{} ({:?})", doc.id, doc.text);
        for (name, value) in FEATURE_NAMES.iter().zip(fv.values.iter()) {
            println!("  {name:<22} {value:>8.4}");
        }
        println!();
    }
    Ok(())
}
