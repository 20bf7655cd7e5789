//! Desk-scale retrieval and reranking lab.
//!
//! The crate wires a complete retrieve-then-rerank pipeline:
//!
//! ```text
//! collection ─→ inverted index ─→ BM25 top-k ─→ rerank (cross-encoder | mcqa)
//!                                     │                     │
//!                                   run file ─────────→ metrics + significance
//! ```
//!
//! The relevance scorer is a linear model over a hand-crafted joint
//! feature encoding of (query, document). The same weights drive two
//! heads: a sigmoid cross-encoder head that scores each candidate
//! independently, and an MCQA head that softmax-normalizes scores over
//! the candidate set. Both heads are strictly increasing in the shared
//! logit, so they always produce the same ranking.
//!
//! All stores (collections, query sets, qrels, indexes) are immutable
//! once loaded, and every operation is deterministic given its inputs
//! and an explicit seed.
//!
//! Start with the runnable examples (`cargo run --example <name>`):
//! `bm25_search`, `encode_features`, `rerank_two_heads`,
//! `train_reranker`, `evaluate_run`, `significance`, `full_pipeline`.
//! The same functionality is scriptable through the `ranklab` binary;
//! see the README.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod metrics;
pub mod retriever;
pub mod scorer;
pub mod synth;
pub mod text;
pub mod training;

pub use error::{Error, Result};
