//! Inverted-index BM25 first-stage retrieval.
//!
//! Scores follow Okapi BM25 with a plus-one IDF:
//!
//! ```text
//! score(q, d) = Σ_{t in q} idf(t) · tf · (k1 + 1) / (tf + k1 · (1 - b + b · |d| / avgdl))
//! ```
//!
//! The sum runs over the query token multiset, so a repeated query term
//! contributes once per occurrence. The plus-one IDF variant keeps every
//! term weight positive, which makes "no query term in the document"
//! equivalent to "score zero".

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Collection, Query, RunEntry};
use crate::error::{Error, Result};
use crate::text::{tokenize, CorpusStats};

/// Okapi parameters. `k1` controls term-frequency saturation and `b`
/// the strength of document-length normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn new(k1: f64, b: f64) -> Result<Self> {
        if !k1.is_finite() || k1 < 0.0 {
            return Err(Error::InvalidArgument(format!("k1 must be >= 0, got {k1}")));
        }
        if !b.is_finite() || !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidArgument(format!(
                "b must be in [0, 1], got {b}"
            )));
        }
        Ok(Bm25Params { k1, b })
    }
}

/// Term -> postings map with document lengths and corpus statistics.
/// Immutable after build; posting lists are sorted by doc id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    postings: std::collections::BTreeMap<String, Vec<(String, u32)>>,
    doc_len: std::collections::BTreeMap<String, usize>,
    stats: CorpusStats,
    params: Bm25Params,
}

impl InvertedIndex {
    /// Index a collection. Deterministic for a given collection.
    pub fn build(collection: &Collection, params: Bm25Params) -> Result<Self> {
        // Re-validate in case params were constructed literally.
        let params = Bm25Params::new(params.k1, params.b)?;
        let mut postings: std::collections::BTreeMap<String, Vec<(String, u32)>> =
            std::collections::BTreeMap::new();
        let mut doc_len = std::collections::BTreeMap::new();
        let mut doc_freq = std::collections::BTreeMap::new();
        let mut total_len = 0usize;
        for doc in collection.iter() {
            let tokens = tokenize(&doc.text);
            total_len += tokens.len();
            doc_len.insert(doc.id.clone(), tokens.len());
            let mut tf: std::collections::BTreeMap<&str, u32> = std::collections::BTreeMap::new();
            for t in &tokens {
                *tf.entry(t.as_str()).or_insert(0) += 1;
            }
            for (term, count) in tf {
                *doc_freq.entry(term.to_string()).or_insert(0) += 1;
                postings
                    .entry(term.to_string())
                    .or_default()
                    .push((doc.id.clone(), count));
            }
        }
        for list in postings.values_mut() {
            list.sort_by(|a, b| a.0.cmp(&b.0));
        }
        let n = collection.len();
        let avg_doc_len = if n == 0 { 0.0 } else { total_len as f64 / n as f64 };
        Ok(InvertedIndex {
            postings,
            doc_len,
            stats: CorpusStats::new(n, doc_freq, avg_doc_len),
            params,
        })
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn doc_count(&self) -> usize {
        self.stats.doc_count()
    }

    /// Number of distinct terms in the index.
    pub fn term_count(&self) -> usize {
        self.postings.len()
    }

    pub fn contains_doc(&self, doc_id: &str) -> bool {
        self.doc_len.contains_key(doc_id)
    }

    pub fn doc_len(&self, doc_id: &str) -> Option<usize> {
        self.doc_len.get(doc_id).copied()
    }

    fn term_frequency(&self, term: &str, doc_id: &str) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| {
                list.binary_search_by(|(d, _)| d.as_str().cmp(doc_id))
                    .ok()
                    .map(|i| list[i].1)
            })
            .unwrap_or(0)
    }

    /// Saturated term-frequency weight for one (term, document) pair.
    fn tf_weight(&self, tf: u32, doc_len: usize) -> f64 {
        let Bm25Params { k1, b } = self.params;
        let tf = tf as f64;
        let norm = 1.0 - b + b * doc_len as f64 / self.stats.avg_doc_len();
        tf * (k1 + 1.0) / (tf + k1 * norm)
    }

    /// BM25 score of one indexed document for a tokenized query.
    /// Zero when no query term occurs in the document.
    pub fn bm25_score(&self, query: &[String], doc_id: &str) -> Result<f64> {
        let dl = self
            .doc_len(doc_id)
            .ok_or_else(|| Error::Data(format!("unknown document id `{doc_id}`")))?;
        let mut score = 0.0;
        for term in query {
            let tf = self.term_frequency(term, doc_id);
            if tf == 0 {
                continue;
            }
            score += self.stats.idf(term)? * self.tf_weight(tf, dl);
        }
        Ok(score)
    }

    /// Rank the top-k documents for a query. Only documents with a
    /// positive score are returned, sorted by score descending with
    /// ties broken by doc id ascending; ranks are assigned 1..n.
    pub fn retrieve_topk(&self, query: &Query, k: usize) -> Result<Vec<RunEntry>> {
        if k < 1 {
            return Err(Error::InvalidArgument(format!("k must be >= 1, got {k}")));
        }
        let tokens = tokenize(&query.text);
        let mut scores: HashMap<&str, f64> = HashMap::new();
        for term in &tokens {
            let Some(list) = self.postings.get(term) else {
                continue;
            };
            let idf = self.stats.idf(term)?;
            for (doc_id, tf) in list {
                let dl = self.doc_len[doc_id];
                *scores.entry(doc_id.as_str()).or_insert(0.0) += idf * self.tf_weight(*tf, dl);
            }
        }
        let mut ranked: Vec<(&str, f64)> =
            scores.into_iter().filter(|&(_, s)| s > 0.0).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        ranked.truncate(k);
        Ok(ranked
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| RunEntry {
                query_id: query.id.clone(),
                doc_id: doc_id.to_string(),
                rank: i + 1,
                score,
            })
            .collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string(self)
            .map_err(|e| Error::Data(format!("cannot serialize index: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let index: InvertedIndex = serde_json::from_str(&raw)
            .map_err(|e| Error::parse(path, 0, format!("invalid index file: {e}")))?;
        Bm25Params::new(index.params.k1, index.params.b)?;
        if index.stats.doc_count() != index.doc_len.len() {
            return Err(Error::parse(
                path,
                0,
                "index document count does not match document lengths",
            ));
        }
        Ok(index)
    }
}
