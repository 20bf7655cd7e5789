//! Tokenization and corpus statistics shared by the retriever and the
//! feature encoder.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lowercase a string and split it on every maximal run of
/// non-alphanumeric characters. Numerals are kept, empty tokens never
/// appear, and re-tokenizing the space-join of the output returns the
/// same tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Document count, per-term document frequencies, and mean document
/// length for a tokenized corpus. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    doc_count: usize,
    doc_freq: BTreeMap<String, usize>,
    avg_doc_len: f64,
}

impl CorpusStats {
    pub fn new(doc_count: usize, doc_freq: BTreeMap<String, usize>, avg_doc_len: f64) -> Self {
        CorpusStats {
            doc_count,
            doc_freq,
            avg_doc_len,
        }
    }

    /// Build statistics from one token list per document.
    pub fn from_token_lists<'a, I>(lists: I) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let mut doc_count = 0usize;
        let mut total_len = 0usize;
        let mut doc_freq = BTreeMap::new();
        for tokens in lists {
            doc_count += 1;
            total_len += tokens.len();
            let mut seen: Vec<&String> = tokens.iter().collect();
            seen.sort_unstable();
            seen.dedup();
            for term in seen {
                *doc_freq.entry(term.clone()).or_insert(0) += 1;
            }
        }
        let avg_doc_len = if doc_count == 0 {
            0.0
        } else {
            total_len as f64 / doc_count as f64
        };
        CorpusStats {
            doc_count,
            doc_freq,
            avg_doc_len,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    /// Smoothed inverse document frequency:
    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`.
    ///
    /// The plus-one keeps the value strictly positive even when a term
    /// occurs in every document. Unseen terms use df = 0.
    pub fn idf(&self, term: &str) -> Result<f64> {
        if self.doc_count == 0 {
            return Err(Error::Data(
                "idf is undefined over an empty corpus".to_string(),
            ));
        }
        let n = self.doc_count as f64;
        let df = self.doc_freq(term) as f64;
        Ok((1.0 + (n - df + 0.5) / (df + 0.5)).ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenize_empty() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_splits_and_lowercases() {
        assert_eq!(tokenize("Green-Tea benefits!"), ["green", "tea", "benefits"]);
    }

    #[test]
    fn tokenize_keeps_numerals_in_runs() {
        assert_eq!(tokenize("BM25"), ["bm25"]);
    }

    #[test]
    fn idf_matches_closed_form() {
        let mut df = BTreeMap::new();
        df.insert("tea".to_string(), 1);
        let stats = CorpusStats::new(1, df, 2.0);
        let got = stats.idf("tea").unwrap();
        assert!((got - (4.0f64 / 3.0).ln()).abs() < 1e-15);
        // Unseen term: df = 0.
        let got = stats.idf("missing").unwrap();
        assert!((got - 4.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn idf_positive_when_term_in_every_doc() {
        let n = 10_000;
        let mut df = BTreeMap::new();
        df.insert("the".to_string(), n);
        let stats = CorpusStats::new(n, df, 5.0);
        let got = stats.idf("the").unwrap();
        assert!(got > 0.0 && got < 0.001);
    }

    #[test]
    fn idf_errors_on_empty_corpus() {
        let stats = CorpusStats::new(0, BTreeMap::new(), 0.0);
        assert!(stats.idf("tea").is_err());
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,60}") {
            let once = tokenize(&text);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tokenize_never_emits_empty_tokens(text in "\\PC{0,60}") {
            prop_assert!(tokenize(&text).iter().all(|t| !t.is_empty()));
        }

        #[test]
        fn idf_strictly_decreasing_in_df(n in 1usize..500, df in 0usize..499) {
            prop_assume!(df < n);
            let mut freq = BTreeMap::new();
            freq.insert("a".to_string(), df);
            freq.insert("b".to_string(), df + 1);
            let stats = CorpusStats::new(n, freq, 1.0);
            prop_assert!(stats.idf("a").unwrap() > stats.idf("b").unwrap());
        }
    }
}
