//! Joint feature encoding and the linear relevance scorer with its two
//! heads.
//!
//! A (query, document) pair is encoded into a fixed 8-dimensional
//! feature vector; a linear model turns it into a logit
//! `w · enc(q, d) + b`. The same logits feed two heads:
//!
//! - cross-encoder: each candidate gets `sigmoid(logit)` independently
//! - mcqa: candidates get `softmax` over the set's logits
//!
//! Both activations are strictly increasing in the logit, so the two
//! heads always rank a candidate set identically. The rerankers sort on
//! the logit itself (with doc-id tie-breaks), which realizes
//! probability-descending order exactly even where the activations
//! saturate in floating point.

use std::fmt;
use std::fs;
use std::path::Path;

use crate::corpus::{Document, Query};
use crate::error::{Error, Result};
use crate::retriever::InvertedIndex;
use crate::text::tokenize;

/// Dimension of the joint feature encoding.
pub const FEATURE_DIM: usize = 8;

/// Hand-crafted joint encoding of a (query, document) pair:
///
/// 0. unigram overlap count (distinct shared terms)
/// 1. IDF-weighted unigram overlap
/// 2. BM25 score of the document for the query
/// 3. Jaccard similarity of the unigram sets
/// 4. bigram overlap count (distinct shared bigrams)
/// 5. fraction of distinct query terms covered by the document
/// 6. log(1 + document length in tokens)
/// 7. log(1 + query length in tokens)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; FEATURE_DIM],
}

/// Linear relevance model: a weight per feature plus a bias.
/// Initialized to zeros, so an untrained scorer maps every pair to
/// logit 0 and cross-encoder probability 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearScorer {
    pub weights: [f64; FEATURE_DIM],
    pub bias: f64,
}

impl Default for LinearScorer {
    fn default() -> Self {
        LinearScorer::zeros()
    }
}

impl LinearScorer {
    pub fn zeros() -> Self {
        LinearScorer {
            weights: [0.0; FEATURE_DIM],
            bias: 0.0,
        }
    }

    pub fn new(weights: [f64; FEATURE_DIM], bias: f64) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
            return Err(Error::InvalidArgument(
                "scorer parameters must be finite".to_string(),
            ));
        }
        Ok(LinearScorer { weights, bias })
    }

    /// Pre-activation relevance score `w · fv + b`.
    pub fn raw_score(&self, fv: &FeatureVector) -> f64 {
        self.weights
            .iter()
            .zip(fv.values.iter())
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias
    }

    /// Write as plain text: dimension, weights at 17 significant
    /// digits, bias. Round-trips exactly.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let weights = self
            .weights
            .iter()
            .map(|w| format!("{w:.16e}"))
            .collect::<Vec<_>>()
            .join(" ");
        let contents = format!("{FEATURE_DIM}\n{weights}\n{:.16e}\n", self.bias);
        fs::write(path, contents).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = raw.lines();
        let dim_line = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "missing dimension line"))?;
        let dim: usize = dim_line
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, 1, format!("invalid dimension `{dim_line}`")))?;
        if dim != FEATURE_DIM {
            return Err(Error::parse(
                path,
                1,
                format!("dimension mismatch: expected {FEATURE_DIM}, found {dim}"),
            ));
        }
        let weight_line = lines
            .next()
            .ok_or_else(|| Error::parse(path, 2, "missing weights line"))?;
        let parsed: Vec<f64> = weight_line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(path, 2, format!("invalid weight: {e}")))?;
        if parsed.len() != FEATURE_DIM {
            return Err(Error::parse(
                path,
                2,
                format!("expected {FEATURE_DIM} weights, found {}", parsed.len()),
            ));
        }
        let bias_line = lines
            .next()
            .ok_or_else(|| Error::parse(path, 3, "missing bias line"))?;
        let bias: f64 = bias_line
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, 3, format!("invalid bias `{bias_line}`")))?;
        let mut weights = [0.0; FEATURE_DIM];
        weights.copy_from_slice(&parsed);
        LinearScorer::new(weights, bias)
            .map_err(|e| Error::parse(path, 0, e.to_string()))
    }
}

/// Numerically stable logistic function, safe for |x| up to 700 and
/// beyond.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Softmax with max-subtraction. Components are positive and sum to 1;
/// the argmax of the input is preserved.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument(
            "softmax of an empty list".to_string(),
        ));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument(
            "softmax input must be finite".to_string(),
        ));
    }
    let max = scores.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let exps: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Encode a (query, document) pair against the index that holds the
/// document. Deterministic; errors if the document is not indexed.
pub fn encode(query: &Query, doc: &Document, index: &InvertedIndex) -> Result<FeatureVector> {
    if !index.contains_doc(&doc.id) {
        return Err(Error::Data(format!(
            "document `{}` is not in the index",
            doc.id
        )));
    }
    let q_tokens = tokenize(&query.text);
    let d_tokens = tokenize(&doc.text);

    let q_set: std::collections::BTreeSet<&str> =
        q_tokens.iter().map(String::as_str).collect();
    let d_set: std::collections::BTreeSet<&str> =
        d_tokens.iter().map(String::as_str).collect();
    let overlap: Vec<&str> = q_set.intersection(&d_set).copied().collect();

    let mut idf_overlap = 0.0;
    for term in &overlap {
        idf_overlap += index.stats().idf(term)?;
    }

    let union = q_set.union(&d_set).count();
    let jaccard = if union == 0 {
        0.0
    } else {
        overlap.len() as f64 / union as f64
    };

    let q_bigrams: std::collections::BTreeSet<(&str, &str)> = q_tokens
        .windows(2)
        .map(|w| (w[0].as_str(), w[1].as_str()))
        .collect();
    let d_bigrams: std::collections::BTreeSet<(&str, &str)> = d_tokens
        .windows(2)
        .map(|w| (w[0].as_str(), w[1].as_str()))
        .collect();
    let bigram_overlap = q_bigrams.intersection(&d_bigrams).count();

    let coverage = if q_set.is_empty() {
        0.0
    } else {
        overlap.len() as f64 / q_set.len() as f64
    };

    Ok(FeatureVector {
        values: [
            overlap.len() as f64,
            idf_overlap,
            index.bm25_score(&q_tokens, &doc.id)?,
            jaccard,
            bigram_overlap as f64,
            coverage,
            (1.0 + d_tokens.len() as f64).ln(),
            (1.0 + q_tokens.len() as f64).ln(),
        ],
    })
}

/// Which head produced a candidate's probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreMode {
    CrossEncoder,
    Mcqa,
}

impl fmt::Display for ScoreMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreMode::CrossEncoder => write!(f, "cross-encoder"),
            ScoreMode::Mcqa => write!(f, "mcqa"),
        }
    }
}

/// A reranked candidate: the shared logit plus the head's probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub doc_id: String,
    pub logit: f64,
    pub probability: f64,
    pub mode: ScoreMode,
}

fn scored_logits(
    scorer: &LinearScorer,
    query: &Query,
    candidates: &[Document],
    index: &InvertedIndex,
) -> Result<Vec<(String, f64)>> {
    if candidates.is_empty() {
        return Err(Error::Data("empty candidate list".to_string()));
    }
    candidates
        .iter()
        .map(|doc| {
            let fv = encode(query, doc, index)?;
            Ok((doc.id.clone(), scorer.raw_score(&fv)))
        })
        .collect()
}

fn sort_by_logit(items: &mut [ScoredCandidate]) {
    items.sort_by(|a, b| {
        b.logit
            .total_cmp(&a.logit)
            .then_with(|| a.doc_id.cmp(&b.doc_id))
    });
}

/// Rerank candidates with the sigmoid head: each candidate's
/// probability is `sigmoid(logit)`, independent of the others.
pub fn rerank_cross_encoder(
    scorer: &LinearScorer,
    query: &Query,
    candidates: &[Document],
    index: &InvertedIndex,
) -> Result<Vec<ScoredCandidate>> {
    let mut out: Vec<ScoredCandidate> = scored_logits(scorer, query, candidates, index)?
        .into_iter()
        .map(|(doc_id, logit)| ScoredCandidate {
            doc_id,
            logit,
            probability: sigmoid(logit),
            mode: ScoreMode::CrossEncoder,
        })
        .collect();
    sort_by_logit(&mut out);
    Ok(out)
}

/// Rerank candidates with the MCQA head: the candidate set is treated
/// as an option set and probabilities are the softmax of its logits,
/// summing to 1.
pub fn rerank_mcqa(
    scorer: &LinearScorer,
    query: &Query,
    candidates: &[Document],
    index: &InvertedIndex,
) -> Result<Vec<ScoredCandidate>> {
    let scored = scored_logits(scorer, query, candidates, index)?;
    let logits: Vec<f64> = scored.iter().map(|(_, l)| *l).collect();
    let probs = softmax(&logits)?;
    let mut out: Vec<ScoredCandidate> = scored
        .into_iter()
        .zip(probs)
        .map(|((doc_id, logit), probability)| ScoredCandidate {
            doc_id,
            logit,
            probability,
            mode: ScoreMode::Mcqa,
        })
        .collect();
    sort_by_logit(&mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Collection;
    use crate::retriever::Bm25Params;
    use proptest::prelude::*;

    fn doc(id: &str, text: &str) -> Document {
        Document {
            id: id.to_string(),
            text: text.to_string(),
        }
    }

    fn query(text: &str) -> Query {
        Query {
            id: "q1".to_string(),
            text: text.to_string(),
        }
    }

    fn indexed(docs: Vec<Document>) -> (Collection, InvertedIndex) {
        let coll = Collection::from_documents(docs).unwrap();
        let index = InvertedIndex::build(&coll, Bm25Params::default()).unwrap();
        (coll, index)
    }

    #[test]
    fn encode_identical_text() {
        let (_, index) = indexed(vec![doc("d1", "green tea")]);
        let fv = encode(&query("green tea"), &doc("d1", "green tea"), &index).unwrap();
        assert_eq!(fv.values[3], 1.0); // jaccard
        assert_eq!(fv.values[5], 1.0); // coverage
    }

    #[test]
    fn encode_disjoint_vocabulary_zeroes_overlap_features() {
        let (_, index) = indexed(vec![doc("d1", "coffee roast"), doc("d2", "green tea")]);
        let fv = encode(&query("quantum physics"), &doc("d1", "coffee roast"), &index).unwrap();
        for i in 0..6 {
            assert_eq!(fv.values[i], 0.0, "feature {i}");
        }
        assert!(fv.values[6] > 0.0 && fv.values[7] > 0.0);
    }

    #[test]
    fn encode_hand_counted_fixture() {
        let (_, index) = indexed(vec![
            doc("d1", "green tea improves health"),
            doc("d2", "coffee"),
        ]);
        let fv = encode(
            &query("green tea benefits"),
            &doc("d1", "green tea improves health"),
            &index,
        )
        .unwrap();
        assert_eq!(fv.values[0], 2.0); // green, tea
        assert_eq!(fv.values[4], 1.0); // shared bigram "green tea"
        assert!((fv.values[5] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn encode_rejects_unindexed_doc() {
        let (_, index) = indexed(vec![doc("d1", "tea")]);
        assert!(encode(&query("tea"), &doc("dx", "tea"), &index).is_err());
    }

    #[test]
    fn raw_score_zero_scorer() {
        let fv = FeatureVector {
            values: [1.0, 2.0, 3.0, 0.5, 1.0, 0.5, 2.0, 1.0],
        };
        assert_eq!(LinearScorer::zeros().raw_score(&fv), 0.0);
    }

    #[test]
    fn raw_score_bm25_indicator_recovers_bm25() {
        let (_, index) = indexed(vec![
            doc("d1", "green tea improves health"),
            doc("d2", "black tea and green tea"),
        ]);
        let mut weights = [0.0; FEATURE_DIM];
        weights[2] = 1.0;
        let scorer = LinearScorer::new(weights, 0.0).unwrap();
        let q = query("green tea");
        for id in ["d1", "d2"] {
            let d = doc(id, if id == "d1" { "green tea improves health" } else { "black tea and green tea" });
            let fv = encode(&q, &d, &index).unwrap();
            let want = index.bm25_score(&tokenize(&q.text), id).unwrap();
            assert_eq!(scorer.raw_score(&fv), want);
        }
    }

    #[test]
    fn raw_score_all_ones_on_zero_features() {
        let scorer = LinearScorer::new([1.0; FEATURE_DIM], 1.0).unwrap();
        let fv = FeatureVector {
            values: [0.0; FEATURE_DIM],
        };
        assert_eq!(scorer.raw_score(&fv), 1.0);
    }

    #[test]
    fn sigmoid_fixed_points() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(2.0) - 0.8807970779778823).abs() < 1e-16);
    }

    #[test]
    fn sigmoid_extremes_finite() {
        assert!(sigmoid(700.0).is_finite() && sigmoid(700.0) <= 1.0 && sigmoid(700.0) > 0.999);
        assert!(sigmoid(-700.0).is_finite() && sigmoid(-700.0) > 0.0 && sigmoid(-700.0) < 1e-300);
    }

    #[test]
    fn softmax_uniform_and_closed_form() {
        let probs = softmax(&[3.0, 3.0, 3.0]).unwrap();
        for p in &probs {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        let probs = softmax(&[0.0, 2.0f64.ln()]).unwrap();
        assert!((probs[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((probs[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn softmax_shift_invariant_at_large_magnitude() {
        let a = softmax(&[1000.0, 1001.0]).unwrap();
        let b = softmax(&[0.0, 1.0]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_empty_errors() {
        assert!(softmax(&[]).is_err());
    }

    #[test]
    fn rerank_single_candidate() {
        let (_, index) = indexed(vec![doc("d1", "green tea")]);
        let cands = vec![doc("d1", "green tea")];
        let scorer = LinearScorer::zeros();
        let ce = rerank_cross_encoder(&scorer, &query("green tea"), &cands, &index).unwrap();
        assert_eq!(ce.len(), 1);
        assert_eq!(ce[0].probability, 0.5);
        let mc = rerank_mcqa(&scorer, &query("green tea"), &cands, &index).unwrap();
        assert_eq!(mc[0].probability, 1.0);
    }

    #[test]
    fn rerank_zero_scorer_orders_by_doc_id() {
        let (_, index) = indexed(vec![doc("db", "x"), doc("da", "y"), doc("dc", "z")]);
        let cands = vec![doc("db", "x"), doc("da", "y"), doc("dc", "z")];
        let out =
            rerank_cross_encoder(&LinearScorer::zeros(), &query("green"), &cands, &index).unwrap();
        let ids: Vec<&str> = out.iter().map(|c| c.doc_id.as_str()).collect();
        assert_eq!(ids, ["da", "db", "dc"]);
        assert!(out.iter().all(|c| c.probability == 0.5));
    }

    #[test]
    fn rerank_bm25_indicator_matches_retriever_order() {
        let (coll, index) = indexed(vec![
            doc("d1", "green tea improves health"),
            doc("d2", "black tea and green tea"),
            doc("d3", "green green green tea tea leaves"),
        ]);
        let mut weights = [0.0; FEATURE_DIM];
        weights[2] = 1.0;
        let scorer = LinearScorer::new(weights, 0.0).unwrap();
        let q = Query {
            id: "q1".to_string(),
            text: "green tea".to_string(),
        };
        let cands: Vec<Document> = coll.iter().cloned().collect();
        let reranked = rerank_cross_encoder(&scorer, &q, &cands, &index).unwrap();
        let retrieved = index.retrieve_topk(&q, 10).unwrap();
        let a: Vec<&str> = reranked.iter().map(|c| c.doc_id.as_str()).collect();
        let b: Vec<&str> = retrieved.iter().map(|e| e.doc_id.as_str()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn rerank_mcqa_two_candidates_closed_form() {
        // Logits 0 and ln 2 produce softmax [1/3, 2/3].
        let (_, index) = indexed(vec![doc("da", "alpha"), doc("db", "alpha alpha")]);
        // Weight only the doc-length feature; pick it to map the two
        // docs onto logits 0 and ln(2) exactly is fiddly, so check the
        // softmax arithmetic through the head directly instead.
        let scored = softmax(&[0.0, 2.0f64.ln()]).unwrap();
        assert!((scored[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((scored[1] - 2.0 / 3.0).abs() < 1e-12);
        // And the head ranks the larger logit first.
        let cands = vec![doc("da", "alpha"), doc("db", "alpha alpha")];
        let mut weights = [0.0; FEATURE_DIM];
        weights[2] = 1.0; // bm25: db scores higher on "alpha alpha"
        let scorer = LinearScorer::new(weights, 0.0).unwrap();
        let out = rerank_mcqa(&scorer, &query("alpha alpha"), &cands, &index).unwrap();
        assert_eq!(out[0].doc_id, "db");
        let total: f64 = out.iter().map(|c| c.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rerank_empty_candidates_errors() {
        let (_, index) = indexed(vec![doc("d1", "tea")]);
        assert!(rerank_cross_encoder(&LinearScorer::zeros(), &query("tea"), &[], &index).is_err());
        assert!(rerank_mcqa(&LinearScorer::zeros(), &query("tea"), &[], &index).is_err());
    }

    #[test]
    fn model_file_round_trips_exactly() {
        let scorer = LinearScorer::new(
            [
                0.1,
                -2.5e-11,
                3.0,
                -0.7654321987654321,
                1e300,
                -1e-300,
                0.0,
                42.42,
            ],
            -0.125,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        scorer.save(&path).unwrap();
        let loaded = LinearScorer::load(&path).unwrap();
        assert_eq!(scorer, loaded);
    }

    #[test]
    fn model_file_rejects_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.txt");
        std::fs::write(&path, "3\n1.0 2.0 3.0\n0.0\n").unwrap();
        assert!(LinearScorer::load(&path).is_err());
    }

    proptest! {
        #[test]
        fn sigmoid_symmetry_and_bounds(x in -700.0f64..700.0) {
            let p = sigmoid(x);
            prop_assert!(p > 0.0 && p <= 1.0);
            // The open upper bound is representable only below the
            // point where exp(-x) drops under one ulp of 1.0.
            if x.abs() < 30.0 {
                prop_assert!(p < 1.0);
            }
            prop_assert!((sigmoid(x) + sigmoid(-x) - 1.0).abs() < 1e-15);
        }

        #[test]
        fn softmax_sums_to_one_and_shift_invariant(
            scores in prop::collection::vec(-50.0f64..50.0, 1..10),
            shift in -100.0f64..100.0,
        ) {
            let probs = softmax(&scores).unwrap();
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(probs.iter().all(|&p| p > 0.0));
            let argmax_in = scores
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i);
            let argmax_out = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i);
            prop_assert_eq!(argmax_in, argmax_out);
            let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
            let probs2 = softmax(&shifted).unwrap();
            for (a, b) in probs.iter().zip(&probs2) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        /// Encoded features stay inside their documented ranges.
        #[test]
        fn encode_respects_feature_ranges(
            doc_words in prop::collection::vec(0usize..8, 0..12),
            query_words in prop::collection::vec(0usize..8, 0..5),
        ) {
            let vocab = ["ash", "birch", "cedar", "dogwood", "elm", "fir", "gum", "hazel"];
            let d = doc(
                "d0",
                &doc_words.iter().map(|&w| vocab[w]).collect::<Vec<_>>().join(" "),
            );
            let coll = Collection::from_documents(vec![d.clone()]).unwrap();
            let index = InvertedIndex::build(&coll, Bm25Params::default()).unwrap();
            let q = query(&query_words.iter().map(|&w| vocab[w]).collect::<Vec<_>>().join(" "));
            let fv = encode(&q, &d, &index).unwrap();
            prop_assert!(fv.values.iter().all(|v| v.is_finite()));
            for i in [0, 1, 2, 4] {
                prop_assert!(fv.values[i] >= 0.0, "feature {} negative", i);
            }
            for i in [3, 5] {
                prop_assert!((0.0..=1.0).contains(&fv.values[i]), "feature {} out of [0,1]", i);
            }
        }

        /// The two heads always produce the identical permutation.
        #[test]
        fn adapter_equivalence(
            weights in prop::collection::vec(-3.0f64..3.0, FEATURE_DIM),
            bias in -2.0f64..2.0,
            doc_words in prop::collection::vec(prop::collection::vec(0usize..8, 1..8), 2..8),
            query_words in prop::collection::vec(0usize..8, 1..4),
        ) {
            let vocab = ["ash", "birch", "cedar", "dogwood", "elm", "fir", "gum", "hazel"];
            let docs: Vec<Document> = doc_words
                .iter()
                .enumerate()
                .map(|(i, words)| doc(
                    &format!("d{i}"),
                    &words.iter().map(|&w| vocab[w]).collect::<Vec<_>>().join(" "),
                ))
                .collect();
            let coll = Collection::from_documents(docs.clone()).unwrap();
            let index = InvertedIndex::build(&coll, Bm25Params::default()).unwrap();
            let mut w = [0.0; FEATURE_DIM];
            w.copy_from_slice(&weights);
            let scorer = LinearScorer::new(w, bias).unwrap();
            let q = query(&query_words.iter().map(|&i| vocab[i]).collect::<Vec<_>>().join(" "));

            let ce = rerank_cross_encoder(&scorer, &q, &docs, &index).unwrap();
            let mc = rerank_mcqa(&scorer, &q, &docs, &index).unwrap();

            let ce_ids: Vec<&str> = ce.iter().map(|c| c.doc_id.as_str()).collect();
            let mc_ids: Vec<&str> = mc.iter().map(|c| c.doc_id.as_str()).collect();
            prop_assert_eq!(ce_ids, mc_ids);

            for c in &ce {
                prop_assert!(c.probability > 0.0 && c.probability < 1.0);
            }
            let total: f64 = mc.iter().map(|c| c.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
