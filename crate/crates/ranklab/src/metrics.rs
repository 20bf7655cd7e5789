//! IR evaluation: Recall@k, MRR@n, ROUGE-L, and paired significance
//! testing over per-query values.
//!
//! Aggregates are macro averages: the mean of per-query values over the
//! evaluable queries. For recall and MRR a query is evaluable when it
//! appears in the run and has at least one relevant judgment; queries
//! without relevant judgments are skipped with a warning because
//! `R_k / R` is undefined at `R = 0`.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Collection, Qrels, ReferenceAnswers, Run};
use crate::error::{Error, Result};
use crate::text::tokenize;

/// Per-query values keyed by query id.
pub type PerQuery = BTreeMap<String, f64>;

fn macro_mean(per_query: &PerQuery) -> f64 {
    per_query.values().sum::<f64>() / per_query.len() as f64
}

/// Fraction of each query's relevant documents found in the top k,
/// macro-averaged. Run queries without relevant judgments are skipped
/// with a warning.
pub fn recall_at_k(run: &Run, qrels: &Qrels, k: usize) -> Result<(f64, PerQuery)> {
    if k < 1 {
        return Err(Error::InvalidArgument(format!("k must be >= 1, got {k}")));
    }
    let mut per_query = PerQuery::new();
    for (qid, entries) in run.rankings() {
        let total = qrels.relevant_count(qid);
        if total == 0 {
            eprintln!("warning: query {qid} has no relevant judgments; skipped");
            continue;
        }
        let hits = entries
            .iter()
            .filter(|e| e.rank <= k && qrels.is_relevant(qid, &e.doc_id))
            .count();
        per_query.insert(qid.to_string(), hits as f64 / total as f64);
    }
    if per_query.is_empty() {
        return Err(Error::Data("no evaluable queries".to_string()));
    }
    Ok((macro_mean(&per_query), per_query))
}

/// Reciprocal rank of each query's first relevant document within the
/// top n (0 when none appears), macro-averaged.
pub fn mrr_at_n(run: &Run, qrels: &Qrels, n: usize) -> Result<(f64, PerQuery)> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("n must be >= 1, got {n}")));
    }
    let mut per_query = PerQuery::new();
    for (qid, entries) in run.rankings() {
        if qrels.relevant_count(qid) == 0 {
            eprintln!("warning: query {qid} has no relevant judgments; skipped");
            continue;
        }
        let rr = entries
            .iter()
            .find(|e| e.rank <= n && qrels.is_relevant(qid, &e.doc_id))
            .map_or(0.0, |e| 1.0 / e.rank as f64);
        per_query.insert(qid.to_string(), rr);
    }
    if per_query.is_empty() {
        return Err(Error::Data("no evaluable queries".to_string()));
    }
    Ok((macro_mean(&per_query), per_query))
}

/// Longest common subsequence length of two token sequences, two-row
/// dynamic program.
pub fn lcs_length(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// LCS-based F-measure between a candidate and a reference text:
/// `(1 + beta^2) P R / (beta^2 P + R)` with `P = LCS/|candidate|`,
/// `R = LCS/|reference|`. Zero when either side is empty or nothing is
/// shared. `beta > 1` favors recall.
pub fn rouge_l(candidate: &str, reference: &str, beta: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "beta must be > 0, got {beta}"
        )));
    }
    let cand = tokenize(candidate);
    let refr = tokenize(reference);
    if cand.is_empty() || refr.is_empty() {
        return Ok(0.0);
    }
    let lcs = lcs_length(&cand, &refr) as f64;
    if lcs == 0.0 {
        return Ok(0.0);
    }
    let precision = lcs / cand.len() as f64;
    let recall = lcs / refr.len() as f64;
    let b2 = beta * beta;
    Ok((1.0 + b2) * precision * recall / (b2 * precision + recall))
}

/// ROUGE-L of each query's rank-1 passage against its reference answer,
/// macro-averaged over the run queries that have a reference.
pub fn rouge_l_for_run(
    run: &Run,
    collection: &Collection,
    references: &ReferenceAnswers,
    beta: f64,
) -> Result<(f64, PerQuery)> {
    if references.is_empty() {
        return Err(Error::Data("reference answers are empty".to_string()));
    }
    let mut per_query = PerQuery::new();
    for (qid, entries) in run.rankings() {
        let Some(reference) = references.get(qid) else {
            continue;
        };
        let top = &entries[0];
        let doc = collection.get(&top.doc_id).ok_or_else(|| {
            Error::Data(format!("document `{}` not in collection", top.doc_id))
        })?;
        per_query.insert(qid.to_string(), rouge_l(&doc.text, reference, beta)?);
    }
    if per_query.is_empty() {
        return Err(Error::Data(
            "no run query has a reference answer".to_string(),
        ));
    }
    Ok((macro_mean(&per_query), per_query))
}

/// Two-sided sign-flip permutation test on paired per-query values.
/// Returns `p = (1 + #{|mean of sign-flipped diffs| >= |observed mean
/// diff|}) / (1 + iterations)`, always in (0, 1].
pub fn paired_permutation_test(
    a: &PerQuery,
    b: &PerQuery,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    if iterations < 1000 {
        return Err(Error::InvalidArgument(format!(
            "iterations must be >= 1000, got {iterations}"
        )));
    }
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        return Err(Error::Data(
            "per-query value sets cover different query ids".to_string(),
        ));
    }
    if a.is_empty() {
        return Err(Error::Data("no per-query values to compare".to_string()));
    }
    let diffs: Vec<f64> = a.values().zip(b.values()).map(|(x, y)| x - y).collect();
    let n = diffs.len() as f64;
    let observed = (diffs.iter().sum::<f64>() / n).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exceed = 0usize;
    for _ in 0..iterations {
        let mut sum = 0.0;
        for &d in &diffs {
            sum += if rng.gen::<bool>() { d } else { -d };
        }
        if (sum / n).abs() >= observed {
            exceed += 1;
        }
    }
    Ok((1.0 + exceed as f64) / (1.0 + iterations as f64))
}

/// Metrics for one query inside a [`MetricReport`]. Recall and
/// reciprocal rank are present when the query has relevant judgments;
/// ROUGE-L when it has a reference answer.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub recall: BTreeMap<usize, f64>,
    pub reciprocal_rank: Option<f64>,
    pub rouge_l: Option<f64>,
}

/// Aggregate and per-query metrics for one run. Aggregates are the
/// macro means of the per-query values.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub recall_cutoffs: Vec<usize>,
    pub mrr_cutoff: usize,
    /// Aggregate recall per cutoff.
    pub recall: BTreeMap<usize, f64>,
    pub mrr: f64,
    pub rouge_l: Option<f64>,
    pub per_query: BTreeMap<String, QueryMetrics>,
}

/// Inputs for the ROUGE-L column of a report.
pub struct RougeInputs<'a> {
    pub collection: &'a Collection,
    pub references: &'a ReferenceAnswers,
    pub beta: f64,
}

/// Evaluate a run at the given cutoffs. Defaults elsewhere in the crate
/// are recall at 1 and 5, MRR at 10, and beta 1.2.
pub fn evaluate_run(
    run: &Run,
    qrels: &Qrels,
    recall_cutoffs: &[usize],
    mrr_cutoff: usize,
    rouge: Option<&RougeInputs<'_>>,
) -> Result<MetricReport> {
    if recall_cutoffs.is_empty() {
        return Err(Error::InvalidArgument(
            "at least one recall cutoff is required".to_string(),
        ));
    }
    let mut per_query: BTreeMap<String, QueryMetrics> = BTreeMap::new();
    let mut recall_agg = BTreeMap::new();
    for &k in recall_cutoffs {
        let (agg, per) = recall_at_k(run, qrels, k)?;
        recall_agg.insert(k, agg);
        for (qid, value) in per {
            per_query
                .entry(qid)
                .or_insert_with(|| QueryMetrics {
                    recall: BTreeMap::new(),
                    reciprocal_rank: None,
                    rouge_l: None,
                })
                .recall
                .insert(k, value);
        }
    }
    let (mrr, per_rr) = mrr_at_n(run, qrels, mrr_cutoff)?;
    for (qid, value) in per_rr {
        per_query
            .entry(qid)
            .or_insert_with(|| QueryMetrics {
                recall: BTreeMap::new(),
                reciprocal_rank: None,
                rouge_l: None,
            })
            .reciprocal_rank = Some(value);
    }
    let mut rouge_agg = None;
    if let Some(inputs) = rouge {
        let (agg, per) =
            rouge_l_for_run(run, inputs.collection, inputs.references, inputs.beta)?;
        rouge_agg = Some(agg);
        for (qid, value) in per {
            per_query
                .entry(qid)
                .or_insert_with(|| QueryMetrics {
                    recall: BTreeMap::new(),
                    reciprocal_rank: None,
                    rouge_l: None,
                })
                .rouge_l = Some(value);
        }
    }
    Ok(MetricReport {
        recall_cutoffs: recall_cutoffs.to_vec(),
        mrr_cutoff,
        recall: recall_agg,
        mrr,
        rouge_l: rouge_agg,
        per_query,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, RunEntry};
    use proptest::prelude::*;

    fn run_from(lists: &[(&str, &[&str])]) -> Run {
        let mut entries = Vec::new();
        for (qid, docs) in lists {
            for (i, did) in docs.iter().enumerate() {
                entries.push(RunEntry {
                    query_id: qid.to_string(),
                    doc_id: did.to_string(),
                    rank: i + 1,
                    score: (docs.len() - i) as f64,
                });
            }
        }
        Run::from_entries(entries).unwrap()
    }

    #[test]
    fn recall_single_relevant_at_rank_one() {
        let run = run_from(&[("q1", &["d1", "d2"])]);
        let mut qrels = Qrels::new();
        qrels.add("q1", "d1", 1).unwrap();
        let (agg, _) = recall_at_k(&run, &qrels, 1).unwrap();
        assert_eq!(agg, 1.0);
    }

    #[test]
    fn recall_zero_when_relevant_absent() {
        let run = run_from(&[("q1", &["d1", "d2"])]);
        let mut qrels = Qrels::new();
        qrels.add("q1", "d9", 1).unwrap();
        let (agg, _) = recall_at_k(&run, &qrels, 5).unwrap();
        assert_eq!(agg, 0.0);
    }

    #[test]
    fn recall_macro_averages_queries() {
        let run = run_from(&[("q1", &["d1"]), ("q2", &["d2"])]);
        let mut qrels = Qrels::new();
        qrels.add("q1", "d1", 1).unwrap();
        qrels.add("q2", "dxx", 1).unwrap();
        let (agg, per) = recall_at_k(&run, &qrels, 1).unwrap();
        assert_eq!(agg, 0.5);
        assert_eq!(per["q1"], 1.0);
        assert_eq!(per["q2"], 0.0);
    }

    #[test]
    fn unjudged_queries_are_skipped_not_scored() {
        let run = run_from(&[("q1", &["d1"]), ("q2", &["d2"])]);
        let mut qrels = Qrels::new();
        qrels.add("q1", "d1", 1).unwrap();
        // q2 has no judgments at all; the aggregate covers q1 only.
        let (agg, per) = recall_at_k(&run, &qrels, 1).unwrap();
        assert_eq!(per.len(), 1);
        assert_eq!(agg, 1.0);
        let (agg, per) = mrr_at_n(&run, &qrels, 10).unwrap();
        assert_eq!(per.len(), 1);
        assert_eq!(agg, 1.0);
    }

    #[test]
    fn recall_rejects_k_zero_and_unjudged_runs() {
        let run = run_from(&[("q1", &["d1"])]);
        let mut qrels = Qrels::new();
        qrels.add("q1", "d1", 1).unwrap();
        assert!(recall_at_k(&run, &qrels, 0).is_err());
        let unjudged = Qrels::new();
        assert!(recall_at_k(&run, &unjudged, 1).is_err());
    }

    #[test]
    fn mrr_examples() {
        let run = run_from(&[("q1", &["dx", "d1"]), ("q2", &["da", "db", "dc", "d2"])]);
        let mut qrels = Qrels::new();
        qrels.add("q1", "d1", 1).unwrap();
        qrels.add("q2", "d2", 1).unwrap();
        let (agg, per) = mrr_at_n(&run, &qrels, 10).unwrap();
        assert_eq!(per["q1"], 0.5);
        assert_eq!(per["q2"], 0.25);
        assert_eq!(agg, 0.375);
    }

    #[test]
    fn mrr_cutoff_excludes_late_hits() {
        let docs: Vec<String> = (0..11).map(|i| format!("d{i:02}")).collect();
        let doc_refs: Vec<&str> = docs.iter().map(String::as_str).collect();
        let run = run_from(&[("q1", &doc_refs)]);
        let mut qrels = Qrels::new();
        qrels.add("q1", "d10", 1).unwrap(); // rank 11
        let (agg, _) = mrr_at_n(&run, &qrels, 10).unwrap();
        assert_eq!(agg, 0.0);
        let (agg, _) = mrr_at_n(&run, &qrels, 11).unwrap();
        assert!((agg - 1.0 / 11.0).abs() < 1e-15);
    }

    fn toks(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn lcs_identity_and_disjoint() {
        let a = toks(&["x", "y", "z"]);
        assert_eq!(lcs_length(&a, &a), 3);
        let b = toks(&["p", "q"]);
        assert_eq!(lcs_length(&a, &b), 0);
        assert_eq!(lcs_length(&a, &[]), 0);
    }

    #[test]
    fn lcs_fixture() {
        let a = toks(&["the", "cat", "sat"]);
        let b = toks(&["the", "cat", "ate"]);
        assert_eq!(lcs_length(&a, &b), 2);
    }

    /// Exhaustive enumeration of subsequences of `a`, checked for
    /// containment in `b`. Only usable for short lists.
    fn lcs_exhaustive(a: &[String], b: &[String]) -> usize {
        let mut best = 0;
        for mask in 0u32..(1 << a.len()) {
            let sub: Vec<&String> = a
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, t)| t)
                .collect();
            let mut it = b.iter();
            if sub.iter().all(|t| it.any(|u| u == *t)) {
                best = best.max(sub.len());
            }
        }
        best
    }

    #[test]
    fn rouge_identical_strings() {
        for beta in [0.5, 1.0, 1.2, 8.0] {
            assert_eq!(rouge_l("green tea", "green tea", beta).unwrap(), 1.0);
        }
    }

    #[test]
    fn rouge_fixture_two_thirds() {
        for beta in [0.2, 1.2, 5.0] {
            let got = rouge_l("the cat sat", "the cat ate", beta).unwrap();
            assert!((got - 2.0 / 3.0).abs() < 1e-12, "beta {beta}: {got}");
        }
    }

    #[test]
    fn rouge_empty_candidate_and_bad_beta() {
        assert_eq!(rouge_l("", "reference text", 1.2).unwrap(), 0.0);
        assert_eq!(rouge_l("candidate", "", 1.2).unwrap(), 0.0);
        assert!(rouge_l("a", "a", 0.0).is_err());
        assert!(rouge_l("a", "a", -1.0).is_err());
    }

    #[test]
    fn rouge_beta_limits_approach_precision_and_recall() {
        // candidate 4 tokens, reference 2 tokens, LCS 2:
        // P = 0.5, R = 1.0.
        let cand = "the cat sat down";
        let refr = "the cat";
        let near_r = rouge_l(cand, refr, 100.0).unwrap();
        assert!((near_r - 1.0).abs() < 0.02, "{near_r}");
        let near_p = rouge_l(cand, refr, 0.01).unwrap();
        assert!((near_p - 0.5).abs() < 0.02, "{near_p}");
    }

    #[test]
    fn rouge_for_run_pairs_rank_one_with_reference() {
        let collection = Collection::from_documents(vec![
            Document {
                id: "d1".to_string(),
                text: "the cat sat".to_string(),
            },
            Document {
                id: "d2".to_string(),
                text: "other".to_string(),
            },
        ])
        .unwrap();
        let run = run_from(&[("q1", &["d1", "d2"]), ("q2", &["d1"]), ("q3", &["d2"])]);
        let mut refs = ReferenceAnswers::new();
        refs.add("q1", "the cat sat").unwrap();
        refs.add("q2", "the cat ate").unwrap();
        // q3 has no reference and is excluded.
        let (agg, per) = rouge_l_for_run(&run, &collection, &refs, 1.2).unwrap();
        assert_eq!(per.len(), 2);
        assert_eq!(per["q1"], 1.0);
        assert!((per["q2"] - 2.0 / 3.0).abs() < 1e-12);
        assert!((agg - 5.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn rouge_for_run_requires_some_reference() {
        let collection = Collection::from_documents(vec![Document {
            id: "d1".to_string(),
            text: "x".to_string(),
        }])
        .unwrap();
        let run = run_from(&[("q1", &["d1"])]);
        let mut refs = ReferenceAnswers::new();
        refs.add("q9", "unrelated").unwrap();
        assert!(rouge_l_for_run(&run, &collection, &refs, 1.2).is_err());
        assert!(rouge_l_for_run(&run, &collection, &ReferenceAnswers::new(), 1.2).is_err());
    }

    fn per_query_of(values: &[(&str, f64)]) -> PerQuery {
        values
            .iter()
            .map(|(q, v)| (q.to_string(), *v))
            .collect()
    }

    #[test]
    fn permutation_identical_inputs_give_p_one() {
        let a = per_query_of(&[("q1", 0.5), ("q2", 0.25), ("q3", 1.0)]);
        let p = paired_permutation_test(&a, &a.clone(), 1000, 7).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn permutation_uniform_improvement_is_significant() {
        let a: PerQuery = (0..20).map(|i| (format!("q{i:02}"), 0.6)).collect();
        let b: PerQuery = (0..20).map(|i| (format!("q{i:02}"), 0.5)).collect();
        let p = paired_permutation_test(&a, &b, 10_000, 13).unwrap();
        assert!(p <= 0.01, "p = {p}");
    }

    #[test]
    fn permutation_deterministic_and_validating() {
        let a = per_query_of(&[("q1", 0.9), ("q2", 0.3)]);
        let b = per_query_of(&[("q1", 0.4), ("q2", 0.5)]);
        let p1 = paired_permutation_test(&a, &b, 2000, 42).unwrap();
        let p2 = paired_permutation_test(&a, &b, 2000, 42).unwrap();
        assert_eq!(p1, p2);
        assert!(p1 > 0.0 && p1 <= 1.0);

        let c = per_query_of(&[("q1", 0.9), ("qX", 0.3)]);
        assert!(paired_permutation_test(&a, &c, 2000, 42).is_err());
        assert!(paired_permutation_test(&a, &b, 999, 42).is_err());
    }

    #[test]
    fn report_aggregates_are_macro_means() {
        let run = run_from(&[("q1", &["d1", "d2"]), ("q2", &["d2", "d1"])]);
        let mut qrels = Qrels::new();
        qrels.add("q1", "d1", 1).unwrap();
        qrels.add("q2", "d1", 1).unwrap();
        let report = evaluate_run(&run, &qrels, &[1, 5], 10, None).unwrap();
        for &k in &[1usize, 5] {
            let mean = report
                .per_query
                .values()
                .map(|m| m.recall[&k])
                .sum::<f64>()
                / report.per_query.len() as f64;
            assert_eq!(report.recall[&k], mean);
        }
        let mean_rr = report
            .per_query
            .values()
            .map(|m| m.reciprocal_rank.unwrap())
            .sum::<f64>()
            / report.per_query.len() as f64;
        assert_eq!(report.mrr, mean_rr);
        assert!(report.rouge_l.is_none());
    }

    proptest! {
        /// Recall never decreases as k grows; MRR never decreases as n
        /// grows and stays within [0, 1].
        #[test]
        fn recall_and_mrr_monotone_in_cutoff(
            relevant in prop::collection::btree_set(0usize..12, 1..6),
            ranking in prop::collection::vec(0usize..12, 1..12),
            k in 1usize..12,
        ) {
            let mut seen = std::collections::BTreeSet::new();
            let docs: Vec<String> = ranking
                .iter()
                .filter(|d| seen.insert(**d))
                .map(|d| format!("d{d:02}"))
                .collect();
            prop_assume!(!docs.is_empty());
            let doc_refs: Vec<&str> = docs.iter().map(String::as_str).collect();
            let run = run_from(&[("q1", &doc_refs)]);
            let mut qrels = Qrels::new();
            for d in &relevant {
                qrels.add("q1", &format!("d{d:02}"), 1).unwrap();
            }
            let (r_small, _) = recall_at_k(&run, &qrels, k).unwrap();
            let (r_big, _) = recall_at_k(&run, &qrels, k + 1).unwrap();
            prop_assert!(r_big >= r_small);
            let (m_small, _) = mrr_at_n(&run, &qrels, k).unwrap();
            let (m_big, _) = mrr_at_n(&run, &qrels, k + 1).unwrap();
            prop_assert!(m_big >= m_small);
            prop_assert!(m_big <= 1.0);
        }

        /// DP LCS equals the exhaustive enumerator on short lists.
        #[test]
        fn lcs_matches_exhaustive(
            a in prop::collection::vec(0usize..4, 0..8),
            b in prop::collection::vec(0usize..4, 0..8),
        ) {
            let words = ["red", "green", "blue", "cyan"];
            let a: Vec<String> = a.iter().map(|&i| words[i].to_string()).collect();
            let b: Vec<String> = b.iter().map(|&i| words[i].to_string()).collect();
            prop_assert_eq!(lcs_length(&a, &b), lcs_exhaustive(&a, &b));
        }
    }
}
