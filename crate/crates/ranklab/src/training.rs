//! BCE-with-logits training for the linear scorer: exact gradients,
//! hard-negative sampling, and an epoch loop with validation-based
//! early stopping.
//!
//! The loss over a batch is the mean of
//! `-[y ln(sigmoid(x)) + (1 - y) ln(1 - sigmoid(x))]`, computed in the
//! stable form `max(x, 0) - x*y + ln(1 + exp(-|x|))`. Its gradient has
//! the closed form `dL/dw = mean[(sigmoid(x_i) - y_i) * fv_i]`,
//! `dL/db = mean[sigmoid(x_i) - y_i]`.
//!
//! Optimization is plain mini-batch gradient descent. Everything is
//! deterministic given the config seed: the per-epoch shuffle is seeded
//! by (seed, epoch) and gradient means reduce in index order.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Collection, Qrels, Query, QuerySet, Run, RunEntry, TrainingPair};
use crate::error::{Error, Result};
use crate::metrics;
use crate::retriever::InvertedIndex;
use crate::scorer::{encode, sigmoid, FeatureVector, LinearScorer, FEATURE_DIM};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Consecutive epochs without validation improvement before
    /// stopping.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 7,
            batch_size: 64,
            learning_rate: 0.1,
            seed: 0,
            patience: 2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidArgument("epochs must be >= 1".to_string()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidArgument(
                "batch size must be >= 1".to_string(),
            ));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::InvalidArgument(
                "learning rate must be finite and >= 0".to_string(),
            ));
        }
        if self.patience < 1 {
            return Err(Error::InvalidArgument("patience must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// One completed epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based epoch number.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_mrr10: f64,
}

/// Per-epoch training trace. One record per completed epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    /// Epoch whose scorer was returned.
    pub best_epoch: usize,
}

impl TrainHistory {
    /// Render as CSV with header `epoch,train_loss,val_loss,val_mrr10`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,val_mrr10\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                r.epoch, r.train_loss, r.val_loss, r.val_mrr10
            ));
        }
        out
    }
}

/// Queries, judgments, and first-stage candidates used for validation
/// during training.
pub struct ValidationSet<'a> {
    pub queries: &'a QuerySet,
    pub qrels: &'a Qrels,
    pub candidates: &'a Run,
}

/// Binary cross-entropy straight from the logit, stable for any finite
/// input: `max(x, 0) - x*y + ln(1 + exp(-|x|))`.
pub fn bce_with_logits(logit: f64, label: u8) -> Result<f64> {
    if label > 1 {
        return Err(Error::InvalidArgument(format!(
            "label must be 0 or 1, got {label}"
        )));
    }
    let y = label as f64;
    Ok(logit.max(0.0) - logit * y + (-logit.abs()).exp().ln_1p())
}

/// Mean BCE-with-logits over a batch.
pub fn batch_loss(scorer: &LinearScorer, batch: &[(FeatureVector, u8)]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Data("empty batch".to_string()));
    }
    let mut sum = 0.0;
    for (fv, label) in batch {
        sum += bce_with_logits(scorer.raw_score(fv), *label)?;
    }
    Ok(sum / batch.len() as f64)
}

/// Exact gradient of [`batch_loss`] with respect to the weights and
/// bias. Reduces in batch index order so results are bit-stable.
pub fn gradient(
    scorer: &LinearScorer,
    batch: &[(FeatureVector, u8)],
) -> Result<([f64; FEATURE_DIM], f64)> {
    if batch.is_empty() {
        return Err(Error::Data("empty batch".to_string()));
    }
    let mut grad_w = [0.0; FEATURE_DIM];
    let mut grad_b = 0.0;
    for (fv, label) in batch {
        if *label > 1 {
            return Err(Error::InvalidArgument(format!(
                "label must be 0 or 1, got {label}"
            )));
        }
        let residual = sigmoid(scorer.raw_score(fv)) - *label as f64;
        for (g, x) in grad_w.iter_mut().zip(fv.values.iter()) {
            *g += residual * x;
        }
        grad_b += residual;
    }
    let n = batch.len() as f64;
    for g in &mut grad_w {
        *g /= n;
    }
    Ok((grad_w, grad_b / n))
}

/// Top-ranked BM25 documents for the query that are not judged
/// relevant, up to `m`, labeled 0. May return fewer than `m` when the
/// corpus has too few matching non-relevant documents.
///
/// The ranking already breaks score ties by doc id, so truncation never
/// needs to sample; `seed` is reserved for a tie-sampling policy and
/// currently unused.
pub fn sample_hard_negatives(
    index: &InvertedIndex,
    qrels: &Qrels,
    query: &Query,
    m: usize,
    seed: u64,
) -> Result<Vec<TrainingPair>> {
    let _ = seed;
    if m < 1 {
        return Err(Error::InvalidArgument(format!("m must be >= 1, got {m}")));
    }
    if index.doc_count() == 0 {
        return Ok(Vec::new());
    }
    let ranked = index.retrieve_topk(query, index.doc_count())?;
    Ok(ranked
        .into_iter()
        .filter(|entry| !qrels.is_relevant(&query.id, &entry.doc_id))
        .take(m)
        .map(|entry| TrainingPair {
            query_id: query.id.clone(),
            doc_id: entry.doc_id,
            label: 0,
        })
        .collect())
}

struct ValidationData {
    /// (query id, doc id, feature vector, label) per candidate.
    items: Vec<(String, String, FeatureVector, u8)>,
}

impl ValidationData {
    fn prepare(
        validation: &ValidationSet<'_>,
        collection: &Collection,
        index: &InvertedIndex,
    ) -> Result<Self> {
        let mut items = Vec::new();
        for (qid, entries) in validation.candidates.rankings() {
            let query = validation.queries.get(qid).ok_or_else(|| {
                Error::Data(format!("validation query `{qid}` not in query set"))
            })?;
            for entry in entries {
                let doc = collection.get(&entry.doc_id).ok_or_else(|| {
                    Error::Data(format!(
                        "validation document `{}` not in collection",
                        entry.doc_id
                    ))
                })?;
                let fv = encode(query, doc, index)?;
                let label = u8::from(validation.qrels.is_relevant(qid, &entry.doc_id));
                items.push((qid.to_string(), entry.doc_id.clone(), fv, label));
            }
        }
        if items.is_empty() {
            return Err(Error::Data(
                "validation set has no candidates".to_string(),
            ));
        }
        Ok(ValidationData { items })
    }

    /// Mean validation loss and MRR@10 of the reranking the scorer
    /// induces over the validation candidates.
    fn evaluate(&self, scorer: &LinearScorer, qrels: &Qrels) -> Result<(f64, f64)> {
        let batch: Vec<(FeatureVector, u8)> =
            self.items.iter().map(|(_, _, fv, y)| (*fv, *y)).collect();
        let loss = batch_loss(scorer, &batch)?;

        let mut per_query: std::collections::BTreeMap<&str, Vec<(&str, f64)>> =
            std::collections::BTreeMap::new();
        for (qid, did, fv, _) in &self.items {
            per_query
                .entry(qid.as_str())
                .or_default()
                .push((did.as_str(), scorer.raw_score(fv)));
        }
        let mut entries = Vec::new();
        for (qid, mut scored) in per_query {
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            for (i, (did, logit)) in scored.into_iter().enumerate() {
                entries.push(RunEntry {
                    query_id: qid.to_string(),
                    doc_id: did.to_string(),
                    rank: i + 1,
                    score: logit,
                });
            }
        }
        let run = Run::from_entries(entries)?;
        let (mrr, _) = metrics::mrr_at_n(&run, qrels, 10)?;
        Ok((loss, mrr))
    }
}

fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    seed ^ (epoch as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Fit the scorer on labeled pairs with mini-batch gradient descent.
///
/// Each epoch shuffles the data (seeded by config seed and epoch
/// number), applies `w <- w - lr * grad` per batch, then evaluates
/// validation loss and MRR@10. Training stops early once validation
/// MRR@10 has failed to improve for `patience` consecutive epochs, and
/// the scorer from the best-validation epoch is returned.
pub fn train(
    initial: &LinearScorer,
    data: &[TrainingPair],
    validation: &ValidationSet<'_>,
    config: &TrainConfig,
    collection: &Collection,
    queries: &QuerySet,
    index: &InvertedIndex,
) -> Result<(LinearScorer, TrainHistory)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Data("no training pairs".to_string()));
    }

    let positives = data.iter().filter(|p| p.label == 1).count();
    if positives * 2 != data.len() {
        eprintln!(
            "warning: training data is unbalanced ({} positives, {} negatives)",
            positives,
            data.len() - positives
        );
    }

    let items: Vec<(FeatureVector, u8)> = data
        .iter()
        .map(|pair| {
            if pair.label > 1 {
                return Err(Error::Data(format!(
                    "training pair ({}, {}) has label {}",
                    pair.query_id, pair.doc_id, pair.label
                )));
            }
            let query = queries.get(&pair.query_id).ok_or_else(|| {
                Error::Data(format!("unresolvable query id `{}`", pair.query_id))
            })?;
            let doc = collection.get(&pair.doc_id).ok_or_else(|| {
                Error::Data(format!("unresolvable document id `{}`", pair.doc_id))
            })?;
            Ok((encode(query, doc, index)?, pair.label))
        })
        .collect::<Result<_>>()?;

    let val = ValidationData::prepare(validation, collection, index)?;

    let mut current = initial.clone();
    let mut history = TrainHistory::default();
    let mut best_mrr = f64::NEG_INFINITY;
    let mut best_scorer = current.clone();
    let mut best_epoch = 0usize;
    let mut strikes = 0usize;

    for epoch in 1..=config.epochs {
        let mut order: Vec<usize> = (0..items.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(epoch_seed(config.seed, epoch));
        order.shuffle(&mut rng);

        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(FeatureVector, u8)> = chunk.iter().map(|&i| items[i]).collect();
            loss_sum += batch_loss(&current, &batch)? * batch.len() as f64;
            let (grad_w, grad_b) = gradient(&current, &batch)?;
            for (w, g) in current.weights.iter_mut().zip(grad_w.iter()) {
                *w -= config.learning_rate * g;
            }
            current.bias -= config.learning_rate * grad_b;
        }
        let train_loss = loss_sum / items.len() as f64;

        let (val_loss, val_mrr10) = val.evaluate(&current, validation.qrels)?;
        history.records.push(EpochRecord {
            epoch,
            train_loss,
            val_loss,
            val_mrr10,
        });

        if val_mrr10 > best_mrr {
            best_mrr = val_mrr10;
            best_scorer = current.clone();
            best_epoch = epoch;
            strikes = 0;
        } else {
            strikes += 1;
            if strikes >= config.patience {
                break;
            }
        }
    }

    history.best_epoch = best_epoch;
    Ok((best_scorer, history))
}
