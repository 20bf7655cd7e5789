//! Data model and file carriers: passages, queries, relevance
//! judgments, ranked runs, training pairs, and reference answers.
//!
//! Formats:
//! - collection / queries: TSV, one `id<TAB>text` per line
//! - qrels: 4-column TREC, `query_id 0 doc_id grade`
//! - run: 6-column TREC, `query_id Q0 doc_id rank score tag`
//! - training pairs: JSONL, `{"query_id","doc_id","label"}`
//! - reference answers: TSV, `query_id<TAB>answer`

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A passage with a unique id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub text: String,
}

/// A query with a unique id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub id: String,
    pub text: String,
}

/// One line of a ranked run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub query_id: String,
    pub doc_id: String,
    /// 1-based rank, contiguous within a query.
    pub rank: usize,
    pub score: f64,
}

/// A labeled (query, document) pair for training.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub query_id: String,
    pub doc_id: String,
    /// 0 = irrelevant, 1 = relevant.
    pub label: u8,
}

fn validate_id(id: &str) -> std::result::Result<(), String> {
    if id.is_empty() {
        return Err("empty id".to_string());
    }
    if id.chars().any(char::is_whitespace) {
        return Err(format!("id `{id}` contains whitespace"));
    }
    Ok(())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Parse an `id<TAB>text` TSV into records, rejecting malformed lines
/// and duplicate ids with the offending line number. Blank lines are
/// skipped; the text column may be empty.
fn load_tsv_records(path: &Path, kind: &str) -> Result<Vec<(String, String)>> {
    let raw = read_to_string(path)?;
    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (lineno, line) in raw.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "malformed line: missing TAB"))?;
        validate_id(id).map_err(|m| Error::parse(path, lineno, m))?;
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(
                path,
                lineno,
                format!("duplicate {kind} id `{id}`"),
            ));
        }
        records.push((id.to_string(), text.to_string()));
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// Collection / QuerySet
// ---------------------------------------------------------------------------

/// Immutable id -> passage store, preserving file order.
#[derive(Debug, Clone)]
pub struct Collection {
    docs: Vec<Document>,
    by_id: HashMap<String, usize>,
}

impl Collection {
    pub fn from_documents(docs: Vec<Document>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(docs.len());
        for (i, doc) in docs.iter().enumerate() {
            validate_id(&doc.id).map_err(Error::Data)?;
            if by_id.insert(doc.id.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate document id `{}`", doc.id)));
            }
        }
        Ok(Collection { docs, by_id })
    }

    /// Read a `id<TAB>text` TSV. Blank lines are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let docs = load_tsv_records(path.as_ref(), "document")?
            .into_iter()
            .map(|(id, text)| Document { id, text })
            .collect();
        Collection::from_documents(docs)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for doc in &self.docs {
            if doc.text.contains('\n') {
                return Err(Error::Data(format!(
                    "document `{}` contains a newline and cannot be written as TSV",
                    doc.id
                )));
            }
            let _ = writeln!(out, "{}\t{}", doc.id, doc.text);
        }
        write_file(path, &out)
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.by_id.get(id).map(|&i| &self.docs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Document> {
        self.docs.iter()
    }
}

/// Immutable id -> query store, preserving file order.
#[derive(Debug, Clone)]
pub struct QuerySet {
    queries: Vec<Query>,
    by_id: HashMap<String, usize>,
}

impl QuerySet {
    pub fn from_queries(queries: Vec<Query>) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(queries.len());
        for (i, q) in queries.iter().enumerate() {
            validate_id(&q.id).map_err(Error::Data)?;
            if by_id.insert(q.id.clone(), i).is_some() {
                return Err(Error::Data(format!("duplicate query id `{}`", q.id)));
            }
        }
        Ok(QuerySet { queries, by_id })
    }

    /// Read a `id<TAB>text` TSV. Same contract as [`Collection::load`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let queries = load_tsv_records(path.as_ref(), "query")?
            .into_iter()
            .map(|(id, text)| Query { id, text })
            .collect();
        QuerySet::from_queries(queries)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for q in &self.queries {
            if q.text.contains('\n') {
                return Err(Error::Data(format!(
                    "query `{}` contains a newline and cannot be written as TSV",
                    q.id
                )));
            }
            let _ = writeln!(out, "{}\t{}", q.id, q.text);
        }
        write_file(path, &out)
    }

    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Query> {
        self.by_id.get(id).map(|&i| &self.queries[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Query> {
        self.queries.iter()
    }
}

// ---------------------------------------------------------------------------
// Qrels
// ---------------------------------------------------------------------------

/// Ground-truth relevance judgments: (query id, doc id) -> grade.
/// A grade above zero means relevant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Qrels::default()
    }

    pub fn add(&mut self, query_id: &str, doc_id: &str, grade: u32) -> Result<()> {
        let per_query = self.judgments.entry(query_id.to_string()).or_default();
        if per_query.insert(doc_id.to_string(), grade).is_some() {
            return Err(Error::Data(format!(
                "duplicate judgment for ({query_id}, {doc_id})"
            )));
        }
        Ok(())
    }

    /// Read 4-column TREC qrels: `query_id 0 doc_id grade`,
    /// whitespace-separated. The second column is ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let raw = read_to_string(path)?;
        let mut qrels = Qrels::new();
        for (lineno, line) in raw.lines().enumerate() {
            let lineno = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 4 {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected 4 columns, found {}", cols.len()),
                ));
            }
            let grade: i64 = cols[3]
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid grade `{}`", cols[3])))?;
            if grade < 0 {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("negative grade `{grade}`"),
                ));
            }
            qrels
                .add(cols[0], cols[2], grade as u32)
                .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        }
        Ok(qrels)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for (qid, docs) in &self.judgments {
            for (did, grade) in docs {
                let _ = writeln!(out, "{qid} 0 {did} {grade}");
            }
        }
        write_file(path, &out)
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// Total number of judged (query, doc) pairs.
    pub fn len(&self) -> usize {
        self.judgments.values().map(BTreeMap::len).sum()
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> Option<u32> {
        self.judgments.get(query_id)?.get(doc_id).copied()
    }

    pub fn is_relevant(&self, query_id: &str, doc_id: &str) -> bool {
        self.grade(query_id, doc_id).is_some_and(|g| g > 0)
    }

    /// Number of docs judged relevant (grade > 0) for a query.
    pub fn relevant_count(&self, query_id: &str) -> usize {
        self.judgments
            .get(query_id)
            .map_or(0, |docs| docs.values().filter(|&&g| g > 0).count())
    }

    /// All judgments in (query id, doc id) order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.judgments.iter().flat_map(|(qid, docs)| {
            docs.iter()
                .map(move |(did, &g)| (qid.as_str(), did.as_str(), g))
        })
    }

    /// Judgments restricted to query ids present in `queries`.
    pub fn filter_queries(&self, queries: &QuerySet) -> Qrels {
        let judgments = self
            .judgments
            .iter()
            .filter(|(qid, _)| queries.get(qid).is_some())
            .map(|(qid, docs)| (qid.clone(), docs.clone()))
            .collect();
        Qrels { judgments }
    }
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

/// Render a score the way run files store it.
fn format_score(score: f64) -> String {
    format!("{score:.6}")
}

/// Quantize a score to its 6-decimal file representation.
fn quantize_score(score: f64) -> f64 {
    format_score(score).parse().expect("formatted float")
}

/// Per-query ranked lists in canonical form: within each query, entries
/// are ordered by score descending with ties broken by doc id
/// ascending, ranks are contiguous from 1, and scores are quantized to
/// the 6 decimal places the file format preserves. Canonical form makes
/// write -> load an exact identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Run {
    rankings: BTreeMap<String, Vec<RunEntry>>,
}

impl Run {
    pub fn new() -> Self {
        Run::default()
    }

    /// Group entries by query, validate the ranked-list invariants
    /// (ranks 1..n without gaps, unique doc ids, scores finite and
    /// non-increasing with rank), then canonicalize.
    pub fn from_entries(entries: Vec<RunEntry>) -> Result<Self> {
        let mut rankings: BTreeMap<String, Vec<RunEntry>> = BTreeMap::new();
        for entry in entries {
            if !entry.score.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite score for ({}, {})",
                    entry.query_id, entry.doc_id
                )));
            }
            rankings.entry(entry.query_id.clone()).or_default().push(entry);
        }
        for (qid, list) in &mut rankings {
            list.sort_by_key(|e| e.rank);
            for (i, entry) in list.iter().enumerate() {
                if entry.rank != i + 1 {
                    return Err(Error::Data(format!(
                        "query {qid}: ranks must be 1..{} with no gaps, found rank {}",
                        list.len(),
                        entry.rank
                    )));
                }
            }
            for pair in list.windows(2) {
                if pair[1].score > pair[0].score {
                    return Err(Error::Data(format!(
                        "query {qid}: score increases from rank {} to rank {}",
                        pair[0].rank, pair[1].rank
                    )));
                }
            }
            let mut seen: Vec<&str> = list.iter().map(|e| e.doc_id.as_str()).collect();
            seen.sort_unstable();
            if seen.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Data(format!(
                    "query {qid}: duplicate doc id in ranked list"
                )));
            }
            // Canonicalize: quantize, re-break ties by doc id, re-rank.
            for entry in list.iter_mut() {
                entry.score = quantize_score(entry.score);
            }
            list.sort_by(|a, b| {
                b.score
                    .total_cmp(&a.score)
                    .then_with(|| a.doc_id.cmp(&b.doc_id))
            });
            for (i, entry) in list.iter_mut().enumerate() {
                entry.rank = i + 1;
            }
        }
        Ok(Run { rankings })
    }

    /// Ranked lists keyed by query id, in query-id order.
    pub fn rankings(&self) -> impl Iterator<Item = (&str, &[RunEntry])> {
        self.rankings.iter().map(|(q, l)| (q.as_str(), l.as_slice()))
    }

    pub fn get(&self, query_id: &str) -> Option<&[RunEntry]> {
        self.rankings.get(query_id).map(Vec::as_slice)
    }

    pub fn query_count(&self) -> usize {
        self.rankings.len()
    }

    pub fn entry_count(&self) -> usize {
        self.rankings.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    /// Write as 6-column TREC: `query_id Q0 doc_id rank score tag`,
    /// scores at 6 decimal places.
    pub fn write(&self, tag: &str, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if tag.is_empty() || tag.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "run tag `{tag}` must be non-empty and contain no whitespace"
            )));
        }
        let mut out = String::new();
        for (qid, list) in &self.rankings {
            for entry in list {
                let _ = writeln!(
                    out,
                    "{qid} Q0 {} {} {} {tag}",
                    entry.doc_id,
                    entry.rank,
                    format_score(entry.score)
                );
            }
        }
        write_file(path, &out)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Run::load_tagged(path)?.0)
    }

    /// Load a run and report the tag of its first line, if any.
    pub fn load_tagged(path: impl AsRef<Path>) -> Result<(Self, Option<String>)> {
        let path = path.as_ref();
        let raw = read_to_string(path)?;
        let mut entries = Vec::new();
        let mut tag = None;
        for (lineno, line) in raw.lines().enumerate() {
            let lineno = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() != 6 {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected 6 columns, found {}", cols.len()),
                ));
            }
            let rank: usize = cols[3]
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid rank `{}`", cols[3])))?;
            if rank == 0 {
                return Err(Error::parse(path, lineno, "rank must be >= 1"));
            }
            let score: f64 = cols[4]
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid score `{}`", cols[4])))?;
            if !score.is_finite() {
                return Err(Error::parse(path, lineno, "score must be finite"));
            }
            if tag.is_none() {
                tag = Some(cols[5].to_string());
            }
            entries.push(RunEntry {
                query_id: cols[0].to_string(),
                doc_id: cols[2].to_string(),
                rank,
                score,
            });
        }
        let run = Run::from_entries(entries)
            .map_err(|e| Error::parse(path, 0, format!("invalid run: {e}")))?;
        Ok((run, tag))
    }
}

// ---------------------------------------------------------------------------
// Training pairs
// ---------------------------------------------------------------------------

/// Read JSONL training pairs, one object per line.
pub fn load_training_pairs(path: impl AsRef<Path>) -> Result<Vec<TrainingPair>> {
    let path = path.as_ref();
    let raw = read_to_string(path)?;
    let mut pairs = Vec::new();
    for (lineno, line) in raw.lines().enumerate() {
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let pair: TrainingPair = serde_json::from_str(line)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        if pair.label > 1 {
            return Err(Error::parse(
                path,
                lineno,
                format!("label must be 0 or 1, found {}", pair.label),
            ));
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

pub fn write_training_pairs(pairs: &[TrainingPair], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for pair in pairs {
        let line = serde_json::to_string(pair)
            .map_err(|e| Error::Data(format!("cannot serialize training pair: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    write_file(path, &out)
}

/// Combine every relevant (grade > 0) judgment with an equal number of
/// negatives sampled uniformly without replacement from `negatives`.
/// The output order is a deterministic shuffle driven by `seed`.
pub fn build_balanced_training_set(
    qrels: &Qrels,
    negatives: &[TrainingPair],
    seed: u64,
) -> Result<Vec<TrainingPair>> {
    if qrels.is_empty() {
        return Err(Error::Data("qrels is empty".to_string()));
    }
    if let Some(bad) = negatives.iter().find(|p| p.label != 0) {
        return Err(Error::Data(format!(
            "negative pool contains a pair with label {} for ({}, {})",
            bad.label, bad.query_id, bad.doc_id
        )));
    }
    let positives: Vec<TrainingPair> = qrels
        .iter()
        .filter(|&(_, _, grade)| grade > 0)
        .map(|(qid, did, _)| TrainingPair {
            query_id: qid.to_string(),
            doc_id: did.to_string(),
            label: 1,
        })
        .collect();
    if negatives.len() < positives.len() {
        return Err(Error::Data(format!(
            "need {} negatives to balance {} positives, only {} supplied",
            positives.len(),
            positives.len(),
            negatives.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, negatives.len(), positives.len());
    let mut out = positives;
    out.extend(picked.iter().map(|i| negatives[i].clone()));
    out.shuffle(&mut rng);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Reference answers
// ---------------------------------------------------------------------------

/// Reference answer text per query id, for ROUGE-L evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReferenceAnswers {
    answers: BTreeMap<String, String>,
}

impl ReferenceAnswers {
    pub fn new() -> Self {
        ReferenceAnswers::default()
    }

    pub fn add(&mut self, query_id: &str, answer: &str) -> Result<()> {
        if self
            .answers
            .insert(query_id.to_string(), answer.to_string())
            .is_some()
        {
            return Err(Error::Data(format!(
                "duplicate reference for query `{query_id}`"
            )));
        }
        Ok(())
    }

    /// Read a `query_id<TAB>answer` TSV, at most one line per query.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut refs = ReferenceAnswers::new();
        for (id, answer) in load_tsv_records(path.as_ref(), "reference")? {
            refs.add(&id, &answer)?;
        }
        Ok(refs)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for (qid, answer) in &self.answers {
            if answer.contains('\n') {
                return Err(Error::Data(format!(
                    "reference for `{qid}` contains a newline and cannot be written as TSV"
                )));
            }
            let _ = writeln!(out, "{qid}\t{answer}");
        }
        write_file(path, &out)
    }

    pub fn get(&self, query_id: &str) -> Option<&str> {
        self.answers.get(query_id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}
