//! Document ingestion, filtering, collection statistics, and query-likelihood
//! candidate retrieval over an in-memory inverted index.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textscore::{lm_dirichlet_terms, DirichletConfig};

/// Default candidate pool depth fed to reranking (TREC run depth).
pub const DEFAULT_CANDIDATE_DEPTH: usize = 1000;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("duplicate doc_id: {0}")]
    DuplicateDocId(String),
    #[error("corpus line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("corpus line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A timestamped short post with author metadata; the unit being ranked.
///
/// `tokens` is always derived from `text` via [`tokenize`], including after
/// deserialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "DocumentRecord", into = "DocumentRecord")]
pub struct Document {
    pub doc_id: String,
    /// Publication time, epoch seconds.
    pub timestamp: i64,
    pub text: String,
    pub num_statuses: u64,
    pub num_followers: u64,
    pub is_retweet: bool,
    /// ISO-639-1 language tag.
    pub language: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(
        doc_id: impl Into<String>,
        timestamp: i64,
        text: impl Into<String>,
        num_statuses: u64,
        num_followers: u64,
        is_retweet: bool,
        language: impl Into<String>,
    ) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Self {
            doc_id: doc_id.into(),
            timestamp,
            text,
            num_statuses,
            num_followers,
            is_retweet,
            language: language.into(),
            tokens,
        }
    }
}

/// Wire form of [`Document`]; `tokens` is recomputed on ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DocumentRecord {
    doc_id: String,
    timestamp: i64,
    text: String,
    num_statuses: u64,
    num_followers: u64,
    is_retweet: bool,
    language: String,
}

impl From<DocumentRecord> for Document {
    fn from(r: DocumentRecord) -> Self {
        Document::new(
            r.doc_id,
            r.timestamp,
            r.text,
            r.num_statuses,
            r.num_followers,
            r.is_retweet,
            r.language,
        )
    }
}

impl From<Document> for DocumentRecord {
    fn from(d: Document) -> Self {
        DocumentRecord {
            doc_id: d.doc_id,
            timestamp: d.timestamp,
            text: d.text,
            num_statuses: d.num_statuses,
            num_followers: d.num_followers,
            is_retweet: d.is_retweet,
            language: d.language,
        }
    }
}

/// A topic issued at a point in time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub query_id: String,
    pub text: String,
    /// Query issue time, epoch seconds. No document or signal evidence after
    /// this instant may influence the ranking.
    pub query_time: i64,
}

impl Query {
    pub fn new(query_id: impl Into<String>, text: impl Into<String>, query_time: i64) -> Self {
        Self {
            query_id: query_id.into(),
            text: text.into(),
            query_time,
        }
    }

    pub fn tokens(&self) -> Vec<String> {
        tokenize(&self.text)
    }

    pub fn token_set(&self) -> std::collections::BTreeSet<String> {
        self.tokens().into_iter().collect()
    }
}

/// Corpus-level term statistics backing the retrieval scorers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CollectionStats {
    pub num_docs: usize,
    /// Mean document length in tokens; 0 for an empty collection.
    pub avg_doc_length: f64,
    pub doc_freq: BTreeMap<String, u32>,
    pub collection_freq: BTreeMap<String, u64>,
    pub total_terms: u64,
    /// Most recent document timestamp in the collection.
    pub latest_timestamp: i64,
}

impl CollectionStats {
    pub fn doc_freq(&self, term: &str) -> u32 {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }

    pub fn collection_freq(&self, term: &str) -> u64 {
        self.collection_freq.get(term).copied().unwrap_or(0)
    }

    /// Collection language model probability p(t|C).
    pub fn collection_prob(&self, term: &str) -> f64 {
        if self.total_terms == 0 {
            return 0.0;
        }
        self.collection_freq(term) as f64 / self.total_terms as f64
    }
}

/// Immutable postings over an admitted document set. Safe to share across
/// concurrent query evaluations once built.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvertedIndex {
    docs: Vec<Document>,
    /// term -> (doc slot, term frequency), slots ascending.
    postings: BTreeMap<String, Vec<(u32, u32)>>,
    #[serde(skip)]
    by_id: BTreeMap<String, u32>,
}

impl InvertedIndex {
    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn document(&self, slot: u32) -> &Document {
        &self.docs[slot as usize]
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.by_id.get(doc_id).map(|&slot| self.document(slot))
    }

    pub fn postings(&self, term: &str) -> Option<&[(u32, u32)]> {
        self.postings.get(term).map(Vec::as_slice)
    }

    /// Rebuilds the doc_id lookup; required after deserialization.
    fn reindex(&mut self) {
        self.by_id = self
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i as u32))
            .collect();
    }
}

/// Lowercases and splits on runs of non-alphanumeric characters. No stemming,
/// no stopword removal.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Collection admission filter: rejects retweets (metadata flag or a leading
/// "RT" token in the raw text) and non-English documents.
pub fn admit_document(doc: &Document) -> bool {
    !doc.is_retweet && !has_rt_prefix(&doc.text) && doc.language == "en"
}

/// True when the raw text starts with the token "RT", case-insensitive.
/// Checked before tokenization so punctuation after the prefix still counts.
fn has_rt_prefix(text: &str) -> bool {
    let trimmed = text.trim_start();
    let mut chars = trimmed.chars();
    match (chars.next(), chars.next()) {
        (Some(r), Some(t)) if r.eq_ignore_ascii_case(&'r') && t.eq_ignore_ascii_case(&'t') => {
            chars.next().is_none_or(|c| !c.is_alphanumeric())
        }
        _ => false,
    }
}

/// Builds the inverted index and collection statistics over `docs`.
///
/// Callers are expected to have filtered the sequence with [`admit_document`];
/// a duplicate doc_id is rejected with the offending id.
pub fn build_index(
    docs: impl IntoIterator<Item = Document>,
) -> Result<(InvertedIndex, CollectionStats), CorpusError> {
    let mut index = InvertedIndex {
        docs: Vec::new(),
        postings: BTreeMap::new(),
        by_id: BTreeMap::new(),
    };
    let mut stats = CollectionStats::default();

    for doc in docs {
        let slot = index.docs.len() as u32;
        if index.by_id.insert(doc.doc_id.clone(), slot).is_some() {
            return Err(CorpusError::DuplicateDocId(doc.doc_id));
        }

        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for token in &doc.tokens {
            *counts.entry(token.as_str()).or_insert(0) += 1;
        }
        for (term, tf) in counts {
            index
                .postings
                .entry(term.to_string())
                .or_default()
                .push((slot, tf));
            *stats.doc_freq.entry(term.to_string()).or_insert(0) += 1;
            *stats.collection_freq.entry(term.to_string()).or_insert(0) += u64::from(tf);
        }

        stats.total_terms += doc.tokens.len() as u64;
        stats.latest_timestamp = stats.latest_timestamp.max(doc.timestamp);
        index.docs.push(doc);
    }

    stats.num_docs = index.docs.len();
    stats.avg_doc_length = if stats.num_docs == 0 {
        0.0
    } else {
        stats.total_terms as f64 / stats.num_docs as f64
    };
    Ok((index, stats))
}

/// Scores documents matching at least one query term with Dirichlet-smoothed
/// query likelihood and returns the top `k` published at or before the query
/// time. Ties break by doc_id descending. A query with no indexed terms
/// yields an empty list.
pub fn retrieve_candidates<'i>(
    query: &Query,
    index: &'i InvertedIndex,
    stats: &CollectionStats,
    cfg: &DirichletConfig,
    k: usize,
) -> Vec<(&'i Document, f64)> {
    let terms = query.tokens();
    let scorable: Vec<&str> = terms
        .iter()
        .map(String::as_str)
        .filter(|t| stats.collection_freq(t) > 0)
        .collect();
    if scorable.is_empty() || k == 0 {
        return Vec::new();
    }

    // Union of postings for the scorable terms, with per-doc term frequencies.
    let mut matched: BTreeMap<u32, BTreeMap<&str, u32>> = BTreeMap::new();
    for term in scorable.iter().copied().collect::<std::collections::BTreeSet<_>>() {
        if let Some(postings) = index.postings(term) {
            for &(slot, tf) in postings {
                matched.entry(slot).or_default().insert(term, tf);
            }
        }
    }

    let mut scored: Vec<(&Document, f64)> = matched
        .into_iter()
        .filter_map(|(slot, tfs)| {
            let doc = index.document(slot);
            if doc.timestamp > query.query_time {
                return None; // no future evidence
            }
            let dl = doc.tokens.len();
            let score = lm_dirichlet_terms(
                scorable.iter().map(|t| (*t, tfs.get(t).copied().unwrap_or(0))),
                dl,
                stats,
                cfg,
            );
            Some((doc, score))
        })
        .collect();

    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| b.0.doc_id.cmp(&a.0.doc_id))
    });
    scored.truncate(k);
    scored
}

/// Reads a line-delimited corpus snapshot: one JSON document record per line.
pub fn read_corpus<R: Read>(reader: R) -> Result<Vec<Document>, CorpusError> {
    let reader = BufReader::new(reader);
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document =
            serde_json::from_str(&line).map_err(|source| CorpusError::Parse { line: i + 1, source })?;
        if doc.timestamp <= 0 {
            return Err(CorpusError::Invalid {
                line: i + 1,
                message: format!("non-positive timestamp for doc {}", doc.doc_id),
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn load_corpus(path: &Path) -> Result<Vec<Document>, CorpusError> {
    read_corpus(std::fs::File::open(path)?)
}

pub fn write_corpus(docs: &[Document]) -> String {
    let mut out = String::new();
    for doc in docs {
        out.push_str(&serde_json::to_string(doc).expect("document serializes"));
        out.push('\n');
    }
    out
}

/// Reads a query file: one JSON record per line with query_id, text, query_time.
pub fn read_queries<R: Read>(reader: R) -> Result<Vec<Query>, CorpusError> {
    let reader = BufReader::new(reader);
    let mut queries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let query: Query =
            serde_json::from_str(&line).map_err(|source| CorpusError::Parse { line: i + 1, source })?;
        if query.query_time <= 0 {
            return Err(CorpusError::Invalid {
                line: i + 1,
                message: format!("non-positive query_time for query {}", query.query_id),
            });
        }
        if tokenize(&query.text).is_empty() {
            return Err(CorpusError::Invalid {
                line: i + 1,
                message: format!("query {} has no tokens", query.query_id),
            });
        }
        queries.push(query);
    }
    Ok(queries)
}

pub fn load_queries(path: &Path) -> Result<Vec<Query>, CorpusError> {
    read_queries(std::fs::File::open(path)?)
}

pub fn write_queries(queries: &[Query]) -> String {
    let mut out = String::new();
    for q in queries {
        out.push_str(&serde_json::to_string(q).expect("query serializes"));
        out.push('\n');
    }
    out
}

/// Serialized index + stats bundle produced by the `index` command.
#[derive(Debug, Serialize, Deserialize)]
pub struct IndexFile {
    pub stats: CollectionStats,
    pub index: InvertedIndex,
}

impl IndexFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("index serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        let mut file: IndexFile = serde_json::from_str(s)?;
        file.index.reindex();
        Ok(file)
    }
}
