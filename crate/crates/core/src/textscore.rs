//! Lexical similarity and retrieval scoring: Jaccard overlap, Okapi BM25,
//! Dirichlet-smoothed query likelihood, and a standalone IDF feature.
//!
//! All functions are pure over immutable inputs.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{CollectionStats, Document, Query};

#[derive(Debug, Error, PartialEq)]
pub enum ScoreError {
    /// Every query term is unseen in the collection, so the smoothed language
    /// model is undefined (p(t|C) would be zero for all terms).
    #[error("empty scorable query: no query term occurs in the collection")]
    EmptyScorableQuery,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Config {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Config {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletConfig {
    pub mu: f64,
}

impl Default for DirichletConfig {
    fn default() -> Self {
        Self { mu: 2500.0 }
    }
}

/// Jaccard similarity |a ∩ b| / |a ∪ b|; 0 when both sets are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let intersection = a.intersection(b).count();
    let union = a.len() + b.len() - intersection;
    intersection as f64 / union as f64
}

fn term_counts(doc: &Document) -> HashMap<&str, u32> {
    let mut counts = HashMap::new();
    for t in &doc.tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}

/// Robertson-Sparck Jones IDF, floored at zero so very common terms cannot
/// contribute negatively.
fn idf_rsj(num_docs: usize, df: u32) -> f64 {
    let n = num_docs as f64;
    let df = f64::from(df);
    ((n - df + 0.5) / (df + 0.5)).ln().max(0.0)
}

/// Okapi BM25 over the unique query terms. Terms absent from the document
/// contribute zero.
pub fn bm25_score(query: &Query, doc: &Document, stats: &CollectionStats, cfg: &Bm25Config) -> f64 {
    let counts = term_counts(doc);
    let dl = doc.tokens.len() as f64;
    let norm = if stats.avg_doc_length > 0.0 {
        1.0 - cfg.b + cfg.b * dl / stats.avg_doc_length
    } else {
        1.0
    };
    query
        .token_set()
        .iter()
        .map(|term| {
            let tf = f64::from(counts.get(term.as_str()).copied().unwrap_or(0));
            if tf == 0.0 {
                return 0.0;
            }
            idf_rsj(stats.num_docs, stats.doc_freq(term)) * tf * (cfg.k1 + 1.0)
                / (tf + cfg.k1 * norm)
        })
        .sum()
}

/// Dirichlet-smoothed query-likelihood log score over pre-extracted
/// (term, tf) pairs. Callers must pass only terms with nonzero collection
/// frequency; query-term multiplicity is preserved by repeating pairs.
pub fn lm_dirichlet_terms<'a>(
    terms: impl IntoIterator<Item = (&'a str, u32)>,
    doc_len: usize,
    stats: &CollectionStats,
    cfg: &DirichletConfig,
) -> f64 {
    let denom = doc_len as f64 + cfg.mu;
    terms
        .into_iter()
        .map(|(term, tf)| ((f64::from(tf) + cfg.mu * stats.collection_prob(term)) / denom).ln())
        .sum()
}

/// Dirichlet-smoothed query-likelihood log score for one document.
///
/// Query terms unseen in the collection are dropped before scoring. If every
/// term is unseen the score is undefined.
pub fn lm_dirichlet_score(
    query: &Query,
    doc: &Document,
    stats: &CollectionStats,
    cfg: &DirichletConfig,
) -> Result<f64, ScoreError> {
    let tokens = query.tokens();
    let scorable: Vec<&str> = tokens
        .iter()
        .map(String::as_str)
        .filter(|t| stats.collection_freq(t) > 0)
        .collect();
    if scorable.is_empty() {
        return Err(ScoreError::EmptyScorableQuery);
    }
    let counts = term_counts(doc);
    Ok(lm_dirichlet_terms(
        scorable
            .iter()
            .map(|t| (*t, counts.get(t).copied().unwrap_or(0))),
        doc.tokens.len(),
        stats,
        cfg,
    ))
}

/// Sum over query terms present in the document of ln(1 + (N-df+0.5)/(df+0.5)).
/// The ln(1+·) form keeps every matched term's contribution non-negative.
pub fn idf_sum(query: &Query, doc: &Document, stats: &CollectionStats) -> f64 {
    let counts = term_counts(doc);
    let n = stats.num_docs as f64;
    query
        .token_set()
        .iter()
        .filter(|term| counts.contains_key(term.as_str()))
        .map(|term| {
            let df = f64::from(stats.doc_freq(term));
            (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
        })
        .sum()
}
