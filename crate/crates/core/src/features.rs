//! Per-(query, document) feature assembly: lexical scores, microblog count
//! features, the recency prior, and one density feature per crowd-signal
//! source. Non-temporal columns are min-max normalized per query; temporal
//! columns are already in [0, 1].

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

use crate::corpus::{CollectionStats, Document, Query};
use crate::density::{build_density, recency_prior, temporal_feature, Correction, DensityEstimate, RecencyConfig};
use crate::eval::Qrels;
use crate::signals::{SourceKind, TemporalSignal};
use crate::textscore::{bm25_score, idf_sum, lm_dirichlet_score, Bm25Config, DirichletConfig};

pub const FEATURE_COUNT: usize = 18;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("feature file line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("feature file header mismatch: expected {expected:?}")]
    Header { expected: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The canonical feature set: thirteen non-temporal features followed by the
/// recency prior and the four crowd-signal densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureName {
    Bm25,
    LmDir,
    Idf,
    Length,
    NumUrls,
    HasUrls,
    NumHashtags,
    HasHashtags,
    NumMentions,
    HasMentions,
    IsReply,
    NumStatuses,
    NumFollowers,
    Recency,
    TwitterFeedback,
    WikiViews,
    WikiEdits,
    News,
}

impl FeatureName {
    pub const ALL: [FeatureName; FEATURE_COUNT] = [
        FeatureName::Bm25,
        FeatureName::LmDir,
        FeatureName::Idf,
        FeatureName::Length,
        FeatureName::NumUrls,
        FeatureName::HasUrls,
        FeatureName::NumHashtags,
        FeatureName::HasHashtags,
        FeatureName::NumMentions,
        FeatureName::HasMentions,
        FeatureName::IsReply,
        FeatureName::NumStatuses,
        FeatureName::NumFollowers,
        FeatureName::Recency,
        FeatureName::TwitterFeedback,
        FeatureName::WikiViews,
        FeatureName::WikiEdits,
        FeatureName::News,
    ];

    pub const NON_TEMPORAL: [FeatureName; 13] = [
        FeatureName::Bm25,
        FeatureName::LmDir,
        FeatureName::Idf,
        FeatureName::Length,
        FeatureName::NumUrls,
        FeatureName::HasUrls,
        FeatureName::NumHashtags,
        FeatureName::HasHashtags,
        FeatureName::NumMentions,
        FeatureName::HasMentions,
        FeatureName::IsReply,
        FeatureName::NumStatuses,
        FeatureName::NumFollowers,
    ];

    pub const TEMPORAL: [FeatureName; 5] = [
        FeatureName::Recency,
        FeatureName::TwitterFeedback,
        FeatureName::WikiViews,
        FeatureName::WikiEdits,
        FeatureName::News,
    ];

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&f| f == self).expect("listed")
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureName::Bm25 => "BM25",
            FeatureName::LmDir => "LM.Dir",
            FeatureName::Idf => "IDF",
            FeatureName::Length => "Length",
            FeatureName::NumUrls => "NumURLs",
            FeatureName::HasUrls => "HasURLs",
            FeatureName::NumHashtags => "NumHashtags",
            FeatureName::HasHashtags => "HasHashtags",
            FeatureName::NumMentions => "NumMentions",
            FeatureName::HasMentions => "HasMentions",
            FeatureName::IsReply => "isReply",
            FeatureName::NumStatuses => "NumStatuses",
            FeatureName::NumFollowers => "NumFollowers",
            FeatureName::Recency => "Recency",
            FeatureName::TwitterFeedback => "TF",
            FeatureName::WikiViews => "WV",
            FeatureName::WikiEdits => "WE",
            FeatureName::News => "News",
        }
    }

    pub fn parse(s: &str) -> Option<FeatureName> {
        Self::ALL.iter().copied().find(|f| f.as_str() == s)
    }

    /// The density feature fed by a crowd-signal source.
    pub fn for_source(source: SourceKind) -> FeatureName {
        match source {
            SourceKind::News => FeatureName::News,
            SourceKind::WikiViews => FeatureName::WikiViews,
            SourceKind::WikiEdits => FeatureName::WikiEdits,
            SourceKind::TwitterFeedback => FeatureName::TwitterFeedback,
        }
    }
}

impl std::fmt::Display for FeatureName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A dense value per canonical feature name.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureVector([f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, f: FeatureName) -> f64 {
        self.0[f.index()]
    }

    pub fn set(&mut self, f: FeatureName, value: f64) {
        self.0[f.index()] = value;
    }

    pub fn values(&self) -> &[f64; FEATURE_COUNT] {
        &self.0
    }
}

impl std::ops::Index<FeatureName> for FeatureVector {
    type Output = f64;
    fn index(&self, f: FeatureName) -> &f64 {
        &self.0[f.index()]
    }
}

/// One candidate document's features for a query, in raw and per-query
/// normalized form, plus its relevance grade when judged.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub doc_id: String,
    pub label: u8,
    pub raw: FeatureVector,
    pub normalized: FeatureVector,
}

/// All candidate rows for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryFeatureSet {
    pub query_id: String,
    pub rows: Vec<FeatureRow>,
}

impl QueryFeatureSet {
    pub fn apply_labels(&mut self, qrels: &Qrels) {
        for row in &mut self.rows {
            row.label = qrels.grade(&self.query_id, &row.doc_id);
        }
    }

    pub fn num_relevant_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.label >= 1).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub bm25: Bm25Config,
    pub dirichlet: DirichletConfig,
    pub recency: RecencyConfig,
    pub correction: Correction,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            bm25: Bm25Config::default(),
            dirichlet: DirichletConfig::default(),
            recency: RecencyConfig::default(),
            correction: Correction::Reflection,
        }
    }
}

/// Count features over the raw text: URL / hashtag / mention counts use
/// whitespace-chunk prefixes ("http", '#', '@'), isReply fires when the
/// trimmed text starts with '@', and Length is the normalized token count.
pub fn count_features(doc: &Document) -> FeatureVector {
    let mut v = FeatureVector::new();
    let mut urls = 0u32;
    let mut hashtags = 0u32;
    let mut mentions = 0u32;
    for chunk in doc.text.split_whitespace() {
        if chunk.starts_with("http") {
            urls += 1;
        }
        if chunk.starts_with('#') {
            hashtags += 1;
        }
        if chunk.starts_with('@') {
            mentions += 1;
        }
    }
    v.set(FeatureName::Length, doc.tokens.len() as f64);
    v.set(FeatureName::NumUrls, f64::from(urls));
    v.set(FeatureName::HasUrls, f64::from(u8::from(urls > 0)));
    v.set(FeatureName::NumHashtags, f64::from(hashtags));
    v.set(FeatureName::HasHashtags, f64::from(u8::from(hashtags > 0)));
    v.set(FeatureName::NumMentions, f64::from(mentions));
    v.set(FeatureName::HasMentions, f64::from(u8::from(mentions > 0)));
    v.set(
        FeatureName::IsReply,
        f64::from(u8::from(doc.text.trim_start().starts_with('@'))),
    );
    v
}

/// Assembles raw and normalized feature rows for a query's candidates.
///
/// Each source present in `signals` yields a density feature; missing
/// sources score 0 for every row, so dropping a source changes only its own
/// column. The recency prior is rescaled by 1/lambda into [0, 1].
pub fn assemble_features(
    query: &Query,
    candidates: &[(&Document, f64)],
    signals: &[TemporalSignal],
    stats: &CollectionStats,
    cfg: &FeatureConfig,
) -> QueryFeatureSet {
    let mut set = QueryFeatureSet {
        query_id: query.query_id.clone(),
        rows: Vec::new(),
    };
    if candidates.is_empty() {
        return set;
    }

    let doc_times: Vec<i64> = candidates.iter().map(|&(d, _)| d.timestamp).collect();
    let earliest_candidate = *doc_times.iter().min().expect("nonempty");

    // One density per present source over its own domain, so sources stay
    // independent of each other.
    let mut densities: BTreeMap<SourceKind, DensityEstimate> = BTreeMap::new();
    for signal in signals {
        if let Some(est) = source_density(query, signal, earliest_candidate, cfg.correction) {
            densities.insert(signal.source, est);
        }
    }

    for &(doc, _) in candidates {
        let mut raw = count_features(doc);
        raw.set(FeatureName::Bm25, bm25_score(query, doc, stats, &cfg.bm25));
        raw.set(
            FeatureName::LmDir,
            lm_dirichlet_score(query, doc, stats, &cfg.dirichlet).unwrap_or(0.0),
        );
        raw.set(FeatureName::Idf, idf_sum(query, doc, stats));
        raw.set(FeatureName::NumStatuses, doc.num_statuses as f64);
        raw.set(FeatureName::NumFollowers, doc.num_followers as f64);

        let prior = recency_prior(&cfg.recency, query.query_time, doc.timestamp)
            .expect("candidates are published at or before the query time");
        raw.set(FeatureName::Recency, prior / cfg.recency.lambda);

        for source in SourceKind::ALL {
            raw.set(
                FeatureName::for_source(source),
                temporal_feature(densities.get(&source), &doc_times, doc.timestamp),
            );
        }

        set.rows.push(FeatureRow {
            doc_id: doc.doc_id.clone(),
            label: 0,
            raw,
            normalized: raw,
        });
    }

    normalize_rows(&mut set.rows);
    set
}

/// Builds one source's density over [earliest evidence, query time], where
/// the earliest evidence is the lesser of `earliest_candidate` and the
/// signal's own first point. Future points are discarded defensively
/// (file-loaded signals are not guaranteed clean); returns `None` when
/// nothing usable remains.
pub fn source_density(
    query: &Query,
    signal: &TemporalSignal,
    earliest_candidate: i64,
    correction: Correction,
) -> Option<DensityEstimate> {
    let points: Vec<(i64, f64)> = signal
        .points()
        .iter()
        .copied()
        .filter(|&(t, _)| t <= query.query_time)
        .collect();
    if points.is_empty() || !points.iter().any(|&(_, w)| w > 0.0) {
        return None;
    }
    let earliest_point = points.iter().map(|&(t, _)| t).min().expect("nonempty");
    let mut t_min = earliest_candidate.min(earliest_point);
    let t_max = query.query_time;
    if t_min >= t_max {
        // Degenerate single-instant domain; widen by a day so the estimate
        // still has a usable support.
        t_min = t_max - 86_400;
    }
    let filtered = TemporalSignal::new(signal.source, signal.query_id.clone(), points).ok()?;
    build_density(&filtered, (t_min, t_max), correction).ok()
}

/// Min-max normalizes the non-temporal columns across rows; constant columns
/// become 0. Temporal columns pass through untouched.
fn normalize_rows(rows: &mut [FeatureRow]) {
    for feature in FeatureName::NON_TEMPORAL {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in rows.iter() {
            let v = row.raw.get(feature);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let span = hi - lo;
        for row in rows.iter_mut() {
            let v = row.raw.get(feature);
            let normalized = if span > 0.0 { (v - lo) / span } else { 0.0 };
            row.normalized.set(feature, normalized);
        }
    }
}

// ---------------------------------------------------------------------------
// Feature CSV interchange
// ---------------------------------------------------------------------------

fn csv_header() -> String {
    let names: Vec<&str> = FeatureName::ALL.iter().map(|f| f.as_str()).collect();
    format!("query_id,doc_id,label,{}", names.join(","))
}

/// Serializes raw feature values; normalization is recomputed on load, so
/// the round trip preserves the normalized view bit-for-bit.
pub fn write_features_csv(sets: &[QueryFeatureSet]) -> String {
    let mut out = csv_header();
    out.push('\n');
    for set in sets {
        for row in &set.rows {
            out.push_str(&format!("{},{},{}", set.query_id, row.doc_id, row.label));
            for feature in FeatureName::ALL {
                out.push_str(&format!(",{}", row.raw.get(feature)));
            }
            out.push('\n');
        }
    }
    out
}

/// Reads a feature CSV written by [`write_features_csv`], grouping rows into
/// per-query sets in encounter order and recomputing normalization.
pub fn read_features_csv<R: Read>(reader: R) -> Result<Vec<QueryFeatureSet>, FeatureError> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = csv_reader.records();

    let expected = csv_header();
    match records.next() {
        Some(header) => {
            let header = header?;
            let got: Vec<&str> = header.iter().collect();
            if got.join(",") != expected {
                return Err(FeatureError::Header { expected });
            }
        }
        None => return Ok(Vec::new()),
    }

    let mut sets: Vec<QueryFeatureSet> = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, record) in records.enumerate() {
        let line = i + 2;
        let record = record?;
        if record.len() != 3 + FEATURE_COUNT {
            return Err(FeatureError::Line {
                line,
                message: format!("expected {} fields, got {}", 3 + FEATURE_COUNT, record.len()),
            });
        }
        let query_id = record[0].to_string();
        let doc_id = record[1].to_string();
        let label: u8 = record[2].parse().map_err(|_| FeatureError::Line {
            line,
            message: format!("bad label {:?}", &record[2]),
        })?;
        let mut raw = FeatureVector::new();
        for (idx, feature) in FeatureName::ALL.into_iter().enumerate() {
            let field = &record[3 + idx];
            let value: f64 = field.parse().map_err(|_| FeatureError::Line {
                line,
                message: format!("bad value {field:?} for {feature}"),
            })?;
            raw.set(feature, value);
        }

        let slot = *seen.entry(query_id.clone()).or_insert_with(|| {
            sets.push(QueryFeatureSet {
                query_id: query_id.clone(),
                rows: Vec::new(),
            });
            sets.len() - 1
        });
        sets[slot].rows.push(FeatureRow {
            doc_id,
            label,
            raw,
            normalized: raw,
        });
    }

    for set in &mut sets {
        normalize_rows(&mut set.rows);
    }
    Ok(sets)
}

pub fn load_features_csv(path: &Path) -> Result<Vec<QueryFeatureSet>, FeatureError> {
    read_features_csv(std::fs::File::open(path)?)
}
