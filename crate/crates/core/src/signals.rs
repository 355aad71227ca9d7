//! Extraction of per-query temporal crowd signals from news headlines,
//! Wikipedia page views, Wikipedia edit history, and corpus feedback.
//!
//! Every source reduces to the same representation: a set of
//! (timestamp, non-negative weight) pairs tagged with its origin. Extractors
//! never emit evidence dated after the query time.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{tokenize, Document, Query};
use crate::textscore::jaccard;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("signal file line {line}: {message}")]
    Row { line: usize, message: String },
    #[error("unknown signal source: {0}")]
    UnknownSource(String),
    #[error("negative weight {weight} in {kind} signal for query {query_id}")]
    NegativeWeight {
        query_id: String,
        kind: SourceKind,
        weight: f64,
    },
    #[error("{kind} signal for query {query_id} has points but no positive weight")]
    NoPositiveWeight { query_id: String, kind: SourceKind },
    #[error("snapshot {path}: {message}")]
    Snapshot { path: String, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The four extractable crowd-signal sources. Recency is a prior, not a
/// mined signal, so it is not listed here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SourceKind {
    News,
    WikiViews,
    WikiEdits,
    TwitterFeedback,
}

impl SourceKind {
    pub const ALL: [SourceKind; 4] = [
        SourceKind::News,
        SourceKind::WikiViews,
        SourceKind::WikiEdits,
        SourceKind::TwitterFeedback,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::News => "news",
            SourceKind::WikiViews => "wiki_views",
            SourceKind::WikiEdits => "wiki_edits",
            SourceKind::TwitterFeedback => "twitter_feedback",
        }
    }

    pub fn parse(s: &str) -> Result<Self, SignalError> {
        match s {
            "news" => Ok(SourceKind::News),
            "wiki_views" => Ok(SourceKind::WikiViews),
            "wiki_edits" => Ok(SourceKind::WikiEdits),
            "twitter_feedback" => Ok(SourceKind::TwitterFeedback),
            other => Err(SignalError::UnknownSource(other.to_string())),
        }
    }
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A source-tagged set of (timestamp, weight) pairs for one query.
///
/// Invariants: weights are non-negative, a nonempty signal has at least one
/// positive weight, and extractors only emit timestamps at or before the
/// owning query's time. Points are kept sorted by (timestamp, weight).
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalSignal {
    pub source: SourceKind,
    pub query_id: String,
    points: Vec<(i64, f64)>,
}

impl TemporalSignal {
    pub fn new(
        source: SourceKind,
        query_id: impl Into<String>,
        mut points: Vec<(i64, f64)>,
    ) -> Result<Self, SignalError> {
        let query_id = query_id.into();
        for &(_, w) in &points {
            if !(w >= 0.0) {
                return Err(SignalError::NegativeWeight {
                    query_id,
                    kind: source,
                    weight: w,
                });
            }
        }
        if !points.is_empty() && !points.iter().any(|&(_, w)| w > 0.0) {
            return Err(SignalError::NoPositiveWeight {
                query_id,
                kind: source,
            });
        }
        points.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        Ok(Self {
            source,
            query_id,
            points,
        })
    }

    pub fn empty(source: SourceKind, query_id: impl Into<String>) -> Self {
        Self {
            source,
            query_id: query_id.into(),
            points: Vec::new(),
        }
    }

    pub fn points(&self) -> &[(i64, f64)] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn earliest(&self) -> Option<i64> {
        self.points.first().map(|&(t, _)| t)
    }
}

/// A dated headline from one news site, with its title pre-tokenized.
/// Timestamps are already adjusted by the site's configured offset.
#[derive(Debug, Clone, PartialEq)]
pub struct NewsHeadline {
    pub site: String,
    pub timestamp: i64,
    pub title_tokens: BTreeSet<String>,
}

impl NewsHeadline {
    pub fn new(site: impl Into<String>, timestamp: i64, title: &str) -> Self {
        Self {
            site: site.into(),
            timestamp,
            title_tokens: tokenize(title).into_iter().collect(),
        }
    }
}

/// One article revision with the text it added relative to its predecessor.
#[derive(Debug, Clone, PartialEq)]
pub struct Revision {
    pub timestamp: i64,
    pub added_text: String,
    pub is_bot: bool,
}

/// Per-article view and edit history used by the Wikipedia extractors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WikiArticleData {
    pub title: String,
    /// (day, view count); days strictly increasing.
    pub daily_views: Vec<(NaiveDate, u64)>,
    /// Revisions ordered by non-decreasing timestamp.
    pub revisions: Vec<Revision>,
}

/// News signal: one point per headline dated at or before the query time
/// whose title-to-query Jaccard similarity reaches `min_jaccard`. The weight
/// is the Jaccard coefficient itself, so zero-overlap headlines never match.
pub fn extract_news_signal(
    query: &Query,
    headlines: &[NewsHeadline],
    min_jaccard: f64,
) -> TemporalSignal {
    let query_tokens = query.token_set();
    let points: Vec<(i64, f64)> = headlines
        .iter()
        .filter(|h| h.timestamp <= query.query_time)
        .filter_map(|h| {
            let j = jaccard(&query_tokens, &h.title_tokens);
            (j > 0.0 && j >= min_jaccard).then_some((h.timestamp, j))
        })
        .collect();
    TemporalSignal::new(SourceKind::News, query.query_id.clone(), points)
        .expect("jaccard weights are positive")
}

/// Picks the candidate title with the highest query Jaccard similarity.
/// Ties resolve to the earliest-listed candidate; returns `None` when the
/// list is empty or nothing overlaps the query.
pub fn select_wikipedia_article<'a>(query: &Query, candidate_titles: &'a [String]) -> Option<&'a str> {
    let query_tokens = query.token_set();
    let mut best: Option<(&str, f64)> = None;
    for title in candidate_titles {
        let title_tokens: BTreeSet<String> = tokenize(title).into_iter().collect();
        let j = jaccard(&query_tokens, &title_tokens);
        if j > 0.0 && best.is_none_or(|(_, bj)| j > bj) {
            best = Some((title, j));
        }
    }
    best.map(|(t, _)| t)
}

/// Page-view signal: one point per day at 00:00 UTC, weighted by that day's
/// count divided by the mean count over the emitted window. Days after the
/// query time are excluded; an all-zero or empty history yields no signal.
pub fn extract_wiki_views_signal(query: &Query, article: &WikiArticleData) -> TemporalSignal {
    let days: Vec<(i64, u64)> = article
        .daily_views
        .iter()
        .map(|&(date, count)| (midnight_epoch(date), count))
        .filter(|&(t, _)| t <= query.query_time)
        .collect();
    if days.is_empty() {
        return TemporalSignal::empty(SourceKind::WikiViews, query.query_id.clone());
    }
    let mean = days.iter().map(|&(_, c)| c as f64).sum::<f64>() / days.len() as f64;
    if mean == 0.0 {
        return TemporalSignal::empty(SourceKind::WikiViews, query.query_id.clone());
    }
    let points = days
        .into_iter()
        .map(|(t, c)| (t, c as f64 / mean))
        .collect();
    TemporalSignal::new(SourceKind::WikiViews, query.query_id.clone(), points)
        .expect("mean-normalized weights are non-negative")
}

/// Seconds since the epoch at 00:00 UTC of `date`.
pub fn midnight_epoch(date: NaiveDate) -> i64 {
    date.and_hms_opt(0, 0, 0)
        .expect("midnight exists")
        .and_utc()
        .timestamp()
}

/// Edit signal: one point per non-bot revision at or before the query time,
/// weighted by the number of occurrences in the added text of query terms
/// that do not appear in the article title (title terms act as stopwords).
/// Zero-weight revisions are dropped.
pub fn extract_wiki_edits_signal(query: &Query, article: &WikiArticleData) -> TemporalSignal {
    let title_tokens: BTreeSet<String> = tokenize(&article.title).into_iter().collect();
    let query_terms: BTreeSet<String> = query
        .token_set()
        .into_iter()
        .filter(|t| !title_tokens.contains(t))
        .collect();

    let mut points = Vec::new();
    for rev in &article.revisions {
        if rev.is_bot || rev.timestamp > query.query_time {
            continue;
        }
        let mut tf = 0u64;
        for token in tokenize(&rev.added_text) {
            if query_terms.contains(&token) {
                tf += 1;
            }
        }
        if tf > 0 {
            points.push((rev.timestamp, tf as f64));
        }
    }
    TemporalSignal::new(SourceKind::WikiEdits, query.query_id.clone(), points)
        .expect("term frequencies are positive")
}

/// Corpus feedback signal: candidate timestamps weighted by each document's
/// share of the total query likelihood. Log scores are shifted by their
/// maximum before exponentiation, which computes the likelihood ratios
/// without underflow. Weights sum to 1 for a nonempty candidate list.
pub fn extract_twitter_feedback_signal(
    query: &Query,
    candidates: &[(&Document, f64)],
) -> TemporalSignal {
    if candidates.is_empty() {
        return TemporalSignal::empty(SourceKind::TwitterFeedback, query.query_id.clone());
    }
    let max = candidates
        .iter()
        .map(|&(_, s)| s)
        .fold(f64::NEG_INFINITY, f64::max);
    let shifted: Vec<f64> = candidates.iter().map(|&(_, s)| (s - max).exp()).collect();
    let total: f64 = shifted.iter().sum();
    let points = candidates
        .iter()
        .zip(&shifted)
        .map(|(&(doc, _), p)| (doc.timestamp, p / total))
        .collect();
    TemporalSignal::new(SourceKind::TwitterFeedback, query.query_id.clone(), points)
        .expect("normalized likelihoods are positive")
}

/// Line-based positive diff: returns the lines of `next` not accounted for
/// by `prev` (multiset semantics). Used to precompute per-revision added
/// text when preparing edit-history snapshots from full revision texts.
pub fn positive_diff(prev: &str, next: &str) -> String {
    let mut remaining: BTreeMap<&str, usize> = BTreeMap::new();
    for line in prev.lines() {
        *remaining.entry(line).or_insert(0) += 1;
    }
    let mut added = Vec::new();
    for line in next.lines() {
        match remaining.get_mut(line) {
            Some(count) if *count > 0 => *count -= 1,
            _ => added.push(line),
        }
    }
    added.join("\n")
}

// ---------------------------------------------------------------------------
// Snapshot-file ingestion
// ---------------------------------------------------------------------------

/// Supplies raw per-query source material for extraction. The shipped
/// implementation reads local snapshot files; a live client for a list of
/// sites or an encyclopedia API would implement the same trait.
pub trait SourceProvider {
    /// All candidate headlines visible to the query (the extractor applies
    /// the time and similarity filters).
    fn headlines(&self) -> &[NewsHeadline];
    /// Candidate article titles for the query in search-rank order, at most
    /// ten entries.
    fn wiki_candidates(&self, query: &Query) -> Vec<String>;
    fn article(&self, title: &str) -> Option<&WikiArticleData>;
}

/// Snapshot-backed [`SourceProvider`]. Article candidates are the snapshot
/// titles sharing at least one token with the query, in file order.
#[derive(Debug, Default)]
pub struct SnapshotStore {
    headlines: Vec<NewsHeadline>,
    articles: BTreeMap<String, WikiArticleData>,
    title_order: Vec<String>,
}

impl SnapshotStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_headlines(mut self, headlines: Vec<NewsHeadline>) -> Self {
        self.headlines = headlines;
        self
    }

    pub fn add_article(&mut self, article: WikiArticleData) {
        if !self.articles.contains_key(&article.title) {
            self.title_order.push(article.title.clone());
        }
        self.articles.insert(article.title.clone(), article);
    }

    /// Loads the news headline snapshot (`site,timestamp,title` CSV with a
    /// header row), applying per-site clock offsets in seconds.
    pub fn load_news(
        &mut self,
        path: &Path,
        site_offsets: &BTreeMap<String, i64>,
    ) -> Result<(), SignalError> {
        let mut reader = csv::Reader::from_path(path)?;
        for (i, row) in reader.deserialize::<NewsRow>().enumerate() {
            let row = row.map_err(|e| SignalError::Row {
                line: i + 2,
                message: e.to_string(),
            })?;
            let offset = site_offsets.get(&row.site).copied().unwrap_or(0);
            self.headlines
                .push(NewsHeadline::new(row.site, row.timestamp + offset, &row.title));
        }
        Ok(())
    }

    /// Loads the per-article daily view snapshot (`title,date,count` CSV).
    /// Dates must be strictly increasing within each article.
    pub fn load_wiki_views(&mut self, path: &Path) -> Result<(), SignalError> {
        let mut reader = csv::Reader::from_path(path)?;
        for (i, row) in reader.deserialize::<ViewsRow>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| SignalError::Row {
                line,
                message: e.to_string(),
            })?;
            let date = NaiveDate::parse_from_str(&row.date, "%Y-%m-%d").map_err(|e| {
                SignalError::Row {
                    line,
                    message: format!("bad date {:?}: {e}", row.date),
                }
            })?;
            let article = self.entry(&row.title);
            if let Some(&(last, _)) = article.daily_views.last() {
                if date <= last {
                    return Err(SignalError::Row {
                        line,
                        message: format!("view dates for {:?} must be strictly increasing", row.title),
                    });
                }
            }
            article.daily_views.push((date, row.count));
        }
        Ok(())
    }

    /// Loads the revision snapshot (`title,timestamp,editor,is_bot,added_text`
    /// CSV). A revision counts as bot-made when the file says so, when the
    /// editor is in `bot_editors`, or when the editor name ends in "bot".
    pub fn load_wiki_revisions(
        &mut self,
        path: &Path,
        bot_editors: &BTreeSet<String>,
    ) -> Result<(), SignalError> {
        let mut reader = csv::Reader::from_path(path)?;
        for (i, row) in reader.deserialize::<RevisionRow>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| SignalError::Row {
                line,
                message: e.to_string(),
            })?;
            let is_bot = row.is_bot || is_bot_editor(&row.editor, bot_editors);
            let article = self.entry(&row.title);
            if let Some(last) = article.revisions.last() {
                if row.timestamp < last.timestamp {
                    return Err(SignalError::Row {
                        line,
                        message: format!(
                            "revision timestamps for {:?} must be non-decreasing",
                            row.title
                        ),
                    });
                }
            }
            article.revisions.push(Revision {
                timestamp: row.timestamp,
                added_text: row.added_text,
                is_bot,
            });
        }
        Ok(())
    }

    fn entry(&mut self, title: &str) -> &mut WikiArticleData {
        if !self.articles.contains_key(title) {
            self.title_order.push(title.to_string());
            self.articles.insert(
                title.to_string(),
                WikiArticleData {
                    title: title.to_string(),
                    ..WikiArticleData::default()
                },
            );
        }
        self.articles.get_mut(title).unwrap()
    }
}

/// Editor-name bot heuristic: a configured name list plus any name ending
/// in "bot", case-insensitive.
pub fn is_bot_editor(editor: &str, bot_editors: &BTreeSet<String>) -> bool {
    let lower = editor.to_lowercase();
    bot_editors.contains(&lower) || lower.ends_with("bot")
}

impl SourceProvider for SnapshotStore {
    fn headlines(&self) -> &[NewsHeadline] {
        &self.headlines
    }

    fn wiki_candidates(&self, query: &Query) -> Vec<String> {
        let query_tokens = query.token_set();
        self.title_order
            .iter()
            .filter(|title| {
                tokenize(title).iter().any(|t| query_tokens.contains(t))
            })
            .take(10)
            .cloned()
            .collect()
    }

    fn article(&self, title: &str) -> Option<&WikiArticleData> {
        self.articles.get(title)
    }
}

/// Runs the news and Wikipedia extractors for one query against a provider.
/// Empty signals are omitted from the result.
pub fn extract_external_signals(
    query: &Query,
    provider: &dyn SourceProvider,
    min_jaccard: f64,
) -> Vec<TemporalSignal> {
    let mut signals = Vec::new();
    let news = extract_news_signal(query, provider.headlines(), min_jaccard);
    if !news.is_empty() {
        signals.push(news);
    }
    let candidates = provider.wiki_candidates(query);
    if let Some(title) = select_wikipedia_article(query, &candidates) {
        if let Some(article) = provider.article(title) {
            let views = extract_wiki_views_signal(query, article);
            if !views.is_empty() {
                signals.push(views);
            }
            let edits = extract_wiki_edits_signal(query, article);
            if !edits.is_empty() {
                signals.push(edits);
            }
        }
    }
    signals
}

#[derive(Debug, Deserialize)]
struct NewsRow {
    site: String,
    timestamp: i64,
    title: String,
}

#[derive(Debug, Deserialize)]
struct ViewsRow {
    title: String,
    date: String,
    count: u64,
}

#[derive(Debug, Deserialize)]
struct RevisionRow {
    title: String,
    timestamp: i64,
    editor: String,
    is_bot: bool,
    added_text: String,
}

// ---------------------------------------------------------------------------
// Signal CSV interchange
// ---------------------------------------------------------------------------

pub const SIGNAL_CSV_HEADER: &str = "query_id,source,timestamp,weight";

/// Parses the signal CSV (`query_id,source,timestamp,weight`), grouping rows
/// into one signal per (query, source). Rows with negative weights, unknown
/// sources, or malformed fields are rejected with their line number.
pub fn read_signals<R: Read>(reader: R) -> Result<BTreeMap<String, Vec<TemporalSignal>>, SignalError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let mut grouped: BTreeMap<(String, SourceKind), Vec<(i64, f64)>> = BTreeMap::new();
    for (i, row) in csv_reader.deserialize::<SignalRow>().enumerate() {
        let line = i + 2; // header is line 1
        let row = row.map_err(|e| SignalError::Row {
            line,
            message: e.to_string(),
        })?;
        let source = SourceKind::parse(&row.source).map_err(|e| SignalError::Row {
            line,
            message: e.to_string(),
        })?;
        if !(row.weight >= 0.0) {
            return Err(SignalError::Row {
                line,
                message: format!("weight must be non-negative, got {}", row.weight),
            });
        }
        grouped
            .entry((row.query_id, source))
            .or_default()
            .push((row.timestamp, row.weight));
    }

    let mut out: BTreeMap<String, Vec<TemporalSignal>> = BTreeMap::new();
    for ((query_id, source), points) in grouped {
        let signal = TemporalSignal::new(source, query_id.clone(), points)?;
        out.entry(query_id).or_default().push(signal);
    }
    Ok(out)
}

pub fn load_signal_file(path: &Path) -> Result<BTreeMap<String, Vec<TemporalSignal>>, SignalError> {
    read_signals(std::fs::File::open(path)?)
}

/// Serializes signals to the interchange CSV, sorted by query, source, and
/// timestamp so identical inputs produce identical bytes.
pub fn write_signals(signals: &BTreeMap<String, Vec<TemporalSignal>>) -> String {
    let mut out = String::from(SIGNAL_CSV_HEADER);
    out.push('\n');
    for (query_id, per_query) in signals {
        let mut ordered: Vec<&TemporalSignal> = per_query.iter().collect();
        ordered.sort_by_key(|s| s.source);
        for signal in ordered {
            for &(t, w) in signal.points() {
                out.push_str(&format!("{query_id},{},{t},{w}\n", signal.source));
            }
        }
    }
    out
}

#[derive(Debug, Deserialize)]
struct SignalRow {
    query_id: String,
    source: String,
    timestamp: i64,
    weight: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query() -> Query {
        Query::new("MB225", "barbara walters chicken pox", 1_000_000)
    }

    #[test]
    fn news_signal_no_overlap_is_empty() {
        let headlines = vec![NewsHeadline::new("ap", 10, "stock market rally")];
        assert!(extract_news_signal(&query(), &headlines, 0.1).is_empty());
    }

    #[test]
    fn news_signal_identity_weight() {
        let headlines = vec![NewsHeadline::new("ap", 10, "barbara walters chicken pox")];
        let signal = extract_news_signal(&query(), &headlines, 0.1);
        assert_eq!(signal.points(), &[(10, 1.0)]);
    }

    #[test]
    fn news_signal_jaccard_weight() {
        let headlines = vec![NewsHeadline::new(
            "reuters",
            20,
            "barbara walters recovering chicken pox",
        )];
        let signal = extract_news_signal(&query(), &headlines, 0.1);
        assert_eq!(signal.len(), 1);
        assert!((signal.points()[0].1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn news_signal_drops_future_headlines() {
        let headlines = vec![NewsHeadline::new(
            "ap",
            2_000_000,
            "barbara walters chicken pox",
        )];
        assert!(extract_news_signal(&query(), &headlines, 0.1).is_empty());
    }

    #[test]
    fn article_selection_prefers_higher_jaccard() {
        let candidates = vec!["Barbara Walters".to_string(), "Barbara (film)".to_string()];
        // J = 2/4 vs 1/5 over token sets
        assert_eq!(
            select_wikipedia_article(&query(), &candidates),
            Some("Barbara Walters")
        );
    }

    #[test]
    fn article_selection_empty_and_tie() {
        assert_eq!(select_wikipedia_article(&query(), &[]), None);
        let twins = vec!["Chicken one".to_string(), "Chicken two".to_string()];
        assert_eq!(select_wikipedia_article(&query(), &twins), Some("Chicken one"));
        let unrelated = vec!["Rust programming".to_string()];
        assert_eq!(select_wikipedia_article(&query(), &unrelated), None);
    }

    fn day(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn views_signal_mean_normalizes() {
        let article = WikiArticleData {
            title: "Barbara Walters".into(),
            daily_views: vec![
                (day("2013-02-01"), 10),
                (day("2013-02-02"), 20),
                (day("2013-02-03"), 300),
            ],
            revisions: vec![],
        };
        let q = Query::new("q", "barbara walters", midnight_epoch(day("2013-03-01")));
        let signal = extract_wiki_views_signal(&q, &article);
        let weights: Vec<f64> = signal.points().iter().map(|&(_, w)| w).collect();
        let mean = 110.0;
        for (got, count) in weights.iter().zip([10.0, 20.0, 300.0]) {
            assert!((got - count / mean).abs() < 1e-12);
        }
        // timestamps are midnights
        assert_eq!(signal.points()[0].0, midnight_epoch(day("2013-02-01")));
        let weight_mean = weights.iter().sum::<f64>() / weights.len() as f64;
        assert!((weight_mean - 1.0).abs() < 1e-9);
    }

    #[test]
    fn views_signal_uniform_counts() {
        let article = WikiArticleData {
            title: "T".into(),
            daily_views: vec![(day("2013-02-01"), 7), (day("2013-02-02"), 7), (day("2013-02-03"), 7)],
            revisions: vec![],
        };
        let q = Query::new("q", "t", midnight_epoch(day("2013-03-01")));
        let signal = extract_wiki_views_signal(&q, &article);
        for &(_, w) in signal.points() {
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn views_signal_all_zero_is_empty() {
        let article = WikiArticleData {
            title: "T".into(),
            daily_views: vec![(day("2013-02-01"), 0), (day("2013-02-02"), 0)],
            revisions: vec![],
        };
        let q = Query::new("q", "t", midnight_epoch(day("2013-03-01")));
        assert!(extract_wiki_views_signal(&q, &article).is_empty());
    }

    #[test]
    fn views_signal_excludes_future_days() {
        let article = WikiArticleData {
            title: "T".into(),
            daily_views: vec![(day("2013-02-01"), 5), (day("2013-02-10"), 50)],
            revisions: vec![],
        };
        let q = Query::new("q", "t", midnight_epoch(day("2013-02-05")));
        let signal = extract_wiki_views_signal(&q, &article);
        assert_eq!(signal.len(), 1);
        // only one emitted day, so its weight is count/mean = 1
        assert!((signal.points()[0].1 - 1.0).abs() < 1e-12);
    }

    fn edits_article(revisions: Vec<Revision>) -> WikiArticleData {
        WikiArticleData {
            title: "Barbara Walters".into(),
            daily_views: vec![],
            revisions,
        }
    }

    #[test]
    fn edits_signal_title_terms_are_stopwords() {
        let article = edits_article(vec![Revision {
            timestamp: 10,
            added_text: "Barbara".into(),
            is_bot: false,
        }]);
        assert!(extract_wiki_edits_signal(&query(), &article).is_empty());
    }

    #[test]
    fn edits_signal_counts_term_frequency() {
        let article = edits_article(vec![Revision {
            timestamp: 10,
            added_text: "chicken pox chicken".into(),
            is_bot: false,
        }]);
        let signal = extract_wiki_edits_signal(&query(), &article);
        assert_eq!(signal.points(), &[(10, 3.0)]);
    }

    #[test]
    fn edits_signal_drops_bots_and_future() {
        let article = edits_article(vec![
            Revision {
                timestamp: 10,
                added_text: "chicken pox".into(),
                is_bot: true,
            },
            Revision {
                timestamp: 2_000_000,
                added_text: "chicken pox".into(),
                is_bot: false,
            },
        ]);
        assert!(extract_wiki_edits_signal(&query(), &article).is_empty());
    }

    fn doc(id: &str, ts: i64) -> Document {
        Document::new(id, ts, "text", 0, 0, false, "en")
    }

    #[test]
    fn feedback_single_candidate() {
        let d = doc("d1", 42);
        let signal = extract_twitter_feedback_signal(&query(), &[(&d, -3.0)]);
        assert_eq!(signal.points(), &[(42, 1.0)]);
    }

    #[test]
    fn feedback_likelihood_ratio() {
        // log scores differing by ln(3) give a 3:1 likelihood ratio
        let a = doc("d1", 10);
        let b = doc("d2", 20);
        let signal = extract_twitter_feedback_signal(&query(), &[(&a, 3.0f64.ln()), (&b, 0.0)]);
        let weights: BTreeMap<i64, f64> = signal.points().iter().copied().collect();
        assert!((weights[&10] - 0.75).abs() < 1e-12);
        assert!((weights[&20] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn feedback_equal_scores_are_uniform() {
        let docs: Vec<Document> = (0..4).map(|i| doc(&format!("d{i}"), i)).collect();
        let candidates: Vec<(&Document, f64)> = docs.iter().map(|d| (d, -7.5)).collect();
        let signal = extract_twitter_feedback_signal(&query(), &candidates);
        for &(_, w) in signal.points() {
            assert!((w - 0.25).abs() < 1e-12);
        }
        let total: f64 = signal.points().iter().map(|&(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn feedback_empty_candidates() {
        assert!(extract_twitter_feedback_signal(&query(), &[]).is_empty());
    }

    #[test]
    fn positive_diff_keeps_new_lines_only() {
        let prev = "alpha\nbeta";
        let next = "alpha\ngamma\nbeta\ngamma";
        assert_eq!(positive_diff(prev, next), "gamma\ngamma");
        assert_eq!(positive_diff("same", "same"), "");
    }

    #[test]
    fn bot_editor_heuristics() {
        let extra: BTreeSet<String> = ["cluebot ng".to_string()].into();
        assert!(is_bot_editor("SmackBot", &extra));
        assert!(is_bot_editor("ClueBot NG", &extra));
        assert!(!is_bot_editor("jsmith", &extra));
    }

    #[test]
    fn signal_csv_roundtrip() {
        let q = query();
        let mut signals: BTreeMap<String, Vec<TemporalSignal>> = BTreeMap::new();
        signals.insert(
            q.query_id.clone(),
            vec![
                TemporalSignal::new(SourceKind::News, &q.query_id, vec![(10, 0.8), (20, 0.4)]).unwrap(),
                TemporalSignal::new(SourceKind::WikiEdits, &q.query_id, vec![(15, 2.0)]).unwrap(),
            ],
        );
        let text = write_signals(&signals);
        let back = read_signals(text.as_bytes()).unwrap();
        assert_eq!(back, signals);
        // canonical output is stable
        assert_eq!(write_signals(&back), text);
    }

    #[test]
    fn signal_csv_header_only() {
        let map = read_signals("query_id,source,timestamp,weight\n".as_bytes()).unwrap();
        assert!(map.is_empty());
    }

    #[test]
    fn signal_csv_single_row() {
        let text = "query_id,source,timestamp,weight\nMB225,news,100,0.8\n";
        let map = read_signals(text.as_bytes()).unwrap();
        let signals = &map["MB225"];
        assert_eq!(signals.len(), 1);
        assert_eq!(signals[0].source, SourceKind::News);
        assert_eq!(signals[0].points(), &[(100, 0.8)]);
    }

    #[test]
    fn signal_csv_rejects_negative_weight_with_line() {
        let text = "query_id,source,timestamp,weight\nMB225,news,100,0.8\nMB225,news,101,-1\n";
        match read_signals(text.as_bytes()) {
            Err(SignalError::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn signal_csv_rejects_unknown_source() {
        let text = "query_id,source,timestamp,weight\nMB225,telegraph,100,0.8\n";
        match read_signals(text.as_bytes()) {
            Err(SignalError::Row { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("telegraph"));
            }
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn snapshot_store_candidates_respect_file_order_and_cap() {
        let mut store = SnapshotStore::new();
        for i in 0..15 {
            store.add_article(WikiArticleData {
                title: format!("chicken article {i}"),
                ..WikiArticleData::default()
            });
        }
        let candidates = store.wiki_candidates(&query());
        assert_eq!(candidates.len(), 10);
        assert_eq!(candidates[0], "chicken article 0");
    }
}
