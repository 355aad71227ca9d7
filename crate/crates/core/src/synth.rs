//! Seeded synthetic benchmark generator.
//!
//! Each temporal query plants a Gaussian time cluster of relevant documents
//! plus an off-peak cluster of lexically identical confounders, and emits
//! news/views/edits snapshots whose peaks align (noisily) with the relevant
//! period. Atemporal queries separate relevant documents lexically and have
//! no external signals, so they exercise the query router. All output is a
//! pure function of the seed.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, Query};
use crate::density::SECONDS_PER_DAY;
use crate::eval::Qrels;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub num_queries: usize,
    pub relevant_per_query: usize,
    pub confounders_per_query: usize,
    pub background_docs: usize,
    /// Documents span [0, span_days]; queries arrive just after the span.
    pub span_days: f64,
    pub base_epoch: i64,
    /// Every n-th query is atemporal (no external signals, lexical
    /// relevance). 4 gives a 3:1 temporal/atemporal mix.
    pub atemporal_period: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_queries: 200,
            relevant_per_query: 30,
            confounders_per_query: 30,
            background_docs: 6000,
            span_days: 55.0,
            base_epoch: 1_359_676_800, // 2013-02-01T00:00:00Z
            atemporal_period: 4,
            seed: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewsSnapshotRow {
    pub site: String,
    pub timestamp: i64,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViewsSnapshotRow {
    pub title: String,
    pub date: NaiveDate,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RevisionSnapshotRow {
    pub title: String,
    pub timestamp: i64,
    pub editor: String,
    pub is_bot: bool,
    pub added_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub documents: Vec<Document>,
    pub queries: Vec<Query>,
    pub qrels: Qrels,
    pub news: Vec<NewsSnapshotRow>,
    pub views: Vec<ViewsSnapshotRow>,
    pub revisions: Vec<RevisionSnapshotRow>,
}

const COMMON_TERMS: [&str; 8] = [
    "update", "report", "coverage", "story", "briefing", "alert", "recap", "bulletin",
];

const FILLER_TERMS: [&str; 16] = [
    "the", "with", "over", "about", "amid", "after", "before", "latest", "full", "new", "live",
    "major", "ongoing", "local", "official", "public",
];

const NEWS_SITES: [&str; 4] = ["ap", "reuters", "bbc", "usatoday"];

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        // Box-Muller; one draw per call keeps the stream simple.
        let u1: f64 = self.rng.random_range(1e-12..1.0);
        let u2: f64 = self.rng.random_range(0.0..1.0);
        mean + sd * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    fn pick<'a>(&mut self, items: &[&'a str]) -> &'a str {
        items[self.rng.random_range(0..items.len())]
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.random_range(0.0..1.0) < p
    }
}

pub fn generate(cfg: &SynthConfig) -> SynthData {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    let mut data = SynthData {
        documents: Vec::new(),
        queries: Vec::new(),
        qrels: Qrels::new(),
        news: Vec::new(),
        views: Vec::new(),
        revisions: Vec::new(),
    };
    let mut doc_serial = 0usize;

    for q in 0..cfg.num_queries {
        let query_id = format!("S{:03}", q + 1);
        let term_a = format!("topic{q}a");
        let term_b = format!("topic{q}b");
        let common = COMMON_TERMS[q % COMMON_TERMS.len()];
        let query_time =
            cfg.base_epoch + ((cfg.span_days + 0.5 + g.uniform(0.0, 2.5)) * SECONDS_PER_DAY) as i64;
        data.queries.push(Query::new(
            &query_id,
            format!("{term_a} {term_b} {common}"),
            query_time,
        ));

        let temporal = cfg.atemporal_period == 0 || (q + 1) % cfg.atemporal_period != 0;
        if temporal {
            self::temporal_query(cfg, &mut g, &mut data, &mut doc_serial, q, &query_id, &term_a, &term_b, common);
        } else {
            self::atemporal_query(cfg, &mut g, &mut data, &mut doc_serial, &query_id, &term_a, &term_b, common);
        }
    }

    background_docs(cfg, &mut g, &mut data, &mut doc_serial);
    data
}

fn day_ts(cfg: &SynthConfig, day: f64) -> i64 {
    cfg.base_epoch + (day * SECONDS_PER_DAY) as i64
}

fn push_doc(
    data: &mut SynthData,
    serial: &mut usize,
    ts: i64,
    text: String,
    g: &mut Gen,
    language: &str,
    is_retweet: bool,
) -> String {
    let doc_id = format!("d{:06}", *serial);
    *serial += 1;
    let statuses = g.uniform(1.0, 5000.0) as u64;
    let followers = g.uniform(0.0, 100_000.0) as u64;
    data.documents.push(Document::new(
        &doc_id, ts, text, statuses, followers, is_retweet, language,
    ));
    doc_id
}

/// Post text: topic terms plus filler, with occasional entities so the count
/// features vary.
fn topic_text(g: &mut Gen, term_a: &str, term_b: &str, common: &str) -> String {
    let mut words = vec![term_a.to_string(), term_b.to_string(), common.to_string()];
    for _ in 0..g.uniform(2.0, 6.0) as usize {
        words.push(g.pick(&FILLER_TERMS).to_string());
    }
    if g.chance(0.15) {
        words.push(format!("#{common}"));
    }
    if g.chance(0.1) {
        words.push("http://example.com/p".to_string());
    }
    if g.chance(0.08) {
        words.insert(0, "@someone".to_string());
    }
    words.join(" ")
}

#[allow(clippy::too_many_arguments)]
fn temporal_query(
    cfg: &SynthConfig,
    g: &mut Gen,
    data: &mut SynthData,
    serial: &mut usize,
    q: usize,
    query_id: &str,
    term_a: &str,
    term_b: &str,
    common: &str,
) {
    let span = cfg.span_days;
    let peak = g.uniform(10.0, span - 10.0);
    let side = if g.chance(0.5) { 1.0 } else { -1.0 };
    let confounder_peak = (peak + side * g.uniform(8.0, 20.0)).clamp(2.0, span - 2.0);

    // Relevant cluster at the peak; confounders are lexically identical but
    // mostly off-peak and judged non-relevant. A slice of stragglers on both
    // sides keeps the separation imperfect.
    for _ in 0..cfg.relevant_per_query {
        let day = if g.chance(0.1) {
            g.uniform(0.5, span - 0.5)
        } else {
            g.normal(peak, 1.5).clamp(0.5, span - 0.5)
        };
        let ts = day_ts(cfg, day);
        let text = topic_text(g, term_a, term_b, common);
        let doc_id = push_doc(data, serial, ts, text, g, "en", false);
        let grade = if g.chance(0.3) { 2 } else { 1 };
        data.qrels.insert(query_id, doc_id, grade);
    }
    for _ in 0..cfg.confounders_per_query {
        let center = if g.chance(0.05) { peak } else { confounder_peak };
        let day = g.normal(center, 1.5).clamp(0.5, span - 0.5);
        let ts = day_ts(cfg, day);
        let text = topic_text(g, term_a, term_b, common);
        let doc_id = push_doc(data, serial, ts, text, g, "en", false);
        data.qrels.insert(query_id, doc_id, 0);
    }

    // External sources, each missing for a slice of queries so the trained
    // model cannot rely on any single one.
    if g.chance(0.9) {
        let count = 5 + g.uniform(0.0, 5.0) as usize;
        for _ in 0..count {
            let day = g.normal(peak, 2.0).clamp(0.0, span);
            let mut title = vec![term_a.to_string(), term_b.to_string()];
            if g.chance(0.5) {
                title.push(common.to_string());
            }
            for _ in 0..g.uniform(0.0, 3.0) as usize {
                title.push(g.pick(&FILLER_TERMS).to_string());
            }
            data.news.push(NewsSnapshotRow {
                site: g.pick(&NEWS_SITES).to_string(),
                timestamp: day_ts(cfg, day),
                title: title.join(" "),
            });
        }
    }

    let article_title = format!("topic{q}a");
    if g.chance(0.85) {
        let base_date = NaiveDate::from_ymd_opt(2013, 2, 1).expect("valid date");
        for day in 0..=(span as i64) {
            let base_count = g.uniform(10.0, 30.0);
            let bump = 180.0 * (-0.5 * ((day as f64 - peak) / 2.0).powi(2)).exp();
            data.views.push(ViewsSnapshotRow {
                title: article_title.clone(),
                date: base_date + chrono::Days::new(day as u64),
                count: (base_count + bump) as u64,
            });
        }
    }
    if g.chance(0.85) {
        let count = 6 + g.uniform(0.0, 6.0) as usize;
        let mut times: Vec<i64> = (0..count)
            .map(|_| day_ts(cfg, g.normal(peak + 0.5, 2.0).clamp(0.0, span)))
            .collect();
        // a couple of early maintenance edits and one bot edit
        times.push(day_ts(cfg, g.uniform(1.0, 5.0)));
        times.push(day_ts(cfg, g.uniform(1.0, 5.0)));
        times.sort_unstable();
        for (i, ts) in times.into_iter().enumerate() {
            let is_bot = i == 0;
            let editor = if is_bot {
                "MaintenanceBot".to_string()
            } else {
                format!("editor{}", g.uniform(0.0, 50.0) as usize)
            };
            // title terms are stopworded by the extractor, so the weight
            // comes from term_b and the common term
            let mentions = 1 + g.uniform(0.0, 3.0) as usize;
            let mut words = vec![term_a.to_string()];
            for _ in 0..mentions {
                words.push(term_b.to_string());
            }
            if g.chance(0.6) {
                words.push(common.to_string());
            }
            for _ in 0..g.uniform(1.0, 4.0) as usize {
                words.push(g.pick(&FILLER_TERMS).to_string());
            }
            data.revisions.push(RevisionSnapshotRow {
                title: article_title.clone(),
                timestamp: ts,
                editor,
                is_bot,
                added_text: words.join(" "),
            });
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn atemporal_query(
    cfg: &SynthConfig,
    g: &mut Gen,
    data: &mut SynthData,
    serial: &mut usize,
    query_id: &str,
    term_a: &str,
    term_b: &str,
    common: &str,
) {
    let span = cfg.span_days;
    // Relevant documents match all three query terms; distractors miss
    // term_b, so lexical evidence separates them at any time of day.
    for _ in 0..cfg.relevant_per_query {
        let day = g.uniform(0.5, span - 0.5);
        let text = topic_text(g, term_a, term_b, common);
        let doc_id = push_doc(data, serial, day_ts(cfg, day), text, g, "en", false);
        let grade = if g.chance(0.3) { 2 } else { 1 };
        data.qrels.insert(query_id, doc_id, grade);
    }
    for _ in 0..cfg.confounders_per_query {
        let day = g.uniform(0.5, span - 0.5);
        let decoy = g.pick(&FILLER_TERMS);
        let text = topic_text(g, term_a, decoy, common);
        let doc_id = push_doc(data, serial, day_ts(cfg, day), text, g, "en", false);
        data.qrels.insert(query_id, doc_id, 0);
    }
}

fn background_docs(cfg: &SynthConfig, g: &mut Gen, data: &mut SynthData, serial: &mut usize) {
    for _ in 0..cfg.background_docs {
        let day = g.uniform(0.0, cfg.span_days);
        let first = g.pick(&COMMON_TERMS);
        let second = g.pick(&COMMON_TERMS);
        let mut words = vec![first.to_string(), second.to_string()];
        for _ in 0..g.uniform(3.0, 8.0) as usize {
            words.push(g.pick(&FILLER_TERMS).to_string());
        }
        let mut text = words.join(" ");
        let mut language = "en";
        let mut is_retweet = false;
        // a slice of the stream is filtered out at ingestion
        if g.chance(0.02) {
            text = format!("RT {text}");
        } else if g.chance(0.02) {
            language = "es";
        } else if g.chance(0.01) {
            is_retweet = true;
        }
        push_doc(data, serial, day_ts(cfg, day), text, g, language, is_retweet);
    }
}

/// News snapshot CSV (`site,timestamp,title`).
pub fn news_csv(rows: &[NewsSnapshotRow]) -> String {
    let mut out = String::from("site,timestamp,title\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.site, r.timestamp, r.title));
    }
    out
}

/// Views snapshot CSV (`title,date,count`).
pub fn views_csv(rows: &[ViewsSnapshotRow]) -> String {
    let mut out = String::from("title,date,count\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.title, r.date.format("%Y-%m-%d"), r.count));
    }
    out
}

/// Revisions snapshot CSV (`title,timestamp,editor,is_bot,added_text`).
pub fn revisions_csv(rows: &[RevisionSnapshotRow]) -> String {
    let mut out = String::from("title,timestamp,editor,is_bot,added_text\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.title, r.timestamp, r.editor, r.is_bot, r.added_text
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SynthConfig {
        SynthConfig {
            num_queries: 8,
            relevant_per_query: 6,
            confounders_per_query: 6,
            background_docs: 100,
            seed: 99,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let cfg = small_config();
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let cfg = small_config();
        let other = SynthConfig { seed: 100, ..cfg.clone() };
        assert_ne!(generate(&cfg).documents, generate(&other).documents);
    }

    #[test]
    fn every_query_has_relevant_judgments() {
        let data = generate(&small_config());
        for q in &data.queries {
            assert!(data.qrels.num_relevant(&q.query_id) > 0, "{}", q.query_id);
        }
    }

    #[test]
    fn documents_precede_their_queries() {
        let data = generate(&small_config());
        let earliest_query = data.queries.iter().map(|q| q.query_time).min().unwrap();
        for doc in &data.documents {
            assert!(doc.timestamp < earliest_query);
        }
    }

    #[test]
    fn atemporal_queries_have_no_news() {
        let cfg = small_config();
        let data = generate(&cfg);
        // every 4th query is atemporal; its topic terms appear in no headline
        for (i, q) in data.queries.iter().enumerate() {
            let is_atemporal = (i + 1) % cfg.atemporal_period == 0;
            if is_atemporal {
                let term = format!("topic{i}a");
                assert!(
                    data.news.iter().all(|n| !n.title.contains(&term)),
                    "atemporal query {} has news",
                    q.query_id
                );
            }
        }
    }

    #[test]
    fn view_dates_strictly_increase_per_article() {
        let data = generate(&small_config());
        let mut last: std::collections::BTreeMap<&str, NaiveDate> = Default::default();
        for row in &data.views {
            if let Some(prev) = last.get(row.title.as_str()) {
                assert!(row.date > *prev);
            }
            last.insert(&row.title, row.date);
        }
    }

    #[test]
    fn snapshot_csv_shapes() {
        let data = generate(&small_config());
        assert!(news_csv(&data.news).starts_with("site,timestamp,title\n"));
        assert!(views_csv(&data.views).starts_with("title,date,count\n"));
        assert!(revisions_csv(&data.revisions).starts_with("title,timestamp,editor,is_bot,added_text\n"));
    }
}
