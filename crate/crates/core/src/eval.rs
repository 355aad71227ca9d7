//! TREC-style evaluation: relevance judgments, average precision, precision
//! at cutoff, run-file interchange, and paired t-tests with effect sizes.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

/// Metrics are computed to this ranking depth.
pub const EVAL_DEPTH: usize = 1000;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{file} line {line}: {message}")]
    Line {
        file: &'static str,
        line: usize,
        message: String,
    },
    #[error("paired t-test needs at least two pairs, got {0}")]
    TooFewPairs(usize),
    #[error("paired t-test inputs are not paired by query_id")]
    MismatchedQueries,
    #[error("no difference: per-query metrics are identical")]
    NoDifference,
    #[error("degenerate t-test: zero variance with nonzero mean difference")]
    ZeroVariance,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Relevance judgments on a 0-2 scale; a document counts as relevant when
/// its grade is at least 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qrels {
    judgments: BTreeMap<(String, String), u8>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query_id: impl Into<String>, doc_id: impl Into<String>, grade: u8) {
        self.judgments
            .insert((query_id.into(), doc_id.into()), grade.min(2));
    }

    pub fn grade(&self, query_id: &str, doc_id: &str) -> u8 {
        self.judgments
            .get(&(query_id.to_string(), doc_id.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn is_relevant(&self, query_id: &str, doc_id: &str) -> bool {
        self.grade(query_id, doc_id) >= 1
    }

    /// Total relevant documents judged for a query.
    pub fn num_relevant(&self, query_id: &str) -> usize {
        self.judgments
            .range((query_id.to_string(), String::new())..)
            .take_while(|((q, _), _)| q == query_id)
            .filter(|(_, &g)| g >= 1)
            .count()
    }

    pub fn query_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.judgments.keys().map(|(q, _)| q.as_str()).collect();
        ids.dedup();
        ids
    }

    pub fn len(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }

    /// Parses whitespace-separated `query_id 0 doc_id grade` lines.
    pub fn read<R: Read>(reader: R) -> Result<Self, EvalError> {
        let reader = BufReader::new(reader);
        let mut qrels = Qrels::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(EvalError::Line {
                    file: "qrels",
                    line: i + 1,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let grade: u8 = fields[3].parse().map_err(|_| EvalError::Line {
                file: "qrels",
                line: i + 1,
                message: format!("bad grade {:?}", fields[3]),
            })?;
            if grade > 2 {
                return Err(EvalError::Line {
                    file: "qrels",
                    line: i + 1,
                    message: format!("grade must be 0, 1 or 2, got {grade}"),
                });
            }
            qrels.insert(fields[0], fields[2], grade);
        }
        Ok(qrels)
    }

    pub fn load(path: &Path) -> Result<Self, EvalError> {
        Self::read(std::fs::File::open(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((q, d), g) in &self.judgments {
            out.push_str(&format!("{q} 0 {d} {g}\n"));
        }
        out
    }
}

/// Average precision of a ranking at depth [`EVAL_DEPTH`]: the mean over
/// relevant ranks k of (relevant seen at or above k) / k, divided by the
/// total number of relevant documents judged for the query. `None` when the
/// query has no relevant documents (such queries are skipped upstream).
pub fn average_precision(ranking: &[String], qrels: &Qrels, query_id: &str) -> Option<f64> {
    let total_relevant = qrels.num_relevant(query_id);
    if total_relevant == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, doc_id) in ranking.iter().take(EVAL_DEPTH).enumerate() {
        if qrels.is_relevant(query_id, doc_id) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / total_relevant as f64)
}

/// Precision among the top `k` ranks, divided by `k` even when fewer than
/// `k` documents were retrieved.
pub fn precision_at_k(ranking: &[String], qrels: &Qrels, query_id: &str, k: usize) -> f64 {
    let hits = ranking
        .iter()
        .take(k)
        .filter(|doc_id| qrels.is_relevant(query_id, doc_id))
        .count();
    hits as f64 / k as f64
}

/// Per-query AP for every query with at least one relevant document, in
/// query_id order. Queries in the qrels but absent from the run score 0.
pub fn per_query_average_precision(
    rankings: &BTreeMap<String, Vec<(String, f64)>>,
    qrels: &Qrels,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for query_id in qrels.query_ids() {
        if qrels.num_relevant(query_id) == 0 {
            continue;
        }
        let docs: Vec<String> = rankings
            .get(query_id)
            .map(|r| r.iter().map(|(d, _)| d.clone()).collect())
            .unwrap_or_default();
        let ap = average_precision(&docs, qrels, query_id).unwrap_or(0.0);
        out.insert(query_id.to_string(), ap);
    }
    out
}

/// Unweighted mean of per-query AP, skipping queries without relevant
/// documents. `None` when no query is evaluable.
pub fn mean_average_precision(
    rankings: &BTreeMap<String, Vec<(String, f64)>>,
    qrels: &Qrels,
) -> Option<f64> {
    let per_query = per_query_average_precision(rankings, qrels);
    if per_query.is_empty() {
        return None;
    }
    Some(per_query.values().sum::<f64>() / per_query.len() as f64)
}

/// Mean P@k over the evaluable queries.
pub fn mean_precision_at_k(
    rankings: &BTreeMap<String, Vec<(String, f64)>>,
    qrels: &Qrels,
    k: usize,
) -> Option<f64> {
    let evaluable: Vec<&str> = qrels
        .query_ids()
        .into_iter()
        .filter(|q| qrels.num_relevant(q) > 0)
        .collect();
    if evaluable.is_empty() {
        return None;
    }
    let sum: f64 = evaluable
        .iter()
        .map(|query_id| {
            let docs: Vec<String> = rankings
                .get(*query_id)
                .map(|r| r.iter().map(|(d, _)| d.clone()).collect())
                .unwrap_or_default();
            precision_at_k(&docs, qrels, query_id, k)
        })
        .sum();
    Some(sum / evaluable.len() as f64)
}

/// Two-sided paired t-test report with effect size and confidence interval.
#[derive(Debug, Clone, PartialEq)]
pub struct TTestReport {
    pub n: usize,
    pub mean_diff: f64,
    /// Unbiased estimate of the population variance of the differences.
    pub variance: f64,
    pub t_stat: f64,
    pub df: usize,
    pub p_two_sided: f64,
    /// Standardized effect size: mean difference over the difference
    /// standard deviation.
    pub effect_size: f64,
    pub ci95: (f64, f64),
}

impl TTestReport {
    /// Builds the report from the difference moments: sample mean, unbiased
    /// variance, and pair count.
    pub fn from_moments(mean_diff: f64, variance: f64, n: usize) -> Result<Self, EvalError> {
        if n < 2 {
            return Err(EvalError::TooFewPairs(n));
        }
        if variance <= 0.0 {
            return Err(if mean_diff == 0.0 {
                EvalError::NoDifference
            } else {
                EvalError::ZeroVariance
            });
        }
        let df = n - 1;
        let std_err = (variance / n as f64).sqrt();
        let t_stat = mean_diff / std_err;
        let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid t distribution");
        let p_two_sided = 2.0 * (1.0 - dist.cdf(t_stat.abs()));
        let t_crit = dist.inverse_cdf(0.975);
        Ok(Self {
            n,
            mean_diff,
            variance,
            t_stat,
            df,
            p_two_sided,
            effect_size: mean_diff / variance.sqrt(),
            ci95: (mean_diff - t_crit * std_err, mean_diff + t_crit * std_err),
        })
    }
}

/// Two-sided paired t-test over per-query metrics paired by query_id.
/// Differences are a - b. Identical inputs or a constant shift (zero
/// difference variance) are degenerate.
pub fn paired_t_test(
    a: &BTreeMap<String, f64>,
    b: &BTreeMap<String, f64>,
) -> Result<TTestReport, EvalError> {
    if a.len() != b.len() || a.keys().zip(b.keys()).any(|(x, y)| x != y) {
        return Err(EvalError::MismatchedQueries);
    }
    if a.len() < 2 {
        return Err(EvalError::TooFewPairs(a.len()));
    }
    let diffs: Vec<f64> = a.values().zip(b.values()).map(|(x, y)| x - y).collect();
    if diffs.iter().all(|&d| d == 0.0) {
        return Err(EvalError::NoDifference);
    }
    let n = diffs.len();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let variance = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    TTestReport::from_moments(mean, variance, n)
}

/// A TREC run: per-query rankings with scores, plus the system tag.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFile {
    pub tag: String,
    /// query_id -> (doc_id, score) in rank order.
    pub rankings: BTreeMap<String, Vec<(String, f64)>>,
}

impl RunFile {
    pub fn new(tag: impl Into<String>) -> Self {
        Self {
            tag: tag.into(),
            rankings: BTreeMap::new(),
        }
    }
}

/// Serializes a run to `query_id Q0 doc_id rank score tag` lines, queries in
/// ascending query_id order and ranks from 1.
pub fn write_run(run: &RunFile) -> String {
    let mut out = String::new();
    for (query_id, docs) in &run.rankings {
        for (rank, (doc_id, score)) in docs.iter().enumerate() {
            out.push_str(&format!(
                "{query_id} Q0 {doc_id} {} {score} {}\n",
                rank + 1,
                run.tag
            ));
        }
    }
    out
}

/// Parses and strictly validates a run file: six fields per line, one tag
/// per file, ranks consecutive from 1 per query, and rank order consistent
/// with (score descending, doc_id descending).
pub fn parse_run(text: &str) -> Result<RunFile, EvalError> {
    let mut tag: Option<String> = None;
    let mut rankings: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(EvalError::Line {
                file: "run",
                line: lineno,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        if fields[1] != "Q0" {
            return Err(EvalError::Line {
                file: "run",
                line: lineno,
                message: format!("expected literal Q0, got {:?}", fields[1]),
            });
        }
        let rank: usize = fields[3].parse().map_err(|_| EvalError::Line {
            file: "run",
            line: lineno,
            message: format!("bad rank {:?}", fields[3]),
        })?;
        let score: f64 = fields[4].parse().map_err(|_| EvalError::Line {
            file: "run",
            line: lineno,
            message: format!("bad score {:?}", fields[4]),
        })?;
        if !score.is_finite() {
            return Err(EvalError::Line {
                file: "run",
                line: lineno,
                message: "score must be finite".into(),
            });
        }
        match &tag {
            None => tag = Some(fields[5].to_string()),
            Some(t) if t != fields[5] => {
                return Err(EvalError::Line {
                    file: "run",
                    line: lineno,
                    message: format!("tag {:?} differs from {:?}", fields[5], t),
                });
            }
            _ => {}
        }

        let docs = rankings.entry(fields[0].to_string()).or_default();
        if rank != docs.len() + 1 {
            return Err(EvalError::Line {
                file: "run",
                line: lineno,
                message: format!(
                    "rank {rank} out of sequence for query {} (expected {})",
                    fields[0],
                    docs.len() + 1
                ),
            });
        }
        if let Some((prev_doc, prev_score)) = docs.last() {
            let ordered = score < *prev_score
                || (score == *prev_score && fields[2] < prev_doc.as_str());
            if !ordered {
                return Err(EvalError::Line {
                    file: "run",
                    line: lineno,
                    message: format!(
                        "rank {rank} inconsistent with (score desc, doc_id desc) order"
                    ),
                });
            }
        }
        docs.push((fields[2].to_string(), score));
    }
    Ok(RunFile {
        tag: tag.unwrap_or_default(),
        rankings,
    })
}

pub fn load_run(path: &Path) -> Result<RunFile, EvalError> {
    let text = std::fs::read_to_string(path)?;
    parse_run(&text)
}
