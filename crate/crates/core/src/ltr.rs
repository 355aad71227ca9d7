//! Linear ranking models trained by coordinate ascent to maximize MAP, plus
//! temporal/atemporal query routing.
//!
//! Training sweeps coordinates in canonical feature order, keeps only
//! strictly improving steps, L1-renormalizes after each accepted move, and
//! picks the restart with the best validation MAP.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::eval::EVAL_DEPTH;
use crate::features::{FeatureName, FeatureVector, QueryFeatureSet};
use crate::signals::TemporalSignal;

#[derive(Debug, Error)]
pub enum LtrError {
    #[error("training needs at least two queries with a relevant document, got {0}")]
    TooFewTrainableQueries(usize),
    #[error("training needs at least one feature")]
    NoFeatures,
    #[error("invalid validation fraction {0}; must be in (0, 1)")]
    InvalidValidationFraction(f64),
    #[error("model file line {line}: {message}")]
    ModelParse { line: usize, message: String },
    #[error("model names feature {0:?} more than once")]
    DuplicateFeature(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Training metadata carried by a model.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrainMeta {
    pub train_map: f64,
    pub validation_map: f64,
    pub restart: usize,
}

/// A named linear scoring function over normalized feature values. After
/// training the weights satisfy sum(|w|) = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub feature_names: Vec<FeatureName>,
    pub weights: Vec<f64>,
    pub meta: TrainMeta,
}

impl LinearModel {
    pub fn new(feature_names: Vec<FeatureName>, weights: Vec<f64>) -> Self {
        assert_eq!(feature_names.len(), weights.len());
        Self {
            feature_names,
            weights,
            meta: TrainMeta::default(),
        }
    }

    pub fn weight(&self, feature: FeatureName) -> Option<f64> {
        self.feature_names
            .iter()
            .position(|&f| f == feature)
            .map(|i| self.weights[i])
    }

    /// Dot product of the model weights with the normalized feature values.
    pub fn score(&self, x: &FeatureVector) -> f64 {
        self.feature_names
            .iter()
            .zip(&self.weights)
            .map(|(&f, &w)| w * x.get(f))
            .sum()
    }

    fn l1_normalize(weights: &mut [f64]) {
        let sum: f64 = weights.iter().map(|w| w.abs()).sum();
        if sum > 0.0 {
            for w in weights {
                *w /= sum;
            }
        }
    }
}

/// The temporal model scores all features; the atemporal model scores only
/// the thirteen non-temporal ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPair {
    pub temporal: LinearModel,
    pub atemporal: LinearModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryClass {
    Temporal,
    Atemporal,
}

/// A query is temporal exactly when the news source produced a nonempty
/// signal for it.
pub fn classify_query(news_signal: Option<&TemporalSignal>) -> QueryClass {
    match news_signal {
        Some(signal) if !signal.is_empty() => QueryClass::Temporal,
        _ => QueryClass::Atemporal,
    }
}

/// Scores a query's rows with the routed model and sorts by
/// (score descending, doc_id descending).
pub fn rank(pair: &ModelPair, feature_set: &QueryFeatureSet, class: QueryClass) -> Vec<(String, f64)> {
    let model = match class {
        QueryClass::Temporal => &pair.temporal,
        QueryClass::Atemporal => &pair.atemporal,
    };
    rank_with_model(model, feature_set)
}

pub fn rank_with_model(model: &LinearModel, feature_set: &QueryFeatureSet) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = feature_set
        .rows
        .iter()
        .map(|row| (row.doc_id.clone(), model.score(&row.normalized)))
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| b.0.cmp(&a.0))
    });
    scored
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Candidate step magnitudes tried additively in both directions per
    /// coordinate.
    pub step_set: Vec<f64>,
    /// Minimum full-sweep MAP improvement to keep sweeping.
    pub tolerance: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_sweeps: 25,
            step_set: vec![0.05, 0.1, 0.2, 0.5, 1.0],
            tolerance: 1e-4,
            validation_fraction: 0.2,
            seed: 0,
        }
    }
}

/// Training-MAP values recorded at the start of a restart and after each
/// accepted coordinate move.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub restart: usize,
    pub accepted_map: Vec<f64>,
    pub validation_map: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: LinearModel,
    pub traces: Vec<RestartTrace>,
    pub train_queries: Vec<String>,
    pub validation_queries: Vec<String>,
}

/// Per-query training matrix in column-major (feature-major) layout, with a
/// precomputed doc_id-descending tiebreak order.
struct QueryMatrix {
    columns: Vec<Vec<f64>>,
    labels: Vec<bool>,
    tie_rank: Vec<u32>,
    num_relevant: usize,
}

impl QueryMatrix {
    fn build(set: &QueryFeatureSet, features: &[FeatureName]) -> Self {
        let n = set.rows.len();
        let columns = features
            .iter()
            .map(|&f| set.rows.iter().map(|r| r.normalized.get(f)).collect())
            .collect();
        let labels: Vec<bool> = set.rows.iter().map(|r| r.label >= 1).collect();
        let num_relevant = labels.iter().filter(|&&l| l).count();

        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by(|&a, &b| set.rows[b as usize].doc_id.cmp(&set.rows[a as usize].doc_id));
        let mut tie_rank = vec![0u32; n];
        for (pos, &row) in order.iter().enumerate() {
            tie_rank[row as usize] = pos as u32;
        }

        Self {
            columns,
            labels,
            tie_rank,
            num_relevant,
        }
    }

    fn len(&self) -> usize {
        self.labels.len()
    }

    /// AP of the ranking induced by `scores` (descending, doc_id-descending
    /// ties), evaluated to [`EVAL_DEPTH`].
    fn average_precision(&self, scores: &[f64]) -> f64 {
        let mut idx: Vec<u32> = (0..self.len() as u32).collect();
        idx.sort_unstable_by(|&a, &b| {
            scores[b as usize]
                .partial_cmp(&scores[a as usize])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| self.tie_rank[a as usize].cmp(&self.tie_rank[b as usize]))
        });
        let mut hits = 0usize;
        let mut sum = 0.0;
        for (i, &row) in idx.iter().take(EVAL_DEPTH).enumerate() {
            if self.labels[row as usize] {
                hits += 1;
                sum += hits as f64 / (i + 1) as f64;
            }
        }
        sum / self.num_relevant as f64
    }
}

/// Mean AP over the matrices for a full weight vector.
fn map_for_weights(matrices: &[QueryMatrix], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    let mut scores = Vec::new();
    for m in matrices {
        scores.clear();
        scores.resize(m.len(), 0.0);
        for (col, &w) in m.columns.iter().zip(weights) {
            if w != 0.0 {
                for (s, &x) in scores.iter_mut().zip(col) {
                    *s += w * x;
                }
            }
        }
        total += m.average_precision(&scores);
    }
    total / matrices.len() as f64
}

/// Trains a linear model over `feature_names` with coordinate ascent.
///
/// Queries without a relevant row are dropped. The remaining queries are
/// split into train/validation by a seeded shuffle; each restart runs
/// accept-only-improving sweeps in canonical feature order and the restart
/// with the highest validation MAP wins (ties to the lower restart index).
pub fn train(
    data: &[QueryFeatureSet],
    feature_names: &[FeatureName],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, LtrError> {
    if feature_names.is_empty() {
        return Err(LtrError::NoFeatures);
    }
    if !(cfg.validation_fraction > 0.0 && cfg.validation_fraction < 1.0) {
        return Err(LtrError::InvalidValidationFraction(cfg.validation_fraction));
    }
    let trainable: Vec<&QueryFeatureSet> = data
        .iter()
        .filter(|set| set.num_relevant_rows() > 0)
        .collect();
    if trainable.len() < 2 {
        return Err(LtrError::TooFewTrainableQueries(trainable.len()));
    }

    // Seeded split: shuffle query slots, carve off the validation fraction.
    let mut slots: Vec<usize> = (0..trainable.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    slots.shuffle(&mut rng);
    let n_val = ((trainable.len() as f64 * cfg.validation_fraction).round() as usize)
        .clamp(1, trainable.len() - 1);
    let (val_slots, train_slots) = slots.split_at(n_val);

    let train_sets: Vec<&QueryFeatureSet> = train_slots.iter().map(|&i| trainable[i]).collect();
    let val_sets: Vec<&QueryFeatureSet> = val_slots.iter().map(|&i| trainable[i]).collect();
    let train_matrices: Vec<QueryMatrix> = train_sets
        .iter()
        .map(|set| QueryMatrix::build(set, feature_names))
        .collect();
    let val_matrices: Vec<QueryMatrix> = val_sets
        .iter()
        .map(|set| QueryMatrix::build(set, feature_names))
        .collect();

    let restarts: Vec<(usize, Vec<f64>, Vec<f64>)> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|restart| {
            let (weights, trace) =
                run_restart(restart, &train_matrices, feature_names.len(), cfg);
            (restart, weights, trace)
        })
        .collect();

    let mut traces = Vec::with_capacity(restarts.len());
    let mut best: Option<(usize, Vec<f64>, f64, f64)> = None;
    for (restart, weights, accepted_map) in restarts {
        let train_map = *accepted_map.last().expect("trace holds the start point");
        let validation_map = map_for_weights(&val_matrices, &weights);
        traces.push(RestartTrace {
            restart,
            accepted_map,
            validation_map,
        });
        let better = match &best {
            None => true,
            Some((_, _, _, best_val)) => validation_map > *best_val,
        };
        if better {
            best = Some((restart, weights, train_map, validation_map));
        }
    }

    let (restart, weights, train_map, validation_map) = best.expect("at least one restart");
    let mut model = LinearModel::new(feature_names.to_vec(), weights);
    model.meta = TrainMeta {
        train_map,
        validation_map,
        restart,
    };
    Ok(TrainOutcome {
        model,
        traces,
        train_queries: train_sets.iter().map(|s| s.query_id.clone()).collect(),
        validation_queries: val_sets.iter().map(|s| s.query_id.clone()).collect(),
    })
}

/// One restart: returns the final weights and the accepted-move MAP trace
/// (first entry is the starting MAP).
fn run_restart(
    restart: usize,
    matrices: &[QueryMatrix],
    num_features: usize,
    cfg: &TrainConfig,
) -> (Vec<f64>, Vec<f64>) {
    let mut weights = initial_weights(restart, num_features, cfg.seed);
    let mut current_map = map_for_weights(matrices, &weights);
    let mut trace = vec![current_map];

    let mut zeroed: Vec<Vec<f64>> = matrices.iter().map(|m| vec![0.0; m.len()]).collect();
    let mut scores: Vec<Vec<f64>> = zeroed.clone();

    for _ in 0..cfg.max_sweeps {
        let sweep_start = current_map;
        for coord in 0..num_features {
            // Score contribution of everything but this coordinate.
            for (m, z) in matrices.iter().zip(zeroed.iter_mut()) {
                for s in z.iter_mut() {
                    *s = 0.0;
                }
                for (f, (col, &w)) in m.columns.iter().zip(&weights).enumerate() {
                    if f == coord || w == 0.0 {
                        continue;
                    }
                    for (s, &x) in z.iter_mut().zip(col) {
                        *s += w * x;
                    }
                }
            }

            let mut best_step: Option<(f64, f64)> = None; // (new weight, map)
            for &magnitude in &cfg.step_set {
                for sign in [1.0, -1.0] {
                    let candidate = weights[coord] + sign * magnitude;
                    let mut total = 0.0;
                    for ((m, z), s) in matrices.iter().zip(&zeroed).zip(scores.iter_mut()) {
                        let col = &m.columns[coord];
                        for ((out, &base), &x) in s.iter_mut().zip(z.iter()).zip(col) {
                            *out = base + candidate * x;
                        }
                        total += m.average_precision(s);
                    }
                    let map = total / matrices.len() as f64;
                    let floor = best_step.map_or(current_map, |(_, m)| m);
                    if map > floor {
                        best_step = Some((candidate, map));
                    }
                }
            }

            if let Some((new_weight, map)) = best_step {
                weights[coord] = new_weight;
                // Positive rescaling preserves every induced ranking, so the
                // accepted MAP carries over the renormalization unchanged.
                LinearModel::l1_normalize(&mut weights);
                debug_assert!(map >= current_map);
                current_map = map;
                trace.push(map);
            }
        }
        if current_map - sweep_start < cfg.tolerance {
            break;
        }
    }
    (weights, trace)
}

/// Restart 0 starts from uniform weights; later restarts draw uniformly in
/// [-1, 1] and L1-normalize.
fn initial_weights(restart: usize, num_features: usize, seed: u64) -> Vec<f64> {
    if restart == 0 {
        return vec![1.0 / num_features as f64; num_features];
    }
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let mut weights: Vec<f64> = (0..num_features).map(|_| rng.random_range(-1.0..1.0)).collect();
    LinearModel::l1_normalize(&mut weights);
    weights
}

// ---------------------------------------------------------------------------
// Model file format
// ---------------------------------------------------------------------------

/// Serializes a model to the self-describing text format:
/// metadata lines followed by one `w <feature> <coefficient>` line per
/// feature. Round-trips exactly.
pub fn write_model(model: &LinearModel) -> String {
    let mut out = String::from("linear-model v1\n");
    out.push_str(&format!("restart {}\n", model.meta.restart));
    out.push_str(&format!("train_map {}\n", model.meta.train_map));
    out.push_str(&format!("validation_map {}\n", model.meta.validation_map));
    out.push_str(&format!("features {}\n", model.feature_names.len()));
    for (f, w) in model.feature_names.iter().zip(&model.weights) {
        out.push_str(&format!("w {f} {w}\n"));
    }
    out
}

pub fn parse_model(text: &str) -> Result<LinearModel, LtrError> {
    let mut lines = text.lines().enumerate();
    let parse_err = |line: usize, message: String| LtrError::ModelParse { line: line + 1, message };

    match lines.next() {
        Some((_, "linear-model v1")) => {}
        Some((i, other)) => return Err(parse_err(i, format!("bad magic line {other:?}"))),
        None => return Err(parse_err(0, "empty model file".into())),
    }

    let mut meta = TrainMeta::default();
    let mut declared = None;
    let mut feature_names = Vec::new();
    let mut weights = Vec::new();
    let mut seen: BTreeSet<FeatureName> = BTreeSet::new();

    for (i, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            [] => continue,
            ["restart", v] => {
                meta.restart = v
                    .parse()
                    .map_err(|_| parse_err(i, format!("bad restart {v:?}")))?;
            }
            ["train_map", v] => {
                meta.train_map = v
                    .parse()
                    .map_err(|_| parse_err(i, format!("bad train_map {v:?}")))?;
            }
            ["validation_map", v] => {
                meta.validation_map = v
                    .parse()
                    .map_err(|_| parse_err(i, format!("bad validation_map {v:?}")))?;
            }
            ["features", v] => {
                declared = Some(
                    v.parse::<usize>()
                        .map_err(|_| parse_err(i, format!("bad feature count {v:?}")))?,
                );
            }
            ["w", name, value] => {
                let feature = FeatureName::parse(name)
                    .ok_or_else(|| parse_err(i, format!("unknown feature {name:?}")))?;
                if !seen.insert(feature) {
                    return Err(LtrError::DuplicateFeature(name.to_string()));
                }
                let weight: f64 = value
                    .parse()
                    .map_err(|_| parse_err(i, format!("bad weight {value:?}")))?;
                if !weight.is_finite() {
                    return Err(parse_err(i, format!("weight for {name} must be finite")));
                }
                feature_names.push(feature);
                weights.push(weight);
            }
            _ => return Err(parse_err(i, format!("unrecognized line {line:?}"))),
        }
    }

    if let Some(declared) = declared {
        if declared != feature_names.len() {
            return Err(LtrError::ModelParse {
                line: 0,
                message: format!(
                    "declared {declared} features but found {}",
                    feature_names.len()
                ),
            });
        }
    }
    let mut model = LinearModel::new(feature_names, weights);
    model.meta = meta;
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<LinearModel, LtrError> {
    let mut text = String::new();
    std::fs::File::open(path)?.read_to_string(&mut text)?;
    parse_model(&text)
}
