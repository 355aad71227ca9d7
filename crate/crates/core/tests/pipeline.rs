//! Library-level pipeline integration: corpus -> signals -> densities ->
//! features -> training -> ranking -> evaluation, plus cross-module
//! property tests.

use std::collections::BTreeMap;

use chronorank_core::corpus::{admit_document, build_index, retrieve_candidates, Document, Query};
use chronorank_core::density::temporal_feature;
use chronorank_core::eval::{
    average_precision, mean_average_precision, paired_t_test, parse_run, write_run, Qrels, RunFile,
};
use chronorank_core::features::{assemble_features, FeatureConfig, FeatureName};
use chronorank_core::ltr::{classify_query, rank, train, ModelPair, QueryClass, TrainConfig};
use chronorank_core::signals::{
    extract_external_signals, extract_twitter_feedback_signal, read_signals, write_signals,
    NewsHeadline, SnapshotStore, SourceKind, TemporalSignal,
};
use chronorank_core::synth::{self, SynthConfig};
use chronorank_core::textscore::DirichletConfig;

use proptest::prelude::*;

fn small_synth() -> synth::SynthData {
    synth::generate(&SynthConfig {
        num_queries: 12,
        relevant_per_query: 8,
        confounders_per_query: 8,
        background_docs: 400,
        seed: 2024,
        ..SynthConfig::default()
    })
}

struct Assembled {
    sets: Vec<chronorank_core::QueryFeatureSet>,
    classes: Vec<QueryClass>,
}

fn assemble_all(
    data: &synth::SynthData,
    signals: &BTreeMap<String, Vec<TemporalSignal>>,
    disabled: Option<SourceKind>,
) -> Assembled {
    let admitted: Vec<Document> = data
        .documents
        .iter()
        .filter(|d| admit_document(d))
        .cloned()
        .collect();
    let (index, stats) = build_index(admitted).unwrap();
    let cfg = FeatureConfig::default();
    let mut sets = Vec::new();
    let mut classes = Vec::new();
    for query in &data.queries {
        let candidates = retrieve_candidates(&query, &index, &stats, &cfg.dirichlet, 100);
        let empty = Vec::new();
        let active: Vec<TemporalSignal> = signals
            .get(&query.query_id)
            .unwrap_or(&empty)
            .iter()
            .filter(|s| Some(s.source) != disabled)
            .cloned()
            .collect();
        classes.push(classify_query(
            active.iter().find(|s| s.source == SourceKind::News),
        ));
        let mut set = assemble_features(query, &candidates, &active, &stats, &cfg);
        set.apply_labels(&data.qrels);
        sets.push(set);
    }
    Assembled { sets, classes }
}

fn extract_signals(data: &synth::SynthData) -> BTreeMap<String, Vec<TemporalSignal>> {
    let admitted: Vec<Document> = data
        .documents
        .iter()
        .filter(|d| admit_document(d))
        .cloned()
        .collect();
    let (index, stats) = build_index(admitted).unwrap();

    let mut store = SnapshotStore::new().with_headlines(
        data.news
            .iter()
            .map(|n| NewsHeadline::new(n.site.clone(), n.timestamp, &n.title))
            .collect(),
    );
    let mut views: BTreeMap<&str, Vec<(chrono::NaiveDate, u64)>> = BTreeMap::new();
    for row in &data.views {
        views.entry(&row.title).or_default().push((row.date, row.count));
    }
    let mut revisions: BTreeMap<&str, Vec<chronorank_core::signals::Revision>> = BTreeMap::new();
    for row in &data.revisions {
        revisions
            .entry(&row.title)
            .or_default()
            .push(chronorank_core::signals::Revision {
                timestamp: row.timestamp,
                added_text: row.added_text.clone(),
                is_bot: row.is_bot,
            });
    }
    let titles: std::collections::BTreeSet<&str> = views
        .keys()
        .copied()
        .chain(revisions.keys().copied())
        .collect();
    for title in titles {
        store.add_article(chronorank_core::signals::WikiArticleData {
            title: title.to_string(),
            daily_views: views.remove(title).unwrap_or_default(),
            revisions: revisions.remove(title).unwrap_or_default(),
        });
    }

    let mut out: BTreeMap<String, Vec<TemporalSignal>> = BTreeMap::new();
    for query in &data.queries {
        let mut signals = extract_external_signals(query, &store, 0.1);
        let candidates = retrieve_candidates(query, &index, &stats, &DirichletConfig::default(), 100);
        let feedback = extract_twitter_feedback_signal(query, &candidates);
        if !feedback.is_empty() {
            signals.push(feedback);
        }
        if !signals.is_empty() {
            out.insert(query.query_id.clone(), signals);
        }
    }
    out
}

#[test]
fn extracted_signals_respect_invariants() {
    let data = small_synth();
    let by_query = extract_signals(&data);
    let query_times: BTreeMap<&str, i64> = data
        .queries
        .iter()
        .map(|q| (q.query_id.as_str(), q.query_time))
        .collect();
    assert!(!by_query.is_empty());
    for (query_id, signals) in &by_query {
        let qt = query_times[query_id.as_str()];
        for signal in signals {
            assert!(!signal.is_empty());
            let weights: Vec<f64> = signal.points().iter().map(|&(_, w)| w).collect();
            assert!(weights.iter().all(|&w| w >= 0.0));
            assert!(weights.iter().any(|&w| w > 0.0));
            assert!(signal.points().iter().all(|&(t, _)| t <= qt));
            match signal.source {
                SourceKind::TwitterFeedback => {
                    let sum: f64 = weights.iter().sum();
                    assert!((sum - 1.0).abs() < 1e-9);
                }
                SourceKind::WikiViews => {
                    let mean = weights.iter().sum::<f64>() / weights.len() as f64;
                    assert!((mean - 1.0).abs() < 1e-9);
                }
                _ => {}
            }
        }
    }
}

#[test]
fn signal_csv_roundtrips_extracted_signals() {
    let data = small_synth();
    let signals = extract_signals(&data);
    let text = write_signals(&signals);
    let back = read_signals(text.as_bytes()).unwrap();
    assert_eq!(back, signals);
}

#[test]
fn end_to_end_ranking_beats_lexical_baseline() {
    let data = small_synth();
    let signals = extract_signals(&data);
    let assembled = assemble_all(&data, &signals, None);

    let cfg = TrainConfig {
        restarts: 3,
        seed: 5,
        ..TrainConfig::default()
    };
    let temporal = train(&assembled.sets, &FeatureName::ALL, &cfg).unwrap();
    let atemporal = train(&assembled.sets, &FeatureName::NON_TEMPORAL, &cfg).unwrap();
    let pair = ModelPair {
        temporal: temporal.model,
        atemporal: atemporal.model.clone(),
    };

    let mut routed: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    let mut lexical: BTreeMap<String, Vec<(String, f64)>> = BTreeMap::new();
    for (set, class) in assembled.sets.iter().zip(&assembled.classes) {
        routed.insert(set.query_id.clone(), rank(&pair, set, *class));
        lexical.insert(set.query_id.clone(), rank(&pair, set, QueryClass::Atemporal));
    }

    let rmts = mean_average_precision(&routed, &data.qrels).unwrap();
    let ltr = mean_average_precision(&lexical, &data.qrels).unwrap();
    assert!(
        rmts > ltr,
        "temporal routing should improve MAP: rmts={rmts:.4} ltr={ltr:.4}"
    );

    // temporal and atemporal queries both occur in the mix
    assert!(assembled.classes.contains(&QueryClass::Temporal));
    assert!(assembled.classes.contains(&QueryClass::Atemporal));
}

#[test]
fn disabling_every_source_still_completes_and_matches_atemporal_routing() {
    let data = small_synth();
    let signals = extract_signals(&data);
    let with_all = assemble_all(&data, &signals, None);
    for source in SourceKind::ALL {
        let ablated = assemble_all(&data, &signals, Some(source));
        assert_eq!(ablated.sets.len(), with_all.sets.len());
        // only the ablated source's column may change
        for (a, b) in ablated.sets.iter().zip(&with_all.sets) {
            let column = FeatureName::for_source(source);
            for (ra, rb) in a.rows.iter().zip(&b.rows) {
                for f in FeatureName::ALL {
                    if f == column {
                        continue;
                    }
                    assert_eq!(ra.raw.get(f).to_bits(), rb.raw.get(f).to_bits());
                }
            }
        }
        if source == SourceKind::News {
            // routing degrades to atemporal everywhere
            assert!(ablated.classes.iter().all(|&c| c == QueryClass::Atemporal));
        }
    }

    let none = assemble_all(&data, &BTreeMap::new(), None);
    for set in &none.sets {
        for row in &set.rows {
            for f in [
                FeatureName::TwitterFeedback,
                FeatureName::WikiViews,
                FeatureName::WikiEdits,
                FeatureName::News,
            ] {
                assert_eq!(row.raw.get(f), 0.0);
            }
        }
    }
}

#[test]
fn run_file_evaluation_matches_direct_metrics() {
    let data = small_synth();
    let signals = extract_signals(&data);
    let assembled = assemble_all(&data, &signals, None);
    let cfg = TrainConfig {
        restarts: 2,
        seed: 9,
        ..TrainConfig::default()
    };
    let atemporal = train(&assembled.sets, &FeatureName::NON_TEMPORAL, &cfg).unwrap();

    let mut run = RunFile::new("sys");
    for set in &assembled.sets {
        let ranked = chronorank_core::ltr::rank_with_model(&atemporal.model, set);
        if !ranked.is_empty() {
            run.rankings.insert(set.query_id.clone(), ranked);
        }
    }
    let text = write_run(&run);
    let parsed = parse_run(&text).unwrap();
    assert_eq!(parsed, run);

    let direct = mean_average_precision(&run.rankings, &data.qrels).unwrap();
    let reparsed = mean_average_precision(&parsed.rankings, &data.qrels).unwrap();
    assert_eq!(direct, reparsed);
}

#[test]
fn paired_t_test_detects_planted_shift() {
    let mut a = BTreeMap::new();
    let mut b = BTreeMap::new();
    for i in 0..30 {
        let base = 0.4 + 0.01 * (i % 7) as f64;
        let jitter = 0.001 * (i % 3) as f64;
        a.insert(format!("q{i:02}"), base + 0.05 + jitter);
        b.insert(format!("q{i:02}"), base);
    }
    let report = paired_t_test(&a, &b).unwrap();
    assert!(report.p_two_sided < 0.05);
    assert!(report.mean_diff > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jaccard_symmetric_and_bounded(
        a in prop::collection::btree_set("[a-e]{1,3}", 0..8),
        b in prop::collection::btree_set("[a-e]{1,3}", 0..8),
    ) {
        let ab = chronorank_core::textscore::jaccard(&a, &b);
        let ba = chronorank_core::textscore::jaccard(&b, &a);
        prop_assert_eq!(ab, ba);
        prop_assert!((0.0..=1.0).contains(&ab));
        if !a.is_empty() && a == b {
            prop_assert_eq!(ab, 1.0);
        }
    }

    #[test]
    fn feedback_weights_always_sum_to_one(
        scores in prop::collection::vec(-40.0f64..0.0, 1..40),
    ) {
        let docs: Vec<Document> = scores
            .iter()
            .enumerate()
            .map(|(i, _)| Document::new(format!("d{i}"), (i as i64 + 1) * 100, "text", 0, 0, false, "en"))
            .collect();
        let candidates: Vec<(&Document, f64)> = docs.iter().zip(scores.iter().copied()).collect();
        let query = Query::new("q", "text", 1_000_000);
        let signal = extract_twitter_feedback_signal(&query, &candidates);
        let sum: f64 = signal.points().iter().map(|&(_, w)| w).sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(signal.points().iter().all(|&(_, w)| w >= 0.0));
    }

    #[test]
    fn density_scale_invariance(
        raw in prop::collection::vec((1i64..100, 0.1f64..5.0), 2..20),
        scale in 0.001f64..1000.0,
    ) {
        let points: Vec<(i64, f64)> = raw.iter().map(|&(d, w)| (d * 86_400, w)).collect();
        let scaled: Vec<(i64, f64)> = points.iter().map(|&(t, w)| (t, w * scale)).collect();
        let s1 = TemporalSignal::new(SourceKind::News, "q", points).unwrap();
        let s2 = TemporalSignal::new(SourceKind::News, "q", scaled).unwrap();
        let domain = (0, 101 * 86_400);
        let d1 = chronorank_core::density::build_density(&s1, domain, chronorank_core::Correction::Reflection).unwrap();
        let d2 = chronorank_core::density::build_density(&s2, domain, chronorank_core::Correction::Reflection).unwrap();
        for i in 0..=16 {
            let t = 101.0 * i as f64 / 16.0;
            prop_assert!((d1.evaluate(t) - d2.evaluate(t)).abs() < 1e-9);
        }
    }

    #[test]
    fn temporal_feature_bounded_with_argmax_one(
        raw in prop::collection::vec((1i64..60, 0.1f64..3.0), 1..12),
        times in prop::collection::btree_set(1i64..60, 1..20),
    ) {
        let points: Vec<(i64, f64)> = raw.iter().map(|&(d, w)| (d * 86_400, w)).collect();
        let signal = TemporalSignal::new(SourceKind::WikiEdits, "q", points).unwrap();
        let est = chronorank_core::density::build_density(
            &signal,
            (0, 61 * 86_400),
            chronorank_core::Correction::Reflection,
        )
        .unwrap();
        let doc_times: Vec<i64> = times.iter().map(|&d| d * 86_400).collect();
        let features: Vec<f64> = doc_times
            .iter()
            .map(|&t| temporal_feature(Some(&est), &doc_times, t))
            .collect();
        prop_assert!(features.iter().all(|&f| (0.0..=1.0).contains(&f)));
        let max = features.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert!((max - 1.0).abs() < 1e-9);
    }

    #[test]
    fn run_file_roundtrip_any_valid_run(
        per_query in prop::collection::btree_map(
            "[a-z0-9]{2,6}",
            prop::collection::btree_map("[a-z0-9]{1,8}", -1000.0f64..1000.0, 1..20),
            1..6,
        ),
        tag in "[a-z]{1,8}",
    ) {
        let mut run = RunFile::new(tag);
        for (query_id, docs) in per_query {
            let mut ranked: Vec<(String, f64)> = docs.into_iter().collect();
            ranked.sort_by(|a, b| {
                b.1.partial_cmp(&a.1)
                    .unwrap()
                    .then_with(|| b.0.cmp(&a.0))
            });
            run.rankings.insert(query_id, ranked);
        }
        let text = write_run(&run);
        let back = parse_run(&text).unwrap();
        prop_assert_eq!(&back, &run);
        prop_assert_eq!(write_run(&back), text);
    }

    #[test]
    fn average_precision_bounded(
        ranking in prop::collection::vec("[a-f]", 0..12),
        relevant in prop::collection::btree_set("[a-f]", 1..6),
    ) {
        let mut qrels = Qrels::new();
        for doc in &relevant {
            qrels.insert("q", doc.clone(), 1);
        }
        let mut seen = std::collections::BTreeSet::new();
        let unique: Vec<String> = ranking.into_iter().filter(|d| seen.insert(d.clone())).collect();
        if let Some(ap) = average_precision(&unique, &qrels, "q") {
            prop_assert!((0.0..=1.0).contains(&ap));
        }
    }
}
