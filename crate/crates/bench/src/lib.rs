//! Shared fixtures for the criterion benchmarks.

use chronorank_core::corpus::{admit_document, build_index, CollectionStats, Document, InvertedIndex};
use chronorank_core::synth::{generate, SynthConfig, SynthData};

pub fn bench_data() -> SynthData {
    generate(&SynthConfig {
        num_queries: 24,
        relevant_per_query: 20,
        confounders_per_query: 20,
        background_docs: 2000,
        seed: 77,
        ..SynthConfig::default()
    })
}

pub fn bench_index(data: &SynthData) -> (InvertedIndex, CollectionStats) {
    let admitted: Vec<Document> = data
        .documents
        .iter()
        .filter(|d| admit_document(d))
        .cloned()
        .collect();
    build_index(admitted).expect("synthetic corpus indexes")
}
