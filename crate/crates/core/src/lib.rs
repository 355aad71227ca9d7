//! Time-aware learning-to-rank over temporal crowd signals.
//!
//! The pipeline retrieves query-likelihood candidates from an inverted
//! index, mines per-query (timestamp, weight) signals from news headlines,
//! Wikipedia views and edits, and corpus feedback, smooths each signal into
//! a boundary-corrected weighted kernel density, and combines the resulting
//! temporal features with lexical and domain features in linear models
//! trained by coordinate ascent to maximize MAP. Queries route to a
//! temporal or atemporal model depending on whether matching news exists.

pub mod corpus;
pub mod density;
pub mod eval;
pub mod features;
pub mod ltr;
pub mod signals;
pub mod synth;
pub mod textscore;

pub use corpus::{CollectionStats, Document, InvertedIndex, Query};
pub use density::{Correction, DensityEstimate, RecencyConfig};
pub use eval::{Qrels, RunFile, TTestReport};
pub use features::{FeatureName, FeatureVector, QueryFeatureSet};
pub use ltr::{LinearModel, ModelPair, QueryClass, TrainConfig};
pub use signals::{SourceKind, TemporalSignal};
pub use textscore::{Bm25Config, DirichletConfig};
