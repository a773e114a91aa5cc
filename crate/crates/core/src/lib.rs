//! Compression-based text classification.
//!
//! Classifies documents by Normalized Compression Distance computed
//! with off-the-shelf lossless compressors and a k-nearest-neighbor
//! decision rule, plus the evaluation machinery for few-shot and
//! compressor-comparison experiments: seeded stratified sampling,
//! confidence intervals, bits-per-character and rank statistics.

pub mod classify;
pub mod compressor;
pub mod corpus;
pub mod distance;
pub mod error;
pub mod eval;
pub mod experiment;

pub use classify::{
    ce_predict, ce_train, knn_neighbors, knn_predict, knn_score, textlength_distance_row, CeModel,
    LengthUnit, ScoringMode, TiePolicy,
};
pub use compressor::{BackendKind, CompressorBackend};
pub use corpus::{
    corpus_stats, few_shot_sample, load_corpus, save_corpus, CorpusFormat, CorpusStats, Document,
    LabeledCorpus,
};
pub use distance::{distance_matrix, joint_len, ncd, DistanceMatrix};
pub use error::{Error, Result};
pub use eval::{
    accuracy, bpc, corpus_compression_ratio, normalized_rank_percentage, pearson, spearman,
    trial_ci, AnalysisRecord, CiMethod, CiSummary, EvalReport, TrialResult,
};
pub use experiment::{run_few_shot, run_trial, FewShotConfig, Method};
