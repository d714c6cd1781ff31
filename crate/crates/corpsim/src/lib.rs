//! Frequency-based corpus similarity and register prediction.
//!
//! The toolkit measures the distance and homogeneity of text corpora
//! from n-gram frequency profiles, calibrates same-register vs
//! different-register decision thresholds, and runs the full
//! evaluation protocol end to end: normalization, sample extraction,
//! feature selection, vectorization, four similarity measures,
//! threshold calibration, and batch pair evaluation with grid sweeps,
//! cross-validation, and one-vs-one/one-vs-all summaries.
//!
//! Everything downstream of a seed is deterministic and
//! platform-stable; see [`rng`] for the generator contract and
//! [`normalize`] for the exact text rules.

pub mod calibration;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod features;
pub mod lang;
pub mod measures;
pub mod normalize;
pub mod rng;
pub mod synth;

pub use calibration::{
    accuracy, predict_same_register, threshold_t1, threshold_t2, Condition, ConditionMeans,
    PairObservation, ThresholdMethod, ThresholdModel,
};
pub use corpus::{draw_samples, load_corpus, Corpus, RegisterLabel, Sample, SplitTag};
pub use error::{Error, Result};
pub use experiments::{
    build_pair_set, calibrate, cross_validate, distributions_csv, expand_grid,
    export_distributions, one_vs_all, register_matrix, run_experiment, run_grid,
    CalibrationReport, CorpusSource, ExperimentConfig, ExperimentReport, GridReport, LanguageRef,
    RegisterConfig,
};
pub use features::{
    extract_ngrams, feature_overlap, select_features, vectorize, FeatureKind, FeatureSpace,
    FeatureType, FrequencyVector, SourceTag,
};
pub use lang::{LanguageProfile, ProfileRegistry};
pub use measures::{
    chi_squared, cosine_score, euclidean_score, score, spearman_rho, MeasureId, SimilarityScore,
};
pub use normalize::{normalize, NormalizedText};
pub use synth::{generate_corpus, SyntheticSpec};

/// Sample sizes below this many words are outside the documented
/// operating range; the CLI warns but does not refuse.
pub const RECOMMENDED_MIN_SAMPLE_WORDS: usize = 10_000;
