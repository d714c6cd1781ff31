//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid UTF-8 in {path}")]
    InvalidEncoding { path: String },

    #[error("corpus {path} contains no non-empty lines")]
    EmptyCorpus { path: String },

    #[error("insufficient data: {available} tokens available, {requested} required")]
    InsufficientData { available: usize, requested: usize },

    #[error("word features are undefined on spaceless text")]
    WordFeaturesOnSpacelessText,

    #[error("too few distinct features: {available} available, {requested} requested")]
    TooFewDistinctFeatures { available: usize, requested: usize },

    #[error("feature kind mismatch: sample is {sample}, space is {space}")]
    FeatureKindMismatch { sample: String, space: String },

    #[error("vectors come from different feature spaces: {a} vs {b}")]
    SpaceMismatch { a: String, b: String },

    #[error("feature spaces have different lengths: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("Spearman's rho is undefined: at least one vector is constant")]
    DegenerateVector,

    #[error("chi-squared requires equal sample sizes: {a} vs {b}")]
    UnequalSampleSizes { a: usize, b: usize },

    #[error("both vectors are all-zero")]
    AllZeroVectors,

    #[error("cosine is undefined on a zero vector")]
    ZeroVector,

    #[error("relative frequencies are undefined for a zero token total")]
    ZeroTotal,

    #[error("measure mismatch: score is {score}, threshold is {threshold}")]
    MeasureMismatch { score: String, threshold: String },

    #[error("missing condition mean for {condition}")]
    MissingCondition { condition: String },

    #[error("no observations to evaluate")]
    EmptyObservations,

    #[error("not enough pairs for condition {condition}: {available} available, {requested} requested")]
    NotEnoughPairs {
        condition: String,
        available: usize,
        requested: usize,
    },

    #[error("register {register} has no corpus for the {split} split")]
    MissingSplit { register: String, split: String },

    #[error("unknown register {label}")]
    UnknownRegister { label: String },

    #[error("need at least {needed} registers, got {got}")]
    TooFewRegisters { needed: usize, got: usize },

    #[error("unknown language code {code}")]
    UnknownLanguage { code: String },

    #[error("invalid feature type {input}: expected one of w1 w2 w3 c2 c3 c4")]
    InvalidFeatureType { input: String },

    #[error("invalid language profile for {code}: {message}")]
    InvalidProfile { code: String, message: String },

    #[error("invalid config: {message}")]
    Config { message: String },

    #[error("report contains no raw scores to export")]
    EmptyReport,
}

impl Error {
    /// Short machine-readable tag, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "Io",
            Error::InvalidEncoding { .. } => "InvalidEncoding",
            Error::EmptyCorpus { .. } => "EmptyCorpus",
            Error::InsufficientData { .. } => "InsufficientData",
            Error::WordFeaturesOnSpacelessText => "WordFeaturesOnSpacelessText",
            Error::TooFewDistinctFeatures { .. } => "TooFewDistinctFeatures",
            Error::FeatureKindMismatch { .. } => "FeatureKindMismatch",
            Error::SpaceMismatch { .. } => "SpaceMismatch",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::DegenerateVector => "DegenerateVector",
            Error::UnequalSampleSizes { .. } => "UnequalSampleSizes",
            Error::AllZeroVectors => "AllZeroVectors",
            Error::ZeroVector => "ZeroVector",
            Error::ZeroTotal => "ZeroTotal",
            Error::MeasureMismatch { .. } => "MeasureMismatch",
            Error::MissingCondition { .. } => "MissingCondition",
            Error::EmptyObservations => "EmptyObservations",
            Error::NotEnoughPairs { .. } => "NotEnoughPairs",
            Error::MissingSplit { .. } => "MissingSplit",
            Error::UnknownRegister { .. } => "UnknownRegister",
            Error::TooFewRegisters { .. } => "TooFewRegisters",
            Error::UnknownLanguage { .. } => "UnknownLanguage",
            Error::InvalidFeatureType { .. } => "InvalidFeatureType",
            Error::InvalidProfile { .. } => "InvalidProfile",
            Error::Config { .. } => "Config",
            Error::EmptyReport => "EmptyReport",
        }
    }

    /// Whether the error is a configuration/usage problem (CLI exit 1)
    /// rather than a data problem (CLI exit 2).
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidFeatureType { .. }
                | Error::InvalidProfile { .. }
                | Error::UnknownLanguage { .. }
        )
    }
}
