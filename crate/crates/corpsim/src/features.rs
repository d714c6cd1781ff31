//! N-gram feature spaces: extraction, frequency-based selection,
//! vectorization, and overlap diagnostics.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Sample};
use crate::error::{Error, Result};
use crate::lang::LanguageProfile;
use crate::normalize::normalize_tokens;
use crate::rng::fnv1a64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Word,
    Char,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Word => "word",
            FeatureKind::Char => "char",
        })
    }
}

/// A feature family: word n-grams for n in 1..=3 or character n-grams
/// for n in 2..=4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FeatureType {
    pub kind: FeatureKind,
    pub n: usize,
}

impl FeatureType {
    pub fn new(kind: FeatureKind, n: usize) -> Result<Self> {
        let ok = match kind {
            FeatureKind::Word => (1..=3).contains(&n),
            FeatureKind::Char => (2..=4).contains(&n),
        };
        if !ok {
            return Err(Error::InvalidFeatureType {
                input: format!("{kind} {n}-gram"),
            });
        }
        Ok(FeatureType { kind, n })
    }

    pub fn word(n: usize) -> Result<Self> {
        Self::new(FeatureKind::Word, n)
    }

    pub fn char(n: usize) -> Result<Self> {
        Self::new(FeatureKind::Char, n)
    }

    /// The six families of the standard grid.
    pub fn all() -> [FeatureType; 6] {
        [
            FeatureType { kind: FeatureKind::Word, n: 1 },
            FeatureType { kind: FeatureKind::Word, n: 2 },
            FeatureType { kind: FeatureKind::Word, n: 3 },
            FeatureType { kind: FeatureKind::Char, n: 2 },
            FeatureType { kind: FeatureKind::Char, n: 3 },
            FeatureType { kind: FeatureKind::Char, n: 4 },
        ]
    }
}

impl fmt::Display for FeatureType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            FeatureKind::Word => 'w',
            FeatureKind::Char => 'c',
        };
        write!(f, "{prefix}{}", self.n)
    }
}

impl FromStr for FeatureType {
    type Err = Error;

    /// Accepts the compact form (`w1`, `c4`) and the spelled-out form
    /// (`word-1`, `char-4`).
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::InvalidFeatureType { input: s.to_string() };
        let (kind, digits) = if let Some(rest) = s.strip_prefix("word-").or_else(|| s.strip_prefix('w')) {
            (FeatureKind::Word, rest)
        } else if let Some(rest) = s.strip_prefix("char-").or_else(|| s.strip_prefix('c')) {
            (FeatureKind::Char, rest)
        } else {
            return Err(err());
        };
        let n: usize = digits.parse().map_err(|_| err())?;
        FeatureType::new(kind, n).map_err(|_| err())
    }
}

impl TryFrom<String> for FeatureType {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FeatureType> for String {
    fn from(ft: FeatureType) -> String {
        ft.to_string()
    }
}

/// Where a feature space was selected from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SourceTag {
    InDomain,
    OutOfDomain,
    Custom(String),
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceTag::InDomain => f.write_str("in_domain"),
            SourceTag::OutOfDomain => f.write_str("out_of_domain"),
            SourceTag::Custom(name) => write!(f, "custom:{name}"),
        }
    }
}

impl FromStr for SourceTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in_domain" => Ok(SourceTag::InDomain),
            "out_of_domain" => Ok(SourceTag::OutOfDomain),
            _ => match s.strip_prefix("custom:") {
                Some(name) if !name.is_empty() => Ok(SourceTag::Custom(name.to_string())),
                _ => Err(Error::Config {
                    message: format!(
                        "source tag {s:?}: expected in_domain, out_of_domain, or custom:<name>"
                    ),
                }),
            },
        }
    }
}

impl TryFrom<String> for SourceTag {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SourceTag> for String {
    fn from(tag: SourceTag) -> String {
        tag.to_string()
    }
}

/// An ordered inventory of the N most frequent n-grams of a source
/// corpus. Order is descending selection rank and is significant:
/// vectors align to it index for index.
#[derive(Debug, Clone)]
pub struct FeatureSpace {
    language: String,
    feature_type: FeatureType,
    source_tag: SourceTag,
    features: Vec<String>,
    index: HashMap<String, u32>,
    id: String,
}

/// On-disk schema for a feature space; field order and feature order
/// round-trip bit-exactly.
#[derive(Serialize, Deserialize)]
struct FeatureSpaceFile {
    language: String,
    kind: FeatureKind,
    n: usize,
    n_features: usize,
    source_tag: SourceTag,
    features: Vec<String>,
}

impl FeatureSpace {
    pub fn new(
        language: &str,
        feature_type: FeatureType,
        source_tag: SourceTag,
        features: Vec<String>,
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(features.len());
        for (i, feat) in features.iter().enumerate() {
            if index.insert(feat.clone(), i as u32).is_some() {
                return Err(Error::Config {
                    message: format!("duplicate feature {feat:?} in feature space"),
                });
            }
        }
        let mut fingerprint = 0xcbf2_9ce4_8422_2325u64;
        for feat in &features {
            fingerprint ^= fnv1a64(feat.as_bytes());
            fingerprint = fingerprint.wrapping_mul(0x0000_0100_0000_01B3);
        }
        let id = format!(
            "{language}-{feature_type}-{}-{source_tag}-{fingerprint:016x}",
            features.len()
        );
        Ok(FeatureSpace {
            language: language.to_string(),
            feature_type,
            source_tag,
            features,
            index,
            id,
        })
    }

    /// Stable identifier carrying language, type, size, provenance, and
    /// a content fingerprint. Vectors record it so that measures can
    /// reject cross-space comparisons.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn feature_type(&self) -> FeatureType {
        self.feature_type
    }

    pub fn source_tag(&self) -> &SourceTag {
        &self.source_tag
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn to_json(&self) -> String {
        let file = FeatureSpaceFile {
            language: self.language.clone(),
            kind: self.feature_type.kind,
            n: self.feature_type.n,
            n_features: self.features.len(),
            source_tag: self.source_tag.clone(),
            features: self.features.clone(),
        };
        let mut json = serde_json::to_string_pretty(&file).expect("feature space serializes");
        json.push('\n');
        json
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: FeatureSpaceFile = serde_json::from_str(json).map_err(|e| Error::Config {
            message: format!("feature space file: {e}"),
        })?;
        if file.n_features != file.features.len() {
            return Err(Error::Config {
                message: format!(
                    "feature space file: n_features is {} but {} features are listed",
                    file.n_features,
                    file.features.len()
                ),
            });
        }
        FeatureSpace::new(
            &file.language,
            FeatureType::new(file.kind, file.n)?,
            file.source_tag,
            file.features,
        )
    }
}

/// Counts of one sample aligned to a feature space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyVector {
    pub space_id: String,
    pub counts: Vec<u32>,
    /// The sample size S in words, not the sum of counts.
    pub total_tokens: usize,
}

/// Visit every n-gram of `text` in order. Word n-grams are windows of
/// n whitespace tokens joined by a single space; character n-grams are
/// windows of n code points, with spaces participating as ordinary
/// code points. Windows shorter than n yield nothing.
fn for_each_ngram<F: FnMut(&str)>(text: &str, feature_type: FeatureType, mut visit: F) {
    let n = feature_type.n;
    match feature_type.kind {
        FeatureKind::Word => {
            if n == 1 {
                for token in text.split_whitespace() {
                    visit(token);
                }
            } else {
                let tokens: Vec<&str> = text.split_whitespace().collect();
                if tokens.len() < n {
                    return;
                }
                let mut scratch = String::new();
                for window in tokens.windows(n) {
                    scratch.clear();
                    for (k, token) in window.iter().enumerate() {
                        if k > 0 {
                            scratch.push(' ');
                        }
                        scratch.push_str(token);
                    }
                    visit(&scratch);
                }
            }
        }
        FeatureKind::Char => {
            // Byte offsets of the last n char boundaries; each window
            // is a borrowed slice, so the hot path never allocates.
            let mut starts = [0usize; 5];
            let mut filled = 0usize;
            for (pos, c) in text.char_indices() {
                if filled < n {
                    starts[filled] = pos;
                    filled += 1;
                } else {
                    starts.copy_within(1..n, 0);
                    starts[n - 1] = pos;
                }
                if filled == n {
                    visit(&text[starts[0]..pos + c.len_utf8()]);
                }
            }
        }
    }
}

fn check_kind(sample: &Sample, feature_type: FeatureType) -> Result<()> {
    if sample.spaceless && feature_type.kind == FeatureKind::Word {
        return Err(Error::WordFeaturesOnSpacelessText);
    }
    Ok(())
}

/// The n-gram multiset of a sample, as a count map.
pub fn extract_ngrams(sample: &Sample, feature_type: FeatureType) -> Result<HashMap<String, u64>> {
    check_kind(sample, feature_type)?;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for_each_ngram(&sample.text, feature_type, |gram| {
        if let Some(c) = counts.get_mut(gram) {
            *c += 1;
        } else {
            counts.insert(gram.to_string(), 1);
        }
    });
    Ok(counts)
}

/// The normalized text of a whole corpus, assembled exactly like
/// sample text: documents joined with single spaces (or nothing for
/// spaceless languages).
pub(crate) fn corpus_text(corpus: &Corpus, profile: &LanguageProfile) -> String {
    let sep = if profile.spaceless { "" } else { " " };
    let mut out = String::new();
    for doc in &corpus.documents {
        let (normalized, token_count) = normalize_tokens(doc, profile.spaceless);
        if token_count == 0 {
            continue;
        }
        if !out.is_empty() {
            out.push_str(sep);
        }
        out.push_str(&normalized);
    }
    out
}

/// Select the `n_features` most frequent n-grams of the normalized
/// corpus, ordered by descending count with ties broken by code-point
/// lexicographic order of the feature string.
pub fn select_features(
    corpus: &Corpus,
    profile: &LanguageProfile,
    feature_type: FeatureType,
    n_features: usize,
    source_tag: SourceTag,
) -> Result<FeatureSpace> {
    if profile.spaceless && feature_type.kind == FeatureKind::Word {
        return Err(Error::WordFeaturesOnSpacelessText);
    }
    let text = corpus_text(corpus, profile);
    let mut counts: HashMap<String, u64> = HashMap::new();
    for_each_ngram(&text, feature_type, |gram| {
        if let Some(c) = counts.get_mut(gram) {
            *c += 1;
        } else {
            counts.insert(gram.to_string(), 1);
        }
    });
    if counts.len() < n_features {
        return Err(Error::TooFewDistinctFeatures {
            available: counts.len(),
            requested: n_features,
        });
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n_features);
    let features = ranked.into_iter().map(|(feat, _)| feat).collect();
    FeatureSpace::new(&profile.code, feature_type, source_tag, features)
}

/// Count each space feature in the sample. Features absent from the
/// sample get zero.
pub fn vectorize(sample: &Sample, space: &FeatureSpace) -> Result<FrequencyVector> {
    check_kind(sample, space.feature_type).map_err(|_| Error::FeatureKindMismatch {
        sample: "spaceless text".into(),
        space: space.feature_type.to_string(),
    })?;
    let mut counts = vec![0u32; space.len()];
    for_each_ngram(&sample.text, space.feature_type, |gram| {
        if let Some(&i) = space.index.get(gram) {
            counts[i as usize] += 1;
        }
    });
    Ok(FrequencyVector {
        space_id: space.id.clone(),
        counts,
        total_tokens: sample.word_count,
    })
}

/// Fraction of features shared by two equal-size spaces.
pub fn feature_overlap(a: &FeatureSpace, b: &FeatureSpace) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let set: HashSet<&str> = a.features.iter().map(String::as_str).collect();
    let shared = b.features.iter().filter(|f| set.contains(f.as_str())).count();
    Ok(shared as f64 / a.len() as f64)
}
