//! Corpora, registers, and deterministic sample extraction.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lang::LanguageProfile;
use crate::normalize::normalize_tokens;
use crate::rng::Rng;

/// Short register identifier, unique within an experiment (e.g. "TW").
///
/// Labels may not be empty or contain whitespace or `-`, which is
/// reserved as the separator in condition keys and sample ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RegisterLabel(String);

impl RegisterLabel {
    pub fn new(name: &str) -> Result<Self> {
        if name.is_empty() || name.contains(char::is_whitespace) || name.contains('-') {
            return Err(Error::Config {
                message: format!(
                    "register label {name:?} must be non-empty, without whitespace or '-'"
                ),
            });
        }
        Ok(RegisterLabel(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RegisterLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for RegisterLabel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        RegisterLabel::new(&s)
    }
}

impl From<RegisterLabel> for String {
    fn from(label: RegisterLabel) -> String {
        label.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Test,
    Validation,
    Unsplit,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SplitTag::Train => "train",
            SplitTag::Test => "test",
            SplitTag::Validation => "validation",
            SplitTag::Unsplit => "unsplit",
        };
        f.write_str(s)
    }
}

/// An ordered collection of raw documents from one register of one
/// language.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub language: LanguageProfile,
    pub register: RegisterLabel,
    pub documents: Vec<String>,
    pub split_tag: SplitTag,
}

/// A fixed-size chunk of normalized text drawn from a corpus.
///
/// `word_count` always equals the requested sample size exactly. For
/// spaceless languages `text` contains no whitespace and `word_count`
/// reflects the whitespace-delimited units counted before space
/// removal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub id: String,
    pub register: RegisterLabel,
    pub text: String,
    pub word_count: usize,
    pub spaceless: bool,
}

impl Sample {
    /// Whitespace-delimited tokens. Yields the whole text as one token
    /// for spaceless samples; word-feature extraction rejects those
    /// before ever tokenizing.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.text.split_whitespace()
    }
}

/// Load a newline-delimited UTF-8 corpus: one document per line, blank
/// lines skipped. Invalid UTF-8 is rejected, not repaired.
pub fn load_corpus(
    path: &Path,
    language: &LanguageProfile,
    register: RegisterLabel,
    split_tag: SplitTag,
) -> Result<Corpus> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let text = String::from_utf8(bytes).map_err(|_| Error::InvalidEncoding {
        path: path.display().to_string(),
    })?;
    let documents: Vec<String> = text
        .lines()
        .filter(|line| !line.trim().is_empty())
        .map(str::to_string)
        .collect();
    if documents.is_empty() {
        return Err(Error::EmptyCorpus {
            path: path.display().to_string(),
        });
    }
    Ok(Corpus {
        language: language.clone(),
        register,
        documents,
        split_tag,
    })
}

/// Partition a corpus into samples of exactly `size_words` tokens.
///
/// Documents are shuffled with the seeded generator described in
/// [`crate::rng`], normalized, concatenated, and cut into consecutive
/// non-overlapping chunks; the trailing remainder is discarded. The
/// result is a pure function of the corpus bytes, `size_words`, and
/// `seed`.
pub fn draw_samples(corpus: &Corpus, size_words: usize, seed: u64) -> Result<Vec<Sample>> {
    assert!(size_words > 0, "sample size must be positive");
    let spaceless = corpus.language.spaceless;

    let mut order: Vec<usize> = (0..corpus.documents.len()).collect();
    Rng::new(seed).shuffle(&mut order);

    // Normalized with spaces retained so token boundaries survive for
    // chunking; space removal happens per chunk below.
    let normalized: Vec<String> = order
        .iter()
        .map(|&i| normalize_tokens(&corpus.documents[i], false).0)
        .collect();

    let total: usize = normalized
        .iter()
        .map(|t| t.split_whitespace().count())
        .sum();
    if total < size_words {
        return Err(Error::InsufficientData {
            available: total,
            requested: size_words,
        });
    }

    let sep = if spaceless { "" } else { " " };
    let mut samples = Vec::with_capacity(total / size_words);
    let mut chunk = String::new();
    let mut in_chunk = 0usize;
    for doc in &normalized {
        for token in doc.split_whitespace() {
            if in_chunk > 0 {
                chunk.push_str(sep);
            }
            chunk.push_str(token);
            in_chunk += 1;
            if in_chunk == size_words {
                samples.push(Sample {
                    id: format!("{}-s{}-c{}", corpus.register, seed, samples.len()),
                    register: corpus.register.clone(),
                    text: std::mem::take(&mut chunk),
                    word_count: size_words,
                    spaceless,
                });
                in_chunk = 0;
            }
        }
    }
    Ok(samples)
}
