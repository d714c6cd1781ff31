//! Deterministic text normalization.
//!
//! Normalization strips the superficial cues that would make registers
//! trivially separable (casing, punctuation, digits, URLs) while
//! leaving the linguistic signal intact. The exact rules, in order:
//!
//! 1. Split the raw text on Unicode whitespace and delete any token
//!    matching the URL pattern `^[A-Za-z][A-Za-z0-9+.-]*://` or
//!    `^www.` (both case-insensitive, prefix match) or the email
//!    pattern `^[^@\s]+@[^@\s]+\.[^@\s]+$` (full-token match).
//! 2. Lowercase with Rust's standard full Unicode lowercasing
//!    (`str::to_lowercase`): locale-independent, no Turkish dotted-i
//!    special casing. Turkish `I` therefore folds to `i`, a documented
//!    divergence from locale-aware folding.
//! 3. Keep only code points whose general category is Ll, Lm, Lo, Mn,
//!    Mc or Me; delete everything else. This purges punctuation (P*),
//!    symbols (S*, including emoji), all numbers (Nd, Nl, No), controls
//!    and format characters, and the handful of uppercase letters that
//!    have no lowercase mapping (e.g. mathematical capital letters).
//! 4. Collapse whitespace runs to a single ASCII space and trim.
//! 5. Record `token_count`: the number of whitespace-delimited units at
//!    this point.
//! 6. For spaceless profiles, delete all remaining whitespace.
//!
//! The pipeline is idempotent and pure; byte-identical inputs produce
//! byte-identical outputs on every platform.

use std::sync::OnceLock;

use regex::Regex;
use unicode_properties::{GeneralCategory, UnicodeGeneralCategory};

use crate::lang::LanguageProfile;

/// Output of [`normalize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedText {
    pub text: String,
    /// Whitespace-delimited units counted before any space removal.
    pub token_count: usize,
    pub spaceless_applied: bool,
}

fn url_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^(?:[a-z][a-z0-9+.-]*://|www\.)").unwrap())
}

fn email_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[^@\s]+@[^@\s]+\.[^@\s]+$").unwrap())
}

fn is_kept(c: char) -> bool {
    matches!(
        c.general_category(),
        GeneralCategory::LowercaseLetter
            | GeneralCategory::ModifierLetter
            | GeneralCategory::OtherLetter
            | GeneralCategory::NonspacingMark
            | GeneralCategory::SpacingMark
            | GeneralCategory::EnclosingMark
    )
}

/// Normalize `text` under `profile`. See the module docs for the exact
/// rule set. Empty output is legal; downstream operations guard
/// against it.
pub fn normalize(text: &str, profile: &LanguageProfile) -> NormalizedText {
    let (text, token_count) = normalize_tokens(text, profile.spaceless);
    NormalizedText {
        text,
        token_count,
        spaceless_applied: profile.spaceless,
    }
}

/// Core of [`normalize`]: returns the normalized string and the
/// pre-space-removal token count. When `spaceless` is true the
/// returned string contains no whitespace.
pub(crate) fn normalize_tokens(text: &str, spaceless: bool) -> (String, usize) {
    let mut out = String::with_capacity(text.len());
    let mut token_count = 0usize;
    for raw in text.split_whitespace() {
        if url_pattern().is_match(raw) || email_pattern().is_match(raw) {
            continue;
        }
        let lowered = raw.to_lowercase();
        let start = out.len();
        if token_count > 0 && !spaceless {
            out.push(' ');
        }
        let mark = out.len();
        out.extend(lowered.chars().filter(|&c| is_kept(c)));
        if out.len() == mark {
            out.truncate(start);
        } else {
            token_count += 1;
        }
    }
    (out, token_count)
}
