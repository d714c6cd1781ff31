//! Synthetic register generators for demos, tests, and offline
//! acceptance runs.
//!
//! Each synthetic register draws tokens from a two-part distribution:
//!
//! * an *exclusive* block of `exclusive_types` tokens owned by this
//!   register alone, drawn uniformly, carrying `exclusive_permil`/1000
//!   of the token mass;
//! * a *shared* vocabulary of `shared_types` tokens common to all
//!   registers, drawn from a flattened Zipf profile (integer weights
//!   `1_000_000 / (rank + 400)`) whose rank order is permuted by a
//!   register-specific seed.
//!
//! Two registers with the same `profile_seed` are statistically
//! identical; registers with different seeds differ both in their
//! exclusive blocks (disjoint by construction) and in how they order
//! the shared vocabulary. With the default parameters every token in
//! the exclusive block is more probable than any shared token, so the
//! top of each register's frequency profile is register-specific.
//!
//! Only integer arithmetic is used, so generated corpora are
//! byte-identical across platforms.

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, RegisterLabel, SplitTag};
use crate::error::Result;
use crate::features::FeatureType;
use crate::lang::LanguageProfile;
use crate::rng::{derive_seed, Rng};

const DEFAULT_SHARED_TYPES: usize = 6000;
const DEFAULT_EXCLUSIVE_TYPES: usize = 200;
const DEFAULT_DOC_TOKENS: usize = 500;
const ZIPF_NUMERATOR: u64 = 1_000_000;
const ZIPF_OFFSET: u64 = 400;

fn default_shared_types() -> usize {
    DEFAULT_SHARED_TYPES
}
fn default_exclusive_types() -> usize {
    DEFAULT_EXCLUSIVE_TYPES
}
fn default_doc_tokens() -> usize {
    DEFAULT_DOC_TOKENS
}

/// Parameters of one synthetic register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Identity of the register's distribution. Equal seeds mean
    /// identical distributions.
    pub profile_seed: u64,
    /// Size of the register-exclusive token block.
    #[serde(default = "default_exclusive_types")]
    pub exclusive_types: usize,
    /// Token mass on the exclusive block, in thousandths.
    pub exclusive_permil: u32,
    /// Tokens to generate per split.
    pub tokens: usize,
    /// Tokens per generated document.
    #[serde(default = "default_doc_tokens")]
    pub doc_tokens: usize,
    /// Shared vocabulary size.
    #[serde(default = "default_shared_types")]
    pub shared_types: usize,
}

/// Letters-only encoding of an integer (base 26, `a`..`z`), so that
/// generated tokens pass normalization unchanged.
fn base26(mut value: u64) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (value % 26) as u8);
        value /= 26;
        if value == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Base-13 variant restricted to `a`..`m`, used for the profile-seed
/// part of exclusive tokens. Because it can never emit the `w`
/// separator, the (seed, index) encoding is injective and exclusive
/// blocks of different seeds can never collide.
fn base13(mut value: u64) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (value % 13) as u8);
        value /= 13;
        if value == 0 {
            break;
        }
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

struct Generator {
    exclusive_prefix: String,
    shared_tokens: Vec<String>,
    cumulative: Vec<u64>,
    total_weight: u64,
    exclusive_types: u64,
    exclusive_permil: u64,
}

impl Generator {
    fn new(spec: &SyntheticSpec) -> Self {
        assert!(spec.shared_types > 0, "shared vocabulary must be non-empty");
        assert!(spec.exclusive_permil <= 1000, "permil value above 1000");

        // Shared vocabulary in permuted rank order: index k of the
        // cumulative table is the k-th most frequent shared type for
        // this register.
        let mut type_ids: Vec<u32> = (0..spec.shared_types as u32).collect();
        Rng::new(derive_seed(spec.profile_seed, "shared-permutation")).shuffle(&mut type_ids);
        let shared_tokens: Vec<String> = type_ids
            .iter()
            .map(|&id| format!("q{}", base26(u64::from(id))))
            .collect();

        let mut cumulative = Vec::with_capacity(spec.shared_types);
        let mut acc = 0u64;
        for rank in 0..spec.shared_types as u64 {
            acc += ZIPF_NUMERATOR / (rank + 1 + ZIPF_OFFSET);
            cumulative.push(acc);
        }

        Generator {
            exclusive_prefix: format!("x{}w", base13(spec.profile_seed)),
            shared_tokens,
            cumulative,
            total_weight: acc,
            exclusive_types: spec.exclusive_types as u64,
            exclusive_permil: u64::from(spec.exclusive_permil),
        }
    }

    fn draw(&self, rng: &mut Rng, out: &mut String) {
        if self.exclusive_types > 0 && rng.next_u64() % 1000 < self.exclusive_permil {
            out.push_str(&self.exclusive_prefix);
            out.push_str(&base26(rng.below(self.exclusive_types)));
        } else {
            let u = rng.below(self.total_weight);
            let rank = self.cumulative.partition_point(|&c| c <= u);
            out.push_str(&self.shared_tokens[rank]);
        }
    }
}

/// Generate one split of a synthetic register. The token stream is a
/// pure function of (`spec`, `stream_seed`); the register's
/// distribution depends only on `spec`.
pub fn generate_corpus(
    spec: &SyntheticSpec,
    register: RegisterLabel,
    split_tag: SplitTag,
    stream_seed: u64,
) -> Result<Corpus> {
    let generator = Generator::new(spec);
    let mut rng = Rng::new(stream_seed);
    let doc_tokens = spec.doc_tokens.max(1);
    let mut documents = Vec::with_capacity(spec.tokens / doc_tokens + 1);
    let mut doc = String::new();
    let mut in_doc = 0usize;
    for _ in 0..spec.tokens {
        if in_doc > 0 {
            doc.push(' ');
        }
        generator.draw(&mut rng, &mut doc);
        in_doc += 1;
        if in_doc == doc_tokens {
            documents.push(std::mem::take(&mut doc));
            in_doc = 0;
        }
    }
    if in_doc > 0 {
        documents.push(doc);
    }
    let language = LanguageProfile::custom("syn", false, FeatureType::word(1).unwrap())?;
    Ok(Corpus {
        language,
        register,
        documents,
        split_tag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn spec(profile_seed: u64, exclusive_permil: u32, tokens: usize) -> SyntheticSpec {
        SyntheticSpec {
            profile_seed,
            exclusive_types: DEFAULT_EXCLUSIVE_TYPES,
            exclusive_permil,
            tokens,
            doc_tokens: DEFAULT_DOC_TOKENS,
            shared_types: DEFAULT_SHARED_TYPES,
        }
    }

    fn reg(name: &str) -> RegisterLabel {
        RegisterLabel::new(name).unwrap()
    }

    #[test]
    fn generates_requested_token_count() {
        let corpus = generate_corpus(&spec(0, 300, 12_345), reg("A"), SplitTag::Train, 1).unwrap();
        let total: usize = corpus
            .documents
            .iter()
            .map(|d| d.split_whitespace().count())
            .sum();
        assert_eq!(total, 12_345);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_corpus(&spec(0, 300, 5_000), reg("A"), SplitTag::Train, 7).unwrap();
        let b = generate_corpus(&spec(0, 300, 5_000), reg("A"), SplitTag::Train, 7).unwrap();
        assert_eq!(a.documents, b.documents);
        let c = generate_corpus(&spec(0, 300, 5_000), reg("A"), SplitTag::Train, 8).unwrap();
        assert_ne!(a.documents, c.documents);
    }

    #[test]
    fn tokens_survive_normalization() {
        let corpus = generate_corpus(&spec(3, 500, 2_000), reg("A"), SplitTag::Train, 2).unwrap();
        for doc in &corpus.documents {
            let (normalized, count) = crate::normalize::normalize_tokens(doc, false);
            assert_eq!(&normalized, doc);
            assert_eq!(count, doc.split_whitespace().count());
        }
    }

    #[test]
    fn exclusive_blocks_of_distinct_seeds_are_disjoint() {
        let a = generate_corpus(&spec(0, 1000, 3_000), reg("A"), SplitTag::Train, 1).unwrap();
        let b = generate_corpus(&spec(1, 1000, 3_000), reg("B"), SplitTag::Train, 1).unwrap();
        let tokens_a: std::collections::HashSet<&str> = a
            .documents
            .iter()
            .flat_map(|d| d.split_whitespace())
            .collect();
        for doc in &b.documents {
            for token in doc.split_whitespace() {
                assert!(!tokens_a.contains(token), "shared exclusive token {token}");
            }
        }
    }

    #[test]
    fn top_exclusive_tokens_dominate_any_shared_token() {
        // With 300 permil on a uniform block of 200, each exclusive
        // token carries mass 1.5e-3; the heaviest shared token carries
        // 0.7 * w1 / W where w1 / W is about 9e-4. The empirical
        // frequency profile of a large draw must respect that margin
        // for the bulk of the exclusive block.
        let s = spec(5, 300, 400_000);
        let corpus = generate_corpus(&s, reg("A"), SplitTag::Train, 9).unwrap();
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in &corpus.documents {
            for token in doc.split_whitespace() {
                *counts.entry(token).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1));
        let exclusive_in_top_200 = ranked[..200]
            .iter()
            .filter(|(t, _)| t.starts_with("x"))
            .count();
        assert!(
            exclusive_in_top_200 >= 190,
            "only {exclusive_in_top_200} exclusive tokens in the empirical top 200"
        );
    }

    fn empirical_top(corpus: &Corpus, k: usize) -> std::collections::HashSet<String> {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for doc in &corpus.documents {
            for token in doc.split_whitespace() {
                *counts.entry(token).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
        ranked.sort_unstable_by(|x, y| y.1.cmp(&x.1).then_with(|| x.0.cmp(y.0)));
        ranked[..k].iter().map(|(t, _)| t.to_string()).collect()
    }

    #[test]
    fn profile_seed_controls_the_shared_frequency_profile() {
        // Same profile seed, different streams: heads of the frequency
        // profile largely agree. Different profile seeds: the shared
        // permutations are unrelated, so the heads barely overlap.
        let a = generate_corpus(&spec(4, 0, 200_000), reg("A"), SplitTag::Train, 1).unwrap();
        let b = generate_corpus(&spec(4, 0, 200_000), reg("B"), SplitTag::Train, 2).unwrap();
        let c = generate_corpus(&spec(9, 0, 200_000), reg("C"), SplitTag::Train, 3).unwrap();
        assert_ne!(a.documents, b.documents);
        let top_a = empirical_top(&a, 100);
        let top_b = empirical_top(&b, 100);
        let top_c = empirical_top(&c, 100);
        let same_profile = top_a.intersection(&top_b).count();
        let cross_profile = top_a.intersection(&top_c).count();
        assert!(same_profile >= 60, "same-profile overlap {same_profile}");
        assert!(cross_profile <= 20, "cross-profile overlap {cross_profile}");
    }

    #[test]
    fn base26_is_injective_over_a_range() {
        let mut seen = std::collections::HashSet::new();
        for v in 0..10_000u64 {
            assert!(seen.insert(base26(v)));
        }
    }
}
