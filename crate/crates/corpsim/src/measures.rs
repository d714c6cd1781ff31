//! The four similarity measures, unified under a single orientation:
//! higher scores always mean more similar. Spearman's rho is a
//! correlation and keeps its natural range; the three distance-style
//! measures are negated, so their maximum is 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FrequencyVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureId {
    Spearman,
    ChiSquared,
    Cosine,
    Euclidean,
}

impl MeasureId {
    pub fn all() -> [MeasureId; 4] {
        [
            MeasureId::Spearman,
            MeasureId::ChiSquared,
            MeasureId::Cosine,
            MeasureId::Euclidean,
        ]
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureId::Spearman => "spearman",
            MeasureId::ChiSquared => "chi_squared",
            MeasureId::Cosine => "cosine",
            MeasureId::Euclidean => "euclidean",
        })
    }
}

impl FromStr for MeasureId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spearman" => Ok(MeasureId::Spearman),
            "chi_squared" | "chi2" => Ok(MeasureId::ChiSquared),
            "cosine" => Ok(MeasureId::Cosine),
            "euclidean" => Ok(MeasureId::Euclidean),
            _ => Err(Error::Config {
                message: format!(
                    "unknown measure {s:?}: expected spearman, chi_squared, cosine, or euclidean"
                ),
            }),
        }
    }
}

/// A similarity value in the higher-is-more-similar orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityScore {
    pub measure: MeasureId,
    pub value: f64,
}

fn check_same_space(a: &FrequencyVector, b: &FrequencyVector) -> Result<()> {
    if a.space_id != b.space_id || a.counts.len() != b.counts.len() {
        return Err(Error::SpaceMismatch {
            a: a.space_id.clone(),
            b: b.space_id.clone(),
        });
    }
    Ok(())
}

fn is_constant(counts: &[u32]) -> bool {
    counts.windows(2).all(|w| w[0] == w[1])
}

/// Ascending 1-based ranks with ties assigned the average of the ranks
/// they occupy.
fn average_ranks(counts: &[u32]) -> Vec<f64> {
    let n = counts.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&i| counts[i]);
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && counts[order[end]] == counts[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share the run; their average is
        // (start + 1 + end) / 2.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / n;
    let mean_y: f64 = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    cov / (var_x * var_y).sqrt()
}

/// Tie-corrected Spearman's rho: the Pearson correlation of the two
/// average-rank vectors. Undefined (and an error) when either vector
/// is constant.
pub fn spearman_rho(a: &FrequencyVector, b: &FrequencyVector) -> Result<SimilarityScore> {
    check_same_space(a, b)?;
    if is_constant(&a.counts) || is_constant(&b.counts) {
        return Err(Error::DegenerateVector);
    }
    let value = pearson(&average_ranks(&a.counts), &average_ranks(&b.counts));
    Ok(SimilarityScore {
        measure: MeasureId::Spearman,
        value,
    })
}

/// Kilgarriff-style chi-squared on pooled expectations for equal-sized
/// samples: per feature, e = (a + b) / 2 and the contribution is
/// (a-e)^2/e + (b-e)^2/e; features pooled to zero are skipped. The
/// score is the negated statistic.
pub fn chi_squared(a: &FrequencyVector, b: &FrequencyVector) -> Result<SimilarityScore> {
    check_same_space(a, b)?;
    if a.total_tokens != b.total_tokens {
        return Err(Error::UnequalSampleSizes {
            a: a.total_tokens,
            b: b.total_tokens,
        });
    }
    if a.counts.iter().all(|&c| c == 0) && b.counts.iter().all(|&c| c == 0) {
        return Err(Error::AllZeroVectors);
    }
    let mut statistic = 0.0f64;
    for (&ca, &cb) in a.counts.iter().zip(&b.counts) {
        let pooled = u64::from(ca) + u64::from(cb);
        if pooled == 0 {
            continue;
        }
        let e = pooled as f64 / 2.0;
        let da = f64::from(ca) - e;
        let db = f64::from(cb) - e;
        statistic += da * da / e + db * db / e;
    }
    Ok(SimilarityScore {
        measure: MeasureId::ChiSquared,
        value: -statistic,
    })
}

/// Negated cosine distance on raw counts: -(1 - a·b / (|a||b|)).
/// Zero iff the vectors are parallel; scale-invariant.
pub fn cosine_score(a: &FrequencyVector, b: &FrequencyVector) -> Result<SimilarityScore> {
    check_same_space(a, b)?;
    let mut dot = 0.0f64;
    let mut norm_a = 0.0f64;
    let mut norm_b = 0.0f64;
    for (&ca, &cb) in a.counts.iter().zip(&b.counts) {
        let x = f64::from(ca);
        let y = f64::from(cb);
        dot += x * y;
        norm_a += x * x;
        norm_b += y * y;
    }
    if norm_a == 0.0 || norm_b == 0.0 {
        return Err(Error::ZeroVector);
    }
    let value = -(1.0 - dot / (norm_a.sqrt() * norm_b.sqrt()));
    Ok(SimilarityScore {
        measure: MeasureId::Cosine,
        value,
    })
}

/// Negated Euclidean distance between relative-frequency vectors,
/// where relative frequency divides each count by the sample size.
pub fn euclidean_score(a: &FrequencyVector, b: &FrequencyVector) -> Result<SimilarityScore> {
    check_same_space(a, b)?;
    if a.total_tokens == 0 || b.total_tokens == 0 {
        return Err(Error::ZeroTotal);
    }
    let ta = a.total_tokens as f64;
    let tb = b.total_tokens as f64;
    let mut sum = 0.0f64;
    for (&ca, &cb) in a.counts.iter().zip(&b.counts) {
        let d = f64::from(ca) / ta - f64::from(cb) / tb;
        sum += d * d;
    }
    Ok(SimilarityScore {
        measure: MeasureId::Euclidean,
        value: -sum.sqrt(),
    })
}

/// Dispatch to the measure's scoring function.
pub fn score(measure: MeasureId, a: &FrequencyVector, b: &FrequencyVector) -> Result<SimilarityScore> {
    match measure {
        MeasureId::Spearman => spearman_rho(a, b),
        MeasureId::ChiSquared => chi_squared(a, b),
        MeasureId::Cosine => cosine_score(a, b),
        MeasureId::Euclidean => euclidean_score(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vector(counts: Vec<u32>, total: usize) -> FrequencyVector {
        FrequencyVector {
            space_id: "test-space".into(),
            counts,
            total_tokens: total,
        }
    }

    fn approx(a: f64, b: f64) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn spearman_identical_ranks() {
        let a = vector(vec![3, 1, 2], 6);
        let b = vector(vec![3, 1, 2], 6);
        approx(spearman_rho(&a, &b).unwrap().value, 1.0);
    }

    #[test]
    fn spearman_reversed_ranks() {
        let a = vector(vec![1, 2, 3], 6);
        let b = vector(vec![3, 2, 1], 6);
        approx(spearman_rho(&a, &b).unwrap().value, -1.0);
    }

    #[test]
    fn spearman_with_ties_matches_rank_oracle() {
        // Ranks a = [4, 2.5, 2.5, 1], b = [4, 3, 2, 1]; the Pearson
        // correlation of those rank vectors is 4.5 / sqrt(22.5).
        let a = vector(vec![10, 5, 5, 0], 20);
        let b = vector(vec![8, 6, 4, 2], 20);
        let rho = spearman_rho(&a, &b).unwrap().value;
        approx(rho, 4.5 / 22.5f64.sqrt());
        assert!((rho - 0.9487).abs() < 5e-5);
    }

    #[test]
    fn spearman_rejects_constant_vectors() {
        let a = vector(vec![2, 2, 2], 6);
        let b = vector(vec![1, 2, 3], 6);
        assert!(matches!(spearman_rho(&a, &b), Err(Error::DegenerateVector)));
        assert!(matches!(spearman_rho(&b, &a), Err(Error::DegenerateVector)));
    }

    #[test]
    fn chi_squared_equal_vectors_score_zero() {
        let a = vector(vec![5, 3, 2], 10);
        approx(chi_squared(&a, &a.clone()).unwrap().value, 0.0);
    }

    #[test]
    fn chi_squared_disjoint_mass() {
        let a = vector(vec![4, 0], 4);
        let b = vector(vec![0, 4], 4);
        approx(chi_squared(&a, &b).unwrap().value, -8.0);
    }

    #[test]
    fn chi_squared_skips_zero_pooled_features() {
        let a = vector(vec![2, 2, 0], 4);
        let b = vector(vec![2, 2, 0], 4);
        approx(chi_squared(&a, &b).unwrap().value, 0.0);
    }

    #[test]
    fn chi_squared_requires_equal_sizes() {
        let a = vector(vec![1, 2], 10);
        let b = vector(vec![1, 2], 11);
        assert!(matches!(
            chi_squared(&a, &b),
            Err(Error::UnequalSampleSizes { a: 10, b: 11 })
        ));
    }

    #[test]
    fn chi_squared_rejects_double_zero() {
        let a = vector(vec![0, 0], 10);
        assert!(matches!(
            chi_squared(&a, &a.clone()),
            Err(Error::AllZeroVectors)
        ));
    }

    #[test]
    fn cosine_is_scale_invariant() {
        let a = vector(vec![1, 2, 3], 6);
        let b = vector(vec![3, 6, 9], 18);
        approx(cosine_score(&a, &b).unwrap().value, 0.0);
    }

    #[test]
    fn cosine_orthogonal_is_minus_one() {
        let a = vector(vec![1, 0], 1);
        let b = vector(vec![0, 1], 1);
        approx(cosine_score(&a, &b).unwrap().value, -1.0);
    }

    #[test]
    fn cosine_dot_product_oracle() {
        // dot = 24, norms = 5 and 5, so the distance is 1 - 24/25.
        let a = vector(vec![3, 4], 7);
        let b = vector(vec![4, 3], 7);
        approx(cosine_score(&a, &b).unwrap().value, -(1.0 - 24.0 / 25.0));
    }

    #[test]
    fn cosine_rejects_zero_vector() {
        let a = vector(vec![0, 0], 5);
        let b = vector(vec![1, 2], 5);
        assert!(matches!(cosine_score(&a, &b), Err(Error::ZeroVector)));
    }

    #[test]
    fn euclidean_identity_scores_zero() {
        let a = vector(vec![3, 4], 7);
        approx(euclidean_score(&a, &a.clone()).unwrap().value, 0.0);
    }

    #[test]
    fn euclidean_direct_formula_oracle() {
        let a = vector(vec![3, 4], 7);
        let b = vector(vec![4, 3], 7);
        approx(euclidean_score(&a, &b).unwrap().value, -2.0f64.sqrt() / 7.0);
        assert!((euclidean_score(&a, &b).unwrap().value + 0.20203).abs() < 5e-6);
    }

    #[test]
    fn euclidean_normalizes_by_sample_size() {
        let a = vector(vec![1, 0], 1);
        let b = vector(vec![2, 0], 2);
        approx(euclidean_score(&a, &b).unwrap().value, 0.0);
    }

    #[test]
    fn euclidean_rejects_zero_total() {
        let a = vector(vec![1, 0], 0);
        let b = vector(vec![1, 0], 1);
        assert!(matches!(euclidean_score(&a, &b), Err(Error::ZeroTotal)));
    }

    #[test]
    fn dispatch_hits_each_maximum_at_identity() {
        let a = vector(vec![5, 1, 3], 9);
        approx(score(MeasureId::Spearman, &a, &a).unwrap().value, 1.0);
        approx(score(MeasureId::ChiSquared, &a, &a).unwrap().value, 0.0);
        approx(score(MeasureId::Cosine, &a, &a).unwrap().value, 0.0);
        approx(score(MeasureId::Euclidean, &a, &a).unwrap().value, 0.0);
    }

    #[test]
    fn different_spaces_are_rejected() {
        let a = vector(vec![1, 2], 3);
        let mut b = vector(vec![2, 1], 3);
        b.space_id = "other-space".into();
        assert!(matches!(
            score(MeasureId::Spearman, &a, &b),
            Err(Error::SpaceMismatch { .. })
        ));
    }

    fn count_vec() -> impl Strategy<Value = Vec<u32>> {
        prop::collection::vec(0u32..50, 2..40)
    }

    proptest! {
        #[test]
        fn all_measures_are_symmetric(xs in count_vec(), ys in count_vec()) {
            let n = xs.len().min(ys.len());
            let total: u32 = 1 + xs[..n].iter().chain(&ys[..n]).sum::<u32>();
            let a = vector(xs[..n].to_vec(), total as usize);
            let b = vector(ys[..n].to_vec(), total as usize);
            for m in MeasureId::all() {
                let ab = score(m, &a, &b);
                let ba = score(m, &b, &a);
                match (ab, ba) {
                    (Ok(x), Ok(y)) => prop_assert!((x.value - y.value).abs() < 1e-12),
                    (Err(_), Err(_)) => {}
                    _ => prop_assert!(false, "asymmetric error behavior"),
                }
            }
        }

        #[test]
        fn spearman_invariant_under_monotone_transform(xs in count_vec(), ys in count_vec()) {
            let n = xs.len().min(ys.len());
            let a = vector(xs[..n].to_vec(), 100);
            let b = vector(ys[..n].to_vec(), 100);
            if let Ok(base) = spearman_rho(&a, &b) {
                // x -> x^2 + 3x is strictly increasing on counts.
                let ta = vector(a.counts.iter().map(|&x| x * x + 3 * x).collect(), 100);
                let tb = vector(b.counts.iter().map(|&x| x * x + 3 * x).collect(), 100);
                let transformed = spearman_rho(&ta, &tb).unwrap();
                prop_assert!((base.value - transformed.value).abs() < 1e-9);
            }
        }

        #[test]
        fn score_ranges(xs in count_vec(), ys in count_vec()) {
            let n = xs.len().min(ys.len());
            let total: u32 = 1 + xs[..n].iter().chain(&ys[..n]).sum::<u32>();
            let a = vector(xs[..n].to_vec(), total as usize);
            let b = vector(ys[..n].to_vec(), total as usize);
            if let Ok(s) = spearman_rho(&a, &b) {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s.value));
            }
            if let Ok(s) = cosine_score(&a, &b) {
                prop_assert!((-2.0 - 1e-12..=1e-12).contains(&s.value));
            }
            if let Ok(s) = euclidean_score(&a, &b) {
                // Totals bound the counts, so these are genuine
                // relative-frequency vectors.
                prop_assert!((-(2.0f64.sqrt()) - 1e-12..=1e-12).contains(&s.value));
            }
            if let Ok(s) = chi_squared(&a, &b) {
                prop_assert!(s.value <= 1e-12);
            }
        }
    }
}
