//! Threshold calibration (T1, T2) and binary same-register prediction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{MeasureId, SimilarityScore};

/// Ground-truth label of a compared pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Same,
    Different,
}

/// One compared pair: who was compared, the true condition, and the
/// similarity score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairObservation {
    pub sample_a: String,
    pub sample_b: String,
    pub register_a: String,
    pub register_b: String,
    pub condition: Condition,
    pub score: SimilarityScore,
}

impl PairObservation {
    /// Canonical condition key: registers sorted and joined with `-`,
    /// e.g. `CC-TW` or `TW-TW`.
    pub fn condition_key(&self) -> String {
        condition_key(&self.register_a, &self.register_b)
    }
}

pub fn condition_key(a: &str, b: &str) -> String {
    if a <= b {
        format!("{a}-{b}")
    } else {
        format!("{b}-{a}")
    }
}

/// Sum with pairwise (recursive halving) accumulation, which keeps the
/// rounding error of long reductions bounded.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 32 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Mean similarity per condition: one entry per register for
/// same-register pairs, one per unordered register pair for
/// different-register pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionMeans {
    /// Register name -> mean score of its same-register pairs.
    pub same_register: BTreeMap<String, f64>,
    /// Canonical pair key (`A-B`, sorted) -> mean score.
    pub different_register: BTreeMap<String, f64>,
}

impl ConditionMeans {
    /// Group observations by condition and average each group.
    pub fn from_observations(observations: &[PairObservation]) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyObservations);
        }
        let mut groups: BTreeMap<(bool, String), Vec<f64>> = BTreeMap::new();
        for obs in observations {
            let key = match obs.condition {
                Condition::Same => (true, obs.register_a.clone()),
                Condition::Different => (false, obs.condition_key()),
            };
            groups.entry(key).or_default().push(obs.score.value);
        }
        let mut same_register = BTreeMap::new();
        let mut different_register = BTreeMap::new();
        for ((is_same, key), values) in groups {
            let m = mean(&values);
            if is_same {
                same_register.insert(key, m);
            } else {
                different_register.insert(key, m);
            }
        }
        Ok(ConditionMeans {
            same_register,
            different_register,
        })
    }

    /// Every register must carry a same-register mean and every
    /// unordered register pair a different-register mean.
    fn validate(&self) -> Result<Vec<f64>> {
        let mut registers: Vec<&str> = self.same_register.keys().map(String::as_str).collect();
        for key in self.different_register.keys() {
            for part in key.split('-') {
                if !registers.contains(&part) {
                    return Err(Error::MissingCondition {
                        condition: format!("{part}-{part}"),
                    });
                }
            }
        }
        registers.sort_unstable();
        if registers.len() < 2 {
            return Err(Error::TooFewRegisters {
                needed: 2,
                got: registers.len(),
            });
        }
        let mut values: Vec<f64> = self.same_register.values().copied().collect();
        for (i, a) in registers.iter().enumerate() {
            for b in &registers[i + 1..] {
                let key = condition_key(a, b);
                match self.different_register.get(&key) {
                    Some(v) => values.push(*v),
                    None => return Err(Error::MissingCondition { condition: key }),
                }
            }
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThresholdMethod {
    T1,
    T2,
}

impl std::fmt::Display for ThresholdMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ThresholdMethod::T1 => "T1",
            ThresholdMethod::T2 => "T2",
        })
    }
}

impl std::str::FromStr for ThresholdMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T1" | "t1" => Ok(ThresholdMethod::T1),
            "T2" | "t2" => Ok(ThresholdMethod::T2),
            _ => Err(Error::Config {
                message: format!("unknown threshold method {s:?}: expected T1 or T2"),
            }),
        }
    }
}

/// A calibrated decision threshold. Meaningful only for the measure
/// and feature space it was calibrated with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdModel {
    pub measure: MeasureId,
    pub space_id: String,
    pub method: ThresholdMethod,
    pub value: f64,
}

/// T1: the unweighted mean of all condition means (k(k+1)/2 values for
/// k registers).
pub fn threshold_t1(
    means: &ConditionMeans,
    measure: MeasureId,
    space_id: &str,
) -> Result<ThresholdModel> {
    let values = means.validate()?;
    Ok(ThresholdModel {
        measure,
        space_id: space_id.to_string(),
        method: ThresholdMethod::T1,
        value: mean(&values),
    })
}

/// T2: halfway between the least homogeneous same-register mean and
/// the most similar different-register mean.
pub fn threshold_t2(
    means: &ConditionMeans,
    measure: MeasureId,
    space_id: &str,
) -> Result<ThresholdModel> {
    means.validate()?;
    let min_same = means
        .same_register
        .values()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let max_different = means
        .different_register
        .values()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ThresholdModel {
        measure,
        space_id: space_id.to_string(),
        method: ThresholdMethod::T2,
        value: 0.5 * (min_same + max_different),
    })
}

pub fn threshold(
    method: ThresholdMethod,
    means: &ConditionMeans,
    measure: MeasureId,
    space_id: &str,
) -> Result<ThresholdModel> {
    match method {
        ThresholdMethod::T1 => threshold_t1(means, measure, space_id),
        ThresholdMethod::T2 => threshold_t2(means, measure, space_id),
    }
}

/// Same-register prediction: strictly above the threshold is positive;
/// a score exactly at the threshold predicts different-register.
pub fn predict_same_register(score: &SimilarityScore, threshold: &ThresholdModel) -> Result<bool> {
    if score.measure != threshold.measure {
        return Err(Error::MeasureMismatch {
            score: score.measure.to_string(),
            threshold: threshold.measure.to_string(),
        });
    }
    Ok(score.value > threshold.value)
}

/// Fraction of observations whose prediction matches the ground-truth
/// condition.
pub fn accuracy(observations: &[PairObservation], threshold: &ThresholdModel) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::EmptyObservations);
    }
    let mut correct = 0usize;
    for obs in observations {
        let predicted_same = predict_same_register(&obs.score, threshold)?;
        if predicted_same == (obs.condition == Condition::Same) {
            correct += 1;
        }
    }
    Ok(correct as f64 / observations.len() as f64)
}
