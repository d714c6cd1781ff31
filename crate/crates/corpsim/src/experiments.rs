//! Pair-set construction and the full evaluation protocol: configured
//! experiments, grid sweeps, cross-validation, one-vs-one/one-vs-all
//! summaries, and distribution export.
//!
//! Every stage draws its randomness from a seed derived from the
//! experiment seed with [`crate::rng::derive_seed`] and a fixed label
//! (`train-samples/<register>`, `calibration-pairs`,
//! `eval-samples/<register>`, `eval-pairs`, `synth/<register>/<split>`,
//! `grid/<size>/<type>/<n>/<measure>`, `cv-partition/<register>`,
//! `cv/<fold>/...`), so a report is a pure function of its config and
//! identical runs are byte-identical, at any level of parallelism.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{
    accuracy, condition_key, mean, pairwise_sum, predict_same_register, threshold, threshold_t1,
    threshold_t2, Condition, ConditionMeans, PairObservation, ThresholdMethod, ThresholdModel,
};
use crate::corpus::{draw_samples, load_corpus, Corpus, RegisterLabel, Sample, SplitTag};
use crate::error::{Error, Result};
use crate::features::{
    feature_overlap, select_features, vectorize, FeatureKind, FeatureSpace, FeatureType,
    FrequencyVector, SourceTag,
};
use crate::lang::{LanguageProfile, ProfileRegistry};
use crate::measures::{score, MeasureId};
use crate::rng::{derive_seed, Rng};
use crate::synth::{generate_corpus, SyntheticSpec};

/// A corpus source: a newline-delimited UTF-8 file or a synthetic
/// generator spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorpusSource {
    Path(PathBuf),
    Synthetic { synthetic: SyntheticSpec },
}

/// One register of an experiment and where its splits come from.
/// `synthetic` is a shorthand that serves every split from one
/// generator spec (with split-specific token streams).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterConfig {
    pub name: RegisterLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<CorpusSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<CorpusSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<CorpusSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<SyntheticSpec>,
}

impl RegisterConfig {
    fn source_for(&self, split: SplitTag) -> Option<&CorpusSource> {
        match split {
            SplitTag::Train => self.train.as_ref(),
            SplitTag::Test => self.test.as_ref(),
            SplitTag::Validation => self.validation.as_ref(),
            SplitTag::Unsplit => None,
        }
    }
}

/// Language selector: an ISO code resolved against the bundled
/// registry, or an inline profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LanguageRef {
    Code(String),
    Profile(LanguageProfile),
}

fn default_n_features() -> usize {
    5000
}
fn default_measure() -> MeasureId {
    MeasureId::Spearman
}
fn default_threshold_method() -> ThresholdMethod {
    ThresholdMethod::T2
}
fn default_pairs_per_condition() -> usize {
    100
}
fn default_eval_split() -> SplitTag {
    SplitTag::Test
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub language: LanguageRef,
    pub registers: Vec<RegisterConfig>,
    pub sample_size_words: usize,
    #[serde(default = "default_n_features")]
    pub n_features: usize,
    /// Defaults to the language profile's best feature type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_type: Option<FeatureType>,
    #[serde(default = "default_measure")]
    pub measure: MeasureId,
    #[serde(default = "default_threshold_method")]
    pub threshold_method: ThresholdMethod,
    #[serde(default = "default_pairs_per_condition")]
    pub pairs_per_condition: usize,
    /// Which split evaluation pairs come from; calibration always uses
    /// the training split.
    #[serde(default = "default_eval_split")]
    pub eval_split: SplitTag,
    /// When set, feature selection uses this corpus instead of the
    /// pooled training data; calibration and evaluation are unchanged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_of_domain: Option<CorpusSource>,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(json: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(json).map_err(|e| Error::Config {
            message: format!("experiment config: {e}"),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn resolve_profile(&self) -> Result<LanguageProfile> {
        let profile = match &self.language {
            LanguageRef::Code(code) => ProfileRegistry::bundled().get(code)?.clone(),
            LanguageRef::Profile(profile) => profile.clone(),
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn effective_feature_type(&self, profile: &LanguageProfile) -> Result<FeatureType> {
        let ft = self.feature_type.unwrap_or(profile.default_feature);
        if profile.spaceless && ft.kind == FeatureKind::Word {
            return Err(Error::Config {
                message: format!(
                    "feature_type: word features are undefined for spaceless language {}",
                    profile.code
                ),
            });
        }
        Ok(ft)
    }

    pub fn validate(&self) -> Result<()> {
        if self.registers.len() < 2 {
            return Err(Error::Config {
                message: format!("registers: need at least 2, got {}", self.registers.len()),
            });
        }
        let mut seen = HashSet::new();
        for (i, reg) in self.registers.iter().enumerate() {
            if !seen.insert(reg.name.as_str().to_string()) {
                return Err(Error::Config {
                    message: format!("registers[{i}].name: duplicate register {}", reg.name),
                });
            }
            if reg.synthetic.is_none() {
                if reg.train.is_none() {
                    return Err(Error::Config {
                        message: format!("registers[{i}].train: missing corpus source"),
                    });
                }
                if reg.source_for(self.eval_split).is_none() {
                    return Err(Error::Config {
                        message: format!(
                            "registers[{i}].{}: missing corpus source for the evaluation split",
                            self.eval_split
                        ),
                    });
                }
            }
        }
        if self.sample_size_words == 0 {
            return Err(Error::Config {
                message: "sample_size_words: must be at least 1".into(),
            });
        }
        if self.n_features == 0 {
            return Err(Error::Config {
                message: "n_features: must be at least 1".into(),
            });
        }
        if self.pairs_per_condition == 0 {
            return Err(Error::Config {
                message: "pairs_per_condition: must be at least 1".into(),
            });
        }
        if self.eval_split == SplitTag::Unsplit {
            return Err(Error::Config {
                message: "eval_split: must be train, test, or validation".into(),
            });
        }
        let profile = self.resolve_profile()?;
        self.effective_feature_type(&profile)?;
        Ok(())
    }

    fn resolve_source(
        &self,
        source: &CorpusSource,
        profile: &LanguageProfile,
        register: &RegisterLabel,
        split: SplitTag,
    ) -> Result<Corpus> {
        let mut corpus = match source {
            CorpusSource::Path(path) => {
                load_corpus(path, profile, register.clone(), split)?
            }
            CorpusSource::Synthetic { synthetic } => {
                let stream = derive_seed(self.seed, &format!("synth/{register}/{split}"));
                generate_corpus(synthetic, register.clone(), split, stream)?
            }
        };
        corpus.language = profile.clone();
        Ok(corpus)
    }

    fn resolve_register_corpus(
        &self,
        reg: &RegisterConfig,
        profile: &LanguageProfile,
        split: SplitTag,
    ) -> Result<Corpus> {
        if let Some(spec) = &reg.synthetic {
            let stream = derive_seed(self.seed, &format!("synth/{}/{split}", reg.name));
            let mut corpus = generate_corpus(spec, reg.name.clone(), split, stream)?;
            corpus.language = profile.clone();
            return Ok(corpus);
        }
        match reg.source_for(split) {
            Some(source) => self.resolve_source(source, profile, &reg.name, split),
            None => Err(Error::MissingSplit {
                register: reg.name.to_string(),
                split: split.to_string(),
            }),
        }
    }
}

/// One selected pair: indices into the per-register sample lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSelection {
    pub register_a: RegisterLabel,
    pub index_a: usize,
    pub register_b: RegisterLabel,
    pub index_b: usize,
    pub condition: Condition,
}

/// Draw `pairs_per_condition` distinct unordered sample pairs for
/// every register condition (k same + k(k-1)/2 different), uniformly
/// without replacement. Same-register pairs never pair a sample with
/// itself and no unordered pair repeats.
pub fn build_pair_set(
    samples_by_register: &BTreeMap<RegisterLabel, Vec<Sample>>,
    pairs_per_condition: usize,
    seed: u64,
) -> Result<Vec<PairSelection>> {
    let sizes: BTreeMap<RegisterLabel, usize> = samples_by_register
        .iter()
        .map(|(label, samples)| (label.clone(), samples.len()))
        .collect();
    pair_indices(&sizes, pairs_per_condition, seed, false)
}

// Above this many candidate pairs the universe is no longer
// enumerated; distinct pairs are rejection-sampled instead. Both
// paths are deterministic for a given seed.
const ENUMERATION_LIMIT: usize = 1 << 20;

fn pair_indices(
    sizes: &BTreeMap<RegisterLabel, usize>,
    pairs_per_condition: usize,
    seed: u64,
    cap_at_available: bool,
) -> Result<Vec<PairSelection>> {
    let registers: Vec<&RegisterLabel> = sizes.keys().collect();
    let mut rng = Rng::new(seed);
    let mut selections = Vec::new();

    let mut conditions: Vec<(RegisterLabel, RegisterLabel, Condition)> = Vec::new();
    for r in &registers {
        conditions.push(((*r).clone(), (*r).clone(), Condition::Same));
    }
    for (i, a) in registers.iter().enumerate() {
        for b in &registers[i + 1..] {
            conditions.push(((*a).clone(), (*b).clone(), Condition::Different));
        }
    }

    for (reg_a, reg_b, condition) in conditions {
        let m_a = sizes[&reg_a];
        let m_b = sizes[&reg_b];
        let universe = match condition {
            Condition::Same => m_a * m_a.saturating_sub(1) / 2,
            Condition::Different => m_a * m_b,
        };
        let wanted = if cap_at_available {
            pairs_per_condition.min(universe)
        } else if universe < pairs_per_condition {
            return Err(Error::NotEnoughPairs {
                condition: condition_key(reg_a.as_str(), reg_b.as_str()),
                available: universe,
                requested: pairs_per_condition,
            });
        } else {
            pairs_per_condition
        };

        let chosen: Vec<(usize, usize)> = if universe <= ENUMERATION_LIMIT {
            let mut candidates: Vec<(usize, usize)> = match condition {
                Condition::Same => (0..m_a)
                    .flat_map(|i| (i + 1..m_a).map(move |j| (i, j)))
                    .collect(),
                Condition::Different => (0..m_a)
                    .flat_map(|i| (0..m_b).map(move |j| (i, j)))
                    .collect(),
            };
            rng.partial_shuffle(&mut candidates, wanted);
            candidates.truncate(wanted);
            candidates
        } else {
            let mut seen = HashSet::with_capacity(wanted * 2);
            let mut picked = Vec::with_capacity(wanted);
            while picked.len() < wanted {
                let (i, j) = match condition {
                    Condition::Same => {
                        let i = rng.below(m_a as u64) as usize;
                        let j = rng.below(m_a as u64) as usize;
                        if i == j {
                            continue;
                        }
                        (i.min(j), i.max(j))
                    }
                    Condition::Different => (
                        rng.below(m_a as u64) as usize,
                        rng.below(m_b as u64) as usize,
                    ),
                };
                if seen.insert((i, j)) {
                    picked.push((i, j));
                }
            }
            picked
        };

        for (i, j) in chosen {
            selections.push(PairSelection {
                register_a: reg_a.clone(),
                index_a: i,
                register_b: reg_b.clone(),
                index_b: j,
                condition,
            });
        }
    }
    Ok(selections)
}

fn vectorize_all(
    samples_by_register: &BTreeMap<RegisterLabel, Vec<Sample>>,
    space: &FeatureSpace,
) -> Result<BTreeMap<RegisterLabel, Vec<FrequencyVector>>> {
    samples_by_register
        .iter()
        .map(|(label, samples)| {
            let vectors: Result<Vec<FrequencyVector>> =
                samples.par_iter().map(|s| vectorize(s, space)).collect();
            Ok((label.clone(), vectors?))
        })
        .collect()
}

fn score_pairs(
    pairs: &[PairSelection],
    samples: &BTreeMap<RegisterLabel, Vec<Sample>>,
    vectors: &BTreeMap<RegisterLabel, Vec<FrequencyVector>>,
    measure: MeasureId,
) -> Result<Vec<PairObservation>> {
    pairs
        .par_iter()
        .map(|p| {
            let va = &vectors[&p.register_a][p.index_a];
            let vb = &vectors[&p.register_b][p.index_b];
            let s = score(measure, va, vb)?;
            Ok(PairObservation {
                sample_a: samples[&p.register_a][p.index_a].id.clone(),
                sample_b: samples[&p.register_b][p.index_b].id.clone(),
                register_a: p.register_a.to_string(),
                register_b: p.register_b.to_string(),
                condition: p.condition,
                score: s,
            })
        })
        .collect()
}

/// Per-condition summary of evaluation scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionStats {
    pub condition: Condition,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n-1 divisor; 0 for a single pair).
    pub stdev: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    /// Provenance of the feature space used for scoring.
    pub domain_tag: SourceTag,
    pub feature_space_id: String,
    /// Shared fraction between the in-domain and out-of-domain spaces;
    /// present only for out-of-domain runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_overlap: Option<f64>,
    /// Condition means measured on the calibration (training) pairs.
    pub calibration_means: ConditionMeans,
    pub threshold_t1: ThresholdModel,
    pub threshold_t2: ThresholdModel,
    /// The threshold actually used for predictions.
    pub threshold: ThresholdModel,
    pub condition_stats: BTreeMap<String, ConditionStats>,
    pub overall_accuracy: f64,
    /// Raw scored pairs, one per evaluation comparison.
    pub observations: Vec<PairObservation>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("report serializes");
        json.push('\n');
        json
    }

    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Config {
            message: format!("experiment report: {e}"),
        })
    }
}

fn condition_stats(
    observations: &[PairObservation],
    threshold: &ThresholdModel,
) -> Result<BTreeMap<String, ConditionStats>> {
    let mut grouped: BTreeMap<String, (Condition, Vec<f64>, usize)> = BTreeMap::new();
    for obs in observations {
        let entry = grouped
            .entry(obs.condition_key())
            .or_insert_with(|| (obs.condition, Vec::new(), 0));
        entry.1.push(obs.score.value);
        if predict_same_register(&obs.score, threshold)? == (obs.condition == Condition::Same) {
            entry.2 += 1;
        }
    }
    let mut stats = BTreeMap::new();
    for (key, (condition, values, correct)) in grouped {
        let m = mean(&values);
        let stdev = if values.len() < 2 {
            0.0
        } else {
            let devs: Vec<f64> = values.iter().map(|v| (v - m) * (v - m)).collect();
            (pairwise_sum(&devs) / (values.len() - 1) as f64).sqrt()
        };
        stats.insert(
            key,
            ConditionStats {
                condition,
                count: values.len(),
                mean: m,
                stdev,
                accuracy: correct as f64 / values.len() as f64,
            },
        );
    }
    Ok(stats)
}

struct PreparedExperiment {
    space: FeatureSpace,
    domain_tag: SourceTag,
    overlap: Option<f64>,
    train_samples: BTreeMap<RegisterLabel, Vec<Sample>>,
    train_vectors: BTreeMap<RegisterLabel, Vec<FrequencyVector>>,
}

fn pooled_corpus(corpora: &BTreeMap<RegisterLabel, Corpus>, profile: &LanguageProfile) -> Corpus {
    let mut documents = Vec::new();
    for corpus in corpora.values() {
        documents.extend(corpus.documents.iter().cloned());
    }
    Corpus {
        language: profile.clone(),
        register: RegisterLabel::new("pooled").expect("static label"),
        documents,
        split_tag: SplitTag::Train,
    }
}

fn prepare(
    config: &ExperimentConfig,
    profile: &LanguageProfile,
    ft: FeatureType,
) -> Result<PreparedExperiment> {
    let mut train_corpora = BTreeMap::new();
    for reg in &config.registers {
        let corpus = config.resolve_register_corpus(reg, profile, SplitTag::Train)?;
        train_corpora.insert(reg.name.clone(), corpus);
    }

    let pooled = pooled_corpus(&train_corpora, profile);
    let in_domain = select_features(&pooled, profile, ft, config.n_features, SourceTag::InDomain)?;
    let (space, domain_tag, overlap) = match &config.out_of_domain {
        None => (in_domain, SourceTag::InDomain, None),
        Some(source) => {
            let label = RegisterLabel::new("selection").expect("static label");
            let corpus = config.resolve_source(source, profile, &label, SplitTag::Train)?;
            let ood =
                select_features(&corpus, profile, ft, config.n_features, SourceTag::OutOfDomain)?;
            let overlap = feature_overlap(&in_domain, &ood)?;
            (ood, SourceTag::OutOfDomain, Some(overlap))
        }
    };

    let mut train_samples = BTreeMap::new();
    for (label, corpus) in &train_corpora {
        let sample_seed = derive_seed(config.seed, &format!("train-samples/{label}"));
        train_samples.insert(
            label.clone(),
            draw_samples(corpus, config.sample_size_words, sample_seed)?,
        );
    }
    let train_vectors = vectorize_all(&train_samples, &space)?;
    Ok(PreparedExperiment {
        space,
        domain_tag,
        overlap,
        train_samples,
        train_vectors,
    })
}

/// Threshold calibration outcome on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub feature_space_id: String,
    pub domain_tag: SourceTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_overlap: Option<f64>,
    pub condition_means: ConditionMeans,
    pub threshold_t1: ThresholdModel,
    pub threshold_t2: ThresholdModel,
    /// The threshold selected by the config's method.
    pub threshold: ThresholdModel,
}

impl CalibrationReport {
    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("calibration serializes");
        json.push('\n');
        json
    }
}

fn calibrate_prepared(
    config: &ExperimentConfig,
    prepared: &PreparedExperiment,
) -> Result<CalibrationReport> {
    let calib_pairs = build_pair_set(
        &prepared.train_samples,
        config.pairs_per_condition,
        derive_seed(config.seed, "calibration-pairs"),
    )?;
    let calib_obs = score_pairs(
        &calib_pairs,
        &prepared.train_samples,
        &prepared.train_vectors,
        config.measure,
    )?;
    let means = ConditionMeans::from_observations(&calib_obs)?;
    let t1 = threshold_t1(&means, config.measure, prepared.space.id())?;
    let t2 = threshold_t2(&means, config.measure, prepared.space.id())?;
    let active = match config.threshold_method {
        ThresholdMethod::T1 => t1.clone(),
        ThresholdMethod::T2 => t2.clone(),
    };
    Ok(CalibrationReport {
        feature_space_id: prepared.space.id().to_string(),
        domain_tag: prepared.domain_tag.clone(),
        feature_overlap: prepared.overlap,
        condition_means: means,
        threshold_t1: t1,
        threshold_t2: t2,
        threshold: active,
    })
}

/// Select features and calibrate the threshold on the training split,
/// without running an evaluation.
pub fn calibrate(config: &ExperimentConfig) -> Result<CalibrationReport> {
    config.validate()?;
    let profile = config.resolve_profile()?;
    let ft = config.effective_feature_type(&profile)?;
    let prepared = prepare(config, &profile, ft)?;
    calibrate_prepared(config, &prepared)
}

/// Run the full protocol: select features on the training split (or
/// the out-of-domain corpus), calibrate the threshold on training
/// pairs, then score and evaluate pairs from the evaluation split.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let profile = config.resolve_profile()?;
    let ft = config.effective_feature_type(&profile)?;
    let prepared = prepare(config, &profile, ft)?;
    let calibration = calibrate_prepared(config, &prepared)?;

    let mut eval_samples = BTreeMap::new();
    for reg in &config.registers {
        let corpus = config.resolve_register_corpus(reg, &profile, config.eval_split)?;
        let sample_seed = derive_seed(config.seed, &format!("eval-samples/{}", reg.name));
        eval_samples.insert(
            reg.name.clone(),
            draw_samples(&corpus, config.sample_size_words, sample_seed)?,
        );
    }
    let eval_vectors = vectorize_all(&eval_samples, &prepared.space)?;
    let eval_pairs = build_pair_set(
        &eval_samples,
        config.pairs_per_condition,
        derive_seed(config.seed, "eval-pairs"),
    )?;
    let observations = score_pairs(&eval_pairs, &eval_samples, &eval_vectors, config.measure)?;

    let overall_accuracy = accuracy(&observations, &calibration.threshold)?;
    let condition_stats = condition_stats(&observations, &calibration.threshold)?;

    Ok(ExperimentReport {
        config: config.clone(),
        domain_tag: calibration.domain_tag,
        feature_space_id: calibration.feature_space_id,
        feature_overlap: calibration.feature_overlap,
        calibration_means: calibration.condition_means,
        threshold_t1: calibration.threshold_t1,
        threshold_t2: calibration.threshold_t2,
        threshold: calibration.threshold,
        condition_stats,
        overall_accuracy,
        observations,
    })
}

/// One cell of a grid sweep. Failed cells record the error without
/// aborting the rest of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub sample_size_words: usize,
    pub feature_type: FeatureType,
    pub n_features: usize,
    pub measure: MeasureId,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub overall_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub cells: Vec<GridCell>,
}

impl GridReport {
    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("grid report serializes");
        json.push('\n');
        json
    }

    /// Tidy CSV: one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "sample_size_words,feature_type,n_features,measure,overall_accuracy,error\n",
        );
        for cell in &self.cells {
            let accuracy = cell
                .overall_accuracy
                .map(|a| a.to_string())
                .unwrap_or_default();
            let error = cell.error.as_deref().unwrap_or("");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                cell.sample_size_words,
                cell.feature_type,
                cell.n_features,
                cell.measure,
                accuracy,
                error.replace(',', ";"),
            );
        }
        out
    }
}

/// Expand a base config over grid dimensions. Empty dimension lists
/// keep the base value. Each cell gets a seed derived from the base
/// seed and the cell key, so cells are independent and reproducible.
pub fn expand_grid(
    base: &ExperimentConfig,
    sizes: &[usize],
    feature_types: &[FeatureType],
    n_features_list: &[usize],
    measures: &[MeasureId],
) -> Vec<ExperimentConfig> {
    let sizes = if sizes.is_empty() {
        vec![base.sample_size_words]
    } else {
        sizes.to_vec()
    };
    let feature_types = if feature_types.is_empty() {
        vec![base.feature_type.unwrap_or(FeatureType::char(4).unwrap())]
    } else {
        feature_types.to_vec()
    };
    let n_features_list = if n_features_list.is_empty() {
        vec![base.n_features]
    } else {
        n_features_list.to_vec()
    };
    let measures = if measures.is_empty() {
        vec![base.measure]
    } else {
        measures.to_vec()
    };

    let mut configs = Vec::new();
    for &size in &sizes {
        for &ft in &feature_types {
            for &nf in &n_features_list {
                for &measure in &measures {
                    let mut cell = base.clone();
                    cell.sample_size_words = size;
                    cell.feature_type = Some(ft);
                    cell.n_features = nf;
                    cell.measure = measure;
                    cell.seed =
                        derive_seed(base.seed, &format!("grid/{size}/{ft}/{nf}/{measure}"));
                    configs.push(cell);
                }
            }
        }
    }
    configs
}

/// Run each config independently; per-cell errors are recorded in the
/// report instead of aborting the grid.
pub fn run_grid(configs: &[ExperimentConfig]) -> GridReport {
    let cells: Vec<GridCell> = configs
        .par_iter()
        .map(|config| {
            let feature_type = config
                .feature_type
                .unwrap_or(FeatureType::char(4).unwrap());
            let mut cell = GridCell {
                sample_size_words: config.sample_size_words,
                feature_type,
                n_features: config.n_features,
                measure: config.measure,
                seed: config.seed,
                overall_accuracy: None,
                threshold_value: None,
                error: None,
            };
            match run_experiment(config) {
                Ok(report) => {
                    cell.overall_accuracy = Some(report.overall_accuracy);
                    cell.threshold_value = Some(report.threshold.value);
                }
                Err(e) => cell.error = Some(format!("{}: {e}", e.kind())),
            }
            cell
        })
        .collect();
    GridReport { cells }
}

/// K-fold cross-validation on the training split. Samples (not pairs)
/// are partitioned per register; fold i is evaluated with a threshold
/// calibrated on pairs drawn entirely within the other folds. Feature
/// selection happens once on the full data. Pair counts per condition
/// are capped at availability, since folds can be small.
pub fn cross_validate(config: &ExperimentConfig, folds: usize) -> Result<Vec<f64>> {
    config.validate()?;
    if folds < 2 {
        return Err(Error::Config {
            message: format!("folds: need at least 2, got {folds}"),
        });
    }
    let profile = config.resolve_profile()?;
    let ft = config.effective_feature_type(&profile)?;
    let prepared = prepare(config, &profile, ft)?;

    // Every fold needs at least two samples per register so that
    // same-register pairs exist on both the calibration and the
    // evaluation side.
    for samples in prepared.train_samples.values() {
        if samples.len() < 2 * folds {
            return Err(Error::InsufficientData {
                available: samples.len(),
                requested: 2 * folds,
            });
        }
    }

    // Per-register fold assignment: shuffled indices cut into
    // near-equal contiguous runs.
    let mut fold_members: Vec<BTreeMap<RegisterLabel, Vec<usize>>> =
        vec![BTreeMap::new(); folds];
    for (label, samples) in &prepared.train_samples {
        let mut order: Vec<usize> = (0..samples.len()).collect();
        Rng::new(derive_seed(config.seed, &format!("cv-partition/{label}"))).shuffle(&mut order);
        let base = samples.len() / folds;
        let extra = samples.len() % folds;
        let mut cursor = 0usize;
        for (i, members) in fold_members.iter_mut().enumerate() {
            let len = base + usize::from(i < extra);
            members.insert(label.clone(), order[cursor..cursor + len].to_vec());
            cursor += len;
        }
    }

    let mut accuracies = Vec::with_capacity(folds);
    for fold in 0..folds {
        let mut calib_members: BTreeMap<RegisterLabel, Vec<usize>> = BTreeMap::new();
        for (i, members) in fold_members.iter().enumerate() {
            if i == fold {
                continue;
            }
            for (label, indices) in members {
                calib_members
                    .entry(label.clone())
                    .or_default()
                    .extend(indices.iter().copied());
            }
        }
        let eval_members = &fold_members[fold];

        let calib_obs = score_member_pairs(
            &calib_members,
            &prepared,
            config,
            derive_seed(config.seed, &format!("cv/{fold}/calibration-pairs")),
        )?;
        let means = ConditionMeans::from_observations(&calib_obs)?;
        let model = threshold(
            config.threshold_method,
            &means,
            config.measure,
            prepared.space.id(),
        )?;
        let eval_obs = score_member_pairs(
            eval_members,
            &prepared,
            config,
            derive_seed(config.seed, &format!("cv/{fold}/eval-pairs")),
        )?;
        accuracies.push(accuracy(&eval_obs, &model)?);
    }
    Ok(accuracies)
}

fn score_member_pairs(
    members: &BTreeMap<RegisterLabel, Vec<usize>>,
    prepared: &PreparedExperiment,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<PairObservation>> {
    let sizes: BTreeMap<RegisterLabel, usize> = members
        .iter()
        .map(|(label, indices)| (label.clone(), indices.len()))
        .collect();
    let local_pairs = pair_indices(&sizes, config.pairs_per_condition, seed, true)?;
    let pairs: Vec<PairSelection> = local_pairs
        .into_iter()
        .map(|mut p| {
            p.index_a = members[&p.register_a][p.index_a];
            p.index_b = members[&p.register_b][p.index_b];
            p
        })
        .collect();
    score_pairs(
        &pairs,
        &prepared.train_samples,
        &prepared.train_vectors,
        config.measure,
    )
}

/// Accuracy over the evaluation pairs that involve `target`, with the
/// single threshold calibrated over all conditions. Target-target
/// pairs count as same-register, target-other pairs as
/// different-register.
pub fn one_vs_all(config: &ExperimentConfig, target: &RegisterLabel) -> Result<f64> {
    if config.registers.len() < 3 {
        return Err(Error::TooFewRegisters {
            needed: 3,
            got: config.registers.len(),
        });
    }
    if !config.registers.iter().any(|r| &r.name == target) {
        return Err(Error::UnknownRegister {
            label: target.to_string(),
        });
    }
    let report = run_experiment(config)?;
    one_vs_all_from_report(&report, target)
}

fn one_vs_all_from_report(report: &ExperimentReport, target: &RegisterLabel) -> Result<f64> {
    let subset: Vec<PairObservation> = report
        .observations
        .iter()
        .filter(|o| o.register_a == target.as_str() || o.register_b == target.as_str())
        .cloned()
        .collect();
    accuracy(&subset, &report.threshold)
}

/// One-vs-one and one-vs-all accuracies for every register, computed
/// from a single run with one shared threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegisterMatrixReport {
    pub threshold: ThresholdModel,
    pub overall_accuracy: f64,
    /// `A-B` -> accuracy over pairs drawn within registers {A, B}.
    pub one_vs_one: BTreeMap<String, f64>,
    /// `A` -> accuracy over pairs involving A.
    pub one_vs_all: BTreeMap<String, f64>,
}

impl RegisterMatrixReport {
    pub fn to_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(self).expect("matrix report serializes");
        json.push('\n');
        json
    }
}

pub fn register_matrix(config: &ExperimentConfig) -> Result<(ExperimentReport, RegisterMatrixReport)> {
    if config.registers.len() < 3 {
        return Err(Error::TooFewRegisters {
            needed: 3,
            got: config.registers.len(),
        });
    }
    let report = run_experiment(config)?;
    let registers: Vec<RegisterLabel> = config.registers.iter().map(|r| r.name.clone()).collect();

    let mut one_vs_one = BTreeMap::new();
    for (i, a) in registers.iter().enumerate() {
        for b in &registers[i + 1..] {
            let subset: Vec<PairObservation> = report
                .observations
                .iter()
                .filter(|o| {
                    let in_pair = |r: &str| r == a.as_str() || r == b.as_str();
                    in_pair(&o.register_a) && in_pair(&o.register_b)
                })
                .cloned()
                .collect();
            one_vs_one.insert(
                condition_key(a.as_str(), b.as_str()),
                accuracy(&subset, &report.threshold)?,
            );
        }
    }

    let mut one_vs_all = BTreeMap::new();
    for register in &registers {
        one_vs_all.insert(
            register.to_string(),
            one_vs_all_from_report(&report, register)?,
        );
    }

    let matrix = RegisterMatrixReport {
        threshold: report.threshold.clone(),
        overall_accuracy: report.overall_accuracy,
        one_vs_one,
        one_vs_all,
    };
    Ok((report, matrix))
}

/// Tidy CSV of a report's raw scores: one row per pair, suitable for
/// violin plots.
pub fn distributions_csv(report: &ExperimentReport) -> Result<String> {
    if report.observations.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = String::from("condition,register_a,register_b,score,domain_tag\n");
    for obs in &report.observations {
        let condition = match obs.condition {
            Condition::Same => "same",
            Condition::Different => "different",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            condition, obs.register_a, obs.register_b, obs.score.value, report.domain_tag
        );
    }
    Ok(out)
}

/// Write [`distributions_csv`] to a file.
pub fn export_distributions(report: &ExperimentReport, path: &Path) -> Result<()> {
    let csv = distributions_csv(report)?;
    std::fs::write(path, csv).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
