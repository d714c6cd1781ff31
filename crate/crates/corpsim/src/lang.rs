//! Language profiles: per-language configuration for normalization and
//! default feature choice, plus the bundled 39-language registry.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureType};

/// Per-language configuration.
///
/// `spaceless` languages have all whitespace removed during
/// normalization, which normalizes divergent word-segmentation
/// conventions; word features are undefined for them, so the default
/// feature type must be character-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageProfile {
    /// ISO-639-3 code.
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morphology: Option<String>,
    pub default_feature: FeatureType,
    pub spaceless: bool,
}

impl LanguageProfile {
    /// A minimal profile for ad-hoc use: not spaceless, defaulting to
    /// character 4-grams.
    pub fn custom(code: &str, spaceless: bool, default_feature: FeatureType) -> Result<Self> {
        let profile = LanguageProfile {
            code: code.to_string(),
            name: None,
            family: None,
            script: None,
            morphology: None,
            default_feature,
            spaceless,
        };
        profile.validate()?;
        Ok(profile)
    }

    /// Spaceless profiles must default to a character feature type:
    /// word tokenization is undefined after space removal.
    pub fn validate(&self) -> Result<()> {
        if self.code.is_empty() {
            return Err(Error::InvalidProfile {
                code: self.code.clone(),
                message: "empty language code".into(),
            });
        }
        if self.spaceless && self.default_feature.kind != FeatureKind::Char {
            return Err(Error::InvalidProfile {
                code: self.code.clone(),
                message: "spaceless languages require a character default feature".into(),
            });
        }
        Ok(())
    }
}

const BUNDLED_PROFILES: &str = include_str!("../assets/language_profiles.json");

/// Registry mapping ISO codes to language profiles. The bundled
/// registry covers 39 languages; user registries can be loaded from
/// JSON files of the same shape.
#[derive(Debug, Clone)]
pub struct ProfileRegistry {
    profiles: BTreeMap<String, LanguageProfile>,
}

impl ProfileRegistry {
    /// The registry shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_json(BUNDLED_PROFILES).expect("bundled registry is valid")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let list: Vec<LanguageProfile> = serde_json::from_str(json).map_err(|e| Error::Config {
            message: format!("profile registry: {e}"),
        })?;
        let mut profiles = BTreeMap::new();
        for profile in list {
            profile.validate()?;
            profiles.insert(profile.code.clone(), profile);
        }
        Ok(ProfileRegistry { profiles })
    }

    pub fn get(&self, code: &str) -> Result<&LanguageProfile> {
        self.profiles.get(code).ok_or_else(|| Error::UnknownLanguage {
            code: code.to_string(),
        })
    }

    pub fn codes(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}
