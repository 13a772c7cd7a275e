//! Persona catalog and per-persona persuasion profiles.
//!
//! The bundled catalog (`config/personas.json`) carries each persona's behavior
//! description, example replies, persuasion cues and the five Beta
//! parameterizations used by the withholding engine. A replacement file with
//! the same shape can be loaded at runtime.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Persona, PersonaKind, PersuasionLevel};

const BUNDLED_CATALOG: &str = include_str!("../config/personas.json");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("persona catalog is not valid json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("could not read persona catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("persona catalog is missing `{0}`")]
    MissingPersona(PersonaKind),
    #[error("persona `{persona}`: {reason}")]
    Invalid { persona: PersonaKind, reason: String },
}

/// Shape parameters of one Beta distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Self {
        BetaParams { alpha, beta }
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }
}

impl From<(f64, f64)> for BetaParams {
    fn from((alpha, beta): (f64, f64)) -> Self {
        BetaParams { alpha, beta }
    }
}

impl From<BetaParams> for (f64, f64) {
    fn from(p: BetaParams) -> Self {
        (p.alpha, p.beta)
    }
}

/// Default family: Beta(p, 6 - p) for effective level p.
pub fn default_beta_params(level: PersuasionLevel) -> BetaParams {
    let p = f64::from(level.get());
    BetaParams::new(p, 6.0 - p)
}

/// How a persona is persuaded, and how much it discloses at each level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersuasionProfile {
    pub persona: PersonaKind,
    pub cue_description: String,
    pub cue_examples: Vec<String>,
    /// Indexed by level - 1.
    pub beta_params: [BetaParams; 5],
    pub level_shift: i8,
}

impl PersuasionProfile {
    pub fn effective_level(&self, judged: PersuasionLevel) -> PersuasionLevel {
        PersuasionLevel::clamped(i64::from(judged.get()) + i64::from(self.level_shift))
    }

    pub fn params_for(&self, effective: PersuasionLevel) -> BetaParams {
        self.beta_params[usize::from(effective.get()) - 1]
    }

    fn validate(&self) -> Result<(), CatalogError> {
        let invalid = |reason: String| CatalogError::Invalid {
            persona: self.persona,
            reason,
        };
        if !(-1..=1).contains(&self.level_shift) {
            return Err(invalid(format!("level_shift {} outside [-1, 1]", self.level_shift)));
        }
        for (i, p) in self.beta_params.iter().enumerate() {
            if !(p.alpha > 0.0 && p.beta > 0.0 && p.alpha.is_finite() && p.beta.is_finite()) {
                return Err(invalid(format!("level {} has non-positive Beta parameters", i + 1)));
            }
        }
        for w in self.beta_params.windows(2) {
            if w[1].mean() < w[0].mean() {
                return Err(invalid("Beta means must be non-decreasing in level".into()));
            }
        }
        if self.cue_examples.is_empty() {
            return Err(invalid("no persuasion cue examples".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct CatalogEntry {
    description: String,
    example_responses: Vec<String>,
    cue_description: String,
    cue_examples: Vec<String>,
    #[serde(default)]
    level_shift: i8,
    #[serde(default)]
    beta_params: BTreeMap<String, BetaParams>,
}

/// All eight personas with their persuasion profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonaCatalog {
    entries: BTreeMap<PersonaKind, (Persona, PersuasionProfile)>,
}

impl PersonaCatalog {
    pub fn bundled() -> Self {
        PersonaCatalog::from_json(BUNDLED_CATALOG).expect("bundled persona catalog is valid")
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        PersonaCatalog::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let raw: BTreeMap<PersonaKind, CatalogEntry> = serde_json::from_str(text)?;
        let mut entries = BTreeMap::new();
        for kind in PersonaKind::ALL {
            let entry = raw.get(&kind).ok_or(CatalogError::MissingPersona(kind))?;
            if entry.description.trim().is_empty() || entry.example_responses.is_empty() {
                return Err(CatalogError::Invalid {
                    persona: kind,
                    reason: "description and at least one example response are required".into(),
                });
            }
            let mut beta_params = [BetaParams::new(1.0, 1.0); 5];
            for level in PersuasionLevel::all() {
                let idx = usize::from(level.get()) - 1;
                beta_params[idx] = entry
                    .beta_params
                    .get(&level.to_string())
                    .copied()
                    .unwrap_or_else(|| default_beta_params(level));
            }
            let profile = PersuasionProfile {
                persona: kind,
                cue_description: entry.cue_description.clone(),
                cue_examples: entry.cue_examples.clone(),
                beta_params,
                level_shift: entry.level_shift,
            };
            profile.validate()?;
            let persona = Persona {
                kind,
                description: entry.description.clone(),
                example_responses: entry.example_responses.clone(),
            };
            entries.insert(kind, (persona, profile));
        }
        Ok(PersonaCatalog { entries })
    }

    pub fn persona(&self, kind: PersonaKind) -> &Persona {
        &self.entries[&kind].0
    }

    pub fn profile(&self, kind: PersonaKind) -> &PersuasionProfile {
        &self.entries[&kind].1
    }

    pub fn profiles(&self) -> impl Iterator<Item = &PersuasionProfile> {
        self.entries.values().map(|(_, p)| p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_catalog_has_every_persona() {
        let catalog = PersonaCatalog::bundled();
        for kind in PersonaKind::ALL {
            let persona = catalog.persona(kind);
            assert!(!persona.description.is_empty());
            assert!(!persona.example_responses.is_empty());
            assert!(!catalog.profile(kind).cue_examples.is_empty());
        }
        assert_eq!(catalog.profiles().count(), 8);
    }

    #[test]
    fn bundled_table_content() {
        let catalog = PersonaCatalog::bundled();
        assert!(catalog
            .persona(PersonaKind::Anxious)
            .description
            .contains("Unsure if they should be doing the interview"));
        assert!(catalog
            .persona(PersonaKind::Adversarial)
            .example_responses[0]
            .contains("I'm not here to educate you."));
        assert!(catalog
            .profile(PersonaKind::Anxious)
            .cue_examples
            .iter()
            .any(|c| c == "I will be as fair as possible."));
        assert!(catalog.profile(PersonaKind::Avoidant).cue_examples.iter().any(|c| c == "Ah I see."));
    }

    #[test]
    fn persona_modifiers() {
        let catalog = PersonaCatalog::bundled();
        assert_eq!(catalog.profile(PersonaKind::Straightforward).level_shift, 1);
        assert_eq!(catalog.profile(PersonaKind::Dominating).level_shift, 1);
        assert_eq!(catalog.profile(PersonaKind::Adversarial).level_shift, -1);
        let poor = catalog.profile(PersonaKind::PoorExplainer);
        for level in PersuasionLevel::all() {
            let p = f64::from(level.get());
            let params = poor.params_for(level);
            assert!((params.alpha - (2.0 + 0.2 * p)).abs() < 1e-12);
            assert!((params.beta - (4.0 - 0.2 * p)).abs() < 1e-12);
        }
        let anxious = catalog.profile(PersonaKind::Anxious);
        for level in PersuasionLevel::all() {
            assert_eq!(anxious.params_for(level), default_beta_params(level));
        }
    }

    #[test]
    fn effective_level_clamps() {
        let catalog = PersonaCatalog::bundled();
        let five = PersuasionLevel::new(5).unwrap();
        let one = PersuasionLevel::new(1).unwrap();
        assert_eq!(catalog.profile(PersonaKind::Dominating).effective_level(five).get(), 5);
        assert_eq!(catalog.profile(PersonaKind::Dominating).effective_level(one).get(), 2);
        assert_eq!(catalog.profile(PersonaKind::Adversarial).effective_level(one).get(), 1);
        assert_eq!(catalog.profile(PersonaKind::Adversarial).effective_level(five).get(), 4);
    }

    #[test]
    fn rejects_decreasing_means_and_missing_personas() {
        let mut raw: serde_json::Value = serde_json::from_str(BUNDLED_CATALOG).unwrap();
        raw["clueless"]["beta_params"]["5"] = serde_json::json!([1.0, 9.0]);
        assert!(matches!(
            PersonaCatalog::from_json(&raw.to_string()),
            Err(CatalogError::Invalid { persona: PersonaKind::Clueless, .. })
        ));

        let mut raw: serde_json::Value = serde_json::from_str(BUNDLED_CATALOG).unwrap();
        raw.as_object_mut().unwrap().remove("avoidant");
        assert!(matches!(
            PersonaCatalog::from_json(&raw.to_string()),
            Err(CatalogError::MissingPersona(PersonaKind::Avoidant))
        ));

        let mut raw: serde_json::Value = serde_json::from_str(BUNDLED_CATALOG).unwrap();
        raw["grumpy"] = raw["clueless"].clone();
        assert!(PersonaCatalog::from_json(&raw.to_string()).is_err());
    }
}
