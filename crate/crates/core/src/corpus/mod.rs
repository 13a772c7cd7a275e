//! From raw transcript dumps to a filtered corpus of two-person interviews and
//! playable scenarios.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub mod derive;
pub mod filters;
pub mod ingest;
pub mod pipeline;
pub mod roles;

pub use derive::{derive_scenario, DeriveError};
pub use filters::{Reject, DEFAULT_KEYWORDS};
pub use pipeline::{read_corpus, run_pipeline, write_outputs, FilterReport, PipelineConfig, PipelineInputs, PipelineOutput};
pub use roles::assign_roles;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeakerRole {
    Interviewer,
    Source,
    /// Speaker outside the two-person core (e.g. a co-host reading an intro).
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub id: String,
    #[serde(default)]
    pub program: String,
    #[serde(default)]
    pub title: String,
    #[serde(default)]
    pub date: String,
    pub utterances: Vec<Utterance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub roles: Option<BTreeMap<String, SpeakerRole>>,
    /// Set when roles came from the tie rule.
    #[serde(default)]
    pub low_confidence: bool,
}

impl Transcript {
    pub fn new(id: impl Into<String>, utterances: Vec<(&str, &str)>) -> Self {
        Transcript {
            id: id.into(),
            program: String::new(),
            title: String::new(),
            date: String::new(),
            utterances: utterances
                .into_iter()
                .map(|(s, t)| Utterance {
                    speaker: s.to_string(),
                    text: t.to_string(),
                })
                .collect(),
            roles: None,
            low_confidence: false,
        }
    }

    pub fn role_of(&self, speaker: &str) -> Option<SpeakerRole> {
        self.roles.as_ref().and_then(|r| r.get(speaker).copied())
    }

    pub fn speaker_with(&self, role: SpeakerRole) -> Option<&str> {
        self.roles
            .as_ref()?
            .iter()
            .find(|(_, r)| **r == role)
            .map(|(s, _)| s.as_str())
    }

    /// `SPEAKER: text` lines.
    pub fn render_dialogue(&self) -> String {
        self.utterances
            .iter()
            .map(|u| format!("{}: {}", u.speaker, u.text))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
