//! Domain types shared by the game engine, the corpus pipeline and the service.
//!
//! Everything here is a plain value type. `GameState` is the only type that is
//! mutated, and only by the engine that owns a single session.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ordinal identifier of an information item within one scenario (1-based).
pub type ItemId = u32;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("persuasion level {0} is outside 1..=5")]
    LevelOutOfRange(i64),
    #[error("unknown persona kind `{0}`")]
    UnknownPersona(String),
    #[error("unknown ablation mode `{0}`")]
    UnknownAblation(String),
    #[error("invalid scenario `{id}`: {reason}")]
    InvalidScenario { id: String, reason: String },
    #[error("outline objective {objective} leaks information item #{item}")]
    Leakage { objective: usize, item: ItemId },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed json in {path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// One atomic factual statement the source knows before the interview.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoItem {
    pub id: ItemId,
    pub text: String,
}

/// The interviewer's pre-interview notes. Hidden from scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveOutline {
    pub source_bio: String,
    pub context: String,
    pub objectives: Vec<String>,
}

/// The eight source archetypes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PersonaKind {
    Anxious,
    Avoidant,
    Adversarial,
    Defensive,
    Straightforward,
    PoorExplainer,
    Dominating,
    Clueless,
}

impl PersonaKind {
    pub const ALL: [PersonaKind; 8] = [
        PersonaKind::Anxious,
        PersonaKind::Avoidant,
        PersonaKind::Adversarial,
        PersonaKind::Defensive,
        PersonaKind::Straightforward,
        PersonaKind::PoorExplainer,
        PersonaKind::Dominating,
        PersonaKind::Clueless,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PersonaKind::Anxious => "anxious",
            PersonaKind::Avoidant => "avoidant",
            PersonaKind::Adversarial => "adversarial",
            PersonaKind::Defensive => "defensive",
            PersonaKind::Straightforward => "straightforward",
            PersonaKind::PoorExplainer => "poor_explainer",
            PersonaKind::Dominating => "dominating",
            PersonaKind::Clueless => "clueless",
        }
    }

    pub fn display_name(&self) -> &'static str {
        match self {
            PersonaKind::Anxious => "Anxious",
            PersonaKind::Avoidant => "Avoidant",
            PersonaKind::Adversarial => "Adversarial",
            PersonaKind::Defensive => "Defensive",
            PersonaKind::Straightforward => "Straightforward",
            PersonaKind::PoorExplainer => "Poor Explainer",
            PersonaKind::Dominating => "Dominating",
            PersonaKind::Clueless => "Clueless",
        }
    }
}

impl fmt::Display for PersonaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PersonaKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        PersonaKind::ALL
            .into_iter()
            .find(|k| k.as_str().replace('_', "") == key)
            .ok_or_else(|| DomainError::UnknownPersona(s.to_string()))
    }
}

/// A source persona: behavior description plus example replies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub kind: PersonaKind,
    pub description: String,
    pub example_responses: Vec<String>,
}

/// Judged comfort/persuasion of the source, 1 (guarded) to 5 (fully persuaded).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct PersuasionLevel(u8);

impl PersuasionLevel {
    pub const MIN: PersuasionLevel = PersuasionLevel(1);
    pub const MAX: PersuasionLevel = PersuasionLevel(5);

    pub fn new(value: i64) -> Result<Self, DomainError> {
        if (1..=5).contains(&value) {
            Ok(PersuasionLevel(value as u8))
        } else {
            Err(DomainError::LevelOutOfRange(value))
        }
    }

    /// Saturating constructor used for level shifts.
    pub fn clamped(value: i64) -> Self {
        PersuasionLevel(value.clamp(1, 5) as u8)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = PersuasionLevel> {
        (1..=5).map(PersuasionLevel)
    }
}

impl TryFrom<i64> for PersuasionLevel {
    type Error = DomainError;

    fn try_from(value: i64) -> Result<Self, Self::Error> {
        PersuasionLevel::new(value)
    }
}

impl From<PersuasionLevel> for u8 {
    fn from(level: PersuasionLevel) -> u8 {
        level.0
    }
}

impl fmt::Display for PersuasionLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which mechanics of the source are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationMode {
    Full,
    NoPersuasion,
    NoWithholding,
}

impl AblationMode {
    pub const ALL: [AblationMode; 3] = [
        AblationMode::Full,
        AblationMode::NoPersuasion,
        AblationMode::NoWithholding,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AblationMode::Full => "full",
            AblationMode::NoPersuasion => "no-persuasion",
            AblationMode::NoWithholding => "no-withholding",
        }
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AblationMode {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "full" => Ok(AblationMode::Full),
            "no-persuasion" => Ok(AblationMode::NoPersuasion),
            "no-withholding" => Ok(AblationMode::NoWithholding),
            _ => Err(DomainError::UnknownAblation(s.to_string())),
        }
    }
}

/// One completed question/answer exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub index: u32,
    pub question: String,
    pub answer: String,
    /// Items the retriever judged relevant (before withholding).
    pub relevant_ids: Vec<ItemId>,
    pub disclosed_ids: BTreeSet<ItemId>,
    pub judged_level: PersuasionLevel,
    /// Level after the persona's shift; indexes the Beta table.
    pub effective_level: PersuasionLevel,
    /// Beta draw; `None` when no draw was consumed.
    pub draw_fraction: Option<f64>,
    #[serde(default)]
    pub judge_fallback: bool,
    #[serde(default)]
    pub retriever_failed: bool,
}

/// Everything needed to play one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub outline: ObjectiveOutline,
    pub items: Vec<InfoItem>,
    pub persona: PersonaKind,
    pub max_turns: u32,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), DomainError> {
        let invalid = |reason: String| DomainError::InvalidScenario {
            id: self.id.clone(),
            reason,
        };
        if self.max_turns == 0 {
            return Err(invalid("max_turns must be at least 1".into()));
        }
        if self.items.is_empty() {
            return Err(invalid("scenario has no information items".into()));
        }
        for (pos, item) in self.items.iter().enumerate() {
            if item.id as usize != pos + 1 {
                return Err(invalid(format!(
                    "item ids must be contiguous from 1; found {} at position {}",
                    item.id,
                    pos + 1
                )));
            }
            if item.text.trim().is_empty() {
                return Err(invalid(format!("item #{} has empty text", item.id)));
            }
        }
        if self.outline.objectives.is_empty() {
            return Err(invalid("outline has no objectives".into()));
        }
        if let Some((objective, item)) = find_leakage(&self.outline, &self.items) {
            return Err(DomainError::Leakage { objective, item });
        }
        Ok(())
    }

    pub fn item_ids(&self) -> BTreeSet<ItemId> {
        self.items.iter().map(|i| i.id).collect()
    }

    pub fn load(path: &Path) -> Result<Self, DomainError> {
        let text = std::fs::read_to_string(path).map_err(|source| DomainError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let scenario: Scenario = serde_json::from_str(&text).map_err(|source| DomainError::Json {
            path: path.display().to_string(),
            source,
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    /// Loads every `*.json` scenario in a directory, sorted by file name.
    pub fn load_dir(dir: &Path) -> Result<Vec<Self>, DomainError> {
        let io = |source| DomainError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        paths.sort();
        paths.iter().map(|p| Scenario::load(p)).collect()
    }

    /// The eight hand-written scenarios shipped with the crate, one per
    /// persona, in file-name order.
    pub fn bundled() -> Vec<Self> {
        BUNDLED_SCENARIOS
            .iter()
            .map(|(name, text)| {
                let s: Scenario = serde_json::from_str(text).unwrap_or_else(|e| panic!("bundled scenario {name}: {e}"));
                s.validate().unwrap_or_else(|e| panic!("bundled scenario {name}: {e}"));
                s
            })
            .collect()
    }
}

const BUNDLED_SCENARIOS: [(&str, &str); 8] = [
    ("bridge-overrun", include_str!("../scenarios/bridge-overrun.json")),
    ("factory-layoffs", include_str!("../scenarios/factory-layoffs.json")),
    ("housing-code", include_str!("../scenarios/housing-code.json")),
    ("museum-theft", include_str!("../scenarios/museum-theft.json")),
    ("school-closures", include_str!("../scenarios/school-closures.json")),
    ("startup-funding", include_str!("../scenarios/startup-funding.json")),
    ("vaccine-rollout", include_str!("../scenarios/vaccine-rollout.json")),
    ("water-contamination", include_str!("../scenarios/water-contamination.json")),
];

/// Minimum shared run of words that counts as leakage.
pub const LEAKAGE_NGRAM: usize = 8;

fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
        .collect()
}

/// Returns the first (objective index, item id) pair where the objective
/// contains the item verbatim or shares a run of [`LEAKAGE_NGRAM`] words with it.
pub fn find_leakage(outline: &ObjectiveOutline, items: &[InfoItem]) -> Option<(usize, ItemId)> {
    for (oi, objective) in outline.objectives.iter().enumerate() {
        let obj_words = words(objective);
        let obj_joined = format!(" {} ", obj_words.join(" "));
        for item in items {
            let item_words = words(&item.text);
            if item_words.is_empty() {
                continue;
            }
            if obj_joined.contains(&format!(" {} ", item_words.join(" "))) {
                return Some((oi + 1, item.id));
            }
            if item_words.len() >= LEAKAGE_NGRAM && obj_words.len() >= LEAKAGE_NGRAM {
                let grams: BTreeSet<&[String]> = item_words.windows(LEAKAGE_NGRAM).collect();
                if obj_words.windows(LEAKAGE_NGRAM).any(|w| grams.contains(w)) {
                    return Some((oi + 1, item.id));
                }
            }
        }
    }
    None
}

/// Mutable state of one game in progress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub turns: Vec<Turn>,
    pub used: BTreeSet<ItemId>,
    pub reward: u32,
    pub rng_seed: u64,
    pub rng_label: String,
    /// Position of the withholding stream in 32-bit ChaCha words.
    pub rng_position: u64,
}

impl GameState {
    pub fn new(rng_seed: u64, rng_label: impl Into<String>) -> Self {
        GameState {
            turns: Vec::new(),
            used: BTreeSet::new(),
            reward: 0,
            rng_seed,
            rng_label: rng_label.into(),
            rng_position: 0,
        }
    }
}

/// Counts of agent invocations during one game, by role.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentCalls {
    pub interviewer: u32,
    pub source: u32,
    pub judge: u32,
    pub retriever: u32,
}

/// Token usage summed over all agent calls that reported it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenTotals {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Backend identifiers for the four agent roles of a game.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendIds {
    pub interviewer: String,
    pub source: String,
    pub judge: String,
    pub retriever: String,
}

/// Full audit of one simulated game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario_id: String,
    pub persona: PersonaKind,
    pub ablation: AblationMode,
    pub backends: BackendIds,
    pub seed: u64,
    pub item_count: u32,
    pub max_turns: u32,
    pub state: GameState,
    pub reward_percent: f64,
    pub agent_calls: AgentCalls,
    pub tokens: TokenTotals,
    /// Prompt template name -> content hash.
    pub prompt_hashes: BTreeMap<String, String>,
    /// Set when an agent failure stopped the game early.
    pub aborted: Option<String>,
    pub started_at: String,
    pub finished_at: String,
}

/// `100 * reward / item_count`.
pub fn reward_percent(reward: u32, item_count: usize) -> f64 {
    if item_count == 0 {
        return 0.0;
    }
    100.0 * f64::from(reward) / item_count as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn persona_kinds_round_trip_through_json() {
        for kind in PersonaKind::ALL {
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(serde_json::from_str::<PersonaKind>(&json).unwrap(), kind);
            assert_eq!(kind.as_str().parse::<PersonaKind>().unwrap(), kind);
            assert_eq!(kind.display_name().parse::<PersonaKind>().unwrap(), kind);
        }
        assert!(serde_json::from_str::<PersonaKind>("\"grumpy\"").is_err());
        assert!("grumpy".parse::<PersonaKind>().is_err());
    }

    #[test]
    fn persuasion_level_rejects_out_of_range() {
        assert!(PersuasionLevel::new(0).is_err());
        assert!(PersuasionLevel::new(6).is_err());
        assert_eq!(PersuasionLevel::new(3).unwrap().get(), 3);
        assert!(serde_json::from_str::<PersuasionLevel>("0").is_err());
        assert!(serde_json::from_str::<PersuasionLevel>("6").is_err());
        assert_eq!(serde_json::from_str::<PersuasionLevel>("5").unwrap().get(), 5);
        assert_eq!(PersuasionLevel::clamped(9).get(), 5);
        assert_eq!(PersuasionLevel::clamped(-2).get(), 1);
    }

    fn scenario() -> Scenario {
        Scenario {
            id: "s".into(),
            outline: ObjectiveOutline {
                source_bio: "bio".into(),
                context: "ctx".into(),
                objectives: vec!["Presidential legacy".into()],
            },
            items: vec![
                InfoItem { id: 1, text: "a fact".into() },
                InfoItem { id: 2, text: "another fact".into() },
            ],
            persona: PersonaKind::Anxious,
            max_turns: 3,
        }
    }

    #[test]
    fn scenario_validation() {
        assert!(scenario().validate().is_ok());

        let mut gap = scenario();
        gap.items[1].id = 3;
        assert!(gap.validate().is_err());

        let mut zero = scenario();
        zero.max_turns = 0;
        assert!(zero.validate().is_err());

        let mut empty = scenario();
        empty.items.clear();
        assert!(empty.validate().is_err());

        let mut leaky = scenario();
        leaky.outline.objectives.push("Ask about Another Fact.".into());
        assert!(matches!(leaky.validate(), Err(DomainError::Leakage { objective: 2, item: 2 })));
    }

    #[test]
    fn leakage_detects_long_shared_runs() {
        let items = vec![InfoItem {
            id: 1,
            text: "The economy is growing above trend pace, with job growth of 150,000 a month".into(),
        }];
        let mut outline = scenario().outline;
        outline.objectives = vec!["Ask whether the economy is growing above trend pace with job growth".into()];
        assert_eq!(find_leakage(&outline, &items), Some((1, 1)));
        outline.objectives = vec!["Economic growth outlook".into()];
        assert_eq!(find_leakage(&outline, &items), None);
    }

    #[test]
    fn ablation_parses_cli_spellings() {
        assert_eq!("no-persuasion".parse::<AblationMode>().unwrap(), AblationMode::NoPersuasion);
        assert_eq!("no_withholding".parse::<AblationMode>().unwrap(), AblationMode::NoWithholding);
        assert!("easy".parse::<AblationMode>().is_err());
    }

    #[test]
    fn reward_percent_arithmetic() {
        assert_eq!(reward_percent(5, 10), 50.0);
        assert_eq!(reward_percent(0, 10), 0.0);
        assert_eq!(reward_percent(10, 10), 100.0);
    }
}
