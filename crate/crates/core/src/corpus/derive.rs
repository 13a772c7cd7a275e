//! Transcript → scenario: the source's utterances become information items,
//! the interviewer's become the outline.

use thiserror::Error;

use super::{SpeakerRole, Transcript};
use crate::agents::{chat_complete, Agent, AgentError, ChatMessage, PromptSet, TemplateError};
use crate::domain::{find_leakage, InfoItem, ObjectiveOutline, PersonaKind, Scenario};

/// Fewer items than this and the scenario is too thin to play.
pub const MIN_ITEMS: usize = 2;

#[derive(Debug, Error)]
pub enum DeriveError {
    #[error("{0}: roles not assigned")]
    NoRoles(String),
    #[error("{id}: summarizer failed: {error}")]
    Agent { id: String, error: AgentError },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{id}: only {found} information items")]
    TooThin { id: String, found: usize },
    #[error("{id}: outline has no objectives")]
    NoObjectives { id: String },
    #[error("{id}: objective {objective} leaks item #{item}")]
    Leakage { id: String, objective: usize, item: u32 },
}

/// `Information item #k: text` lines, renumbered from 1 in order.
pub fn parse_items(reply: &str) -> Vec<InfoItem> {
    reply
        .lines()
        .filter_map(|l| {
            let rest = l.trim().strip_prefix("Information item #")?;
            let (num, text) = rest.split_once(':')?;
            num.trim().parse::<u32>().ok()?;
            let text = text.trim();
            (!text.is_empty()).then(|| text.to_string())
        })
        .enumerate()
        .map(|(i, text)| InfoItem { id: i as u32 + 1, text })
        .collect()
}

/// `Source biography:`, `Interview context:` and `Objective k:` lines.
pub fn parse_outline(reply: &str) -> ObjectiveOutline {
    let mut outline = ObjectiveOutline {
        source_bio: String::new(),
        context: String::new(),
        objectives: Vec::new(),
    };
    for line in reply.lines().map(str::trim) {
        if let Some(v) = line.strip_prefix("Source biography:") {
            outline.source_bio = v.trim().to_string();
        } else if let Some(v) = line.strip_prefix("Interview context:") {
            outline.context = v.trim().to_string();
        } else if let Some(rest) = line.strip_prefix("Objective ") {
            if let Some((num, text)) = rest.split_once(':') {
                if num.trim().parse::<u32>().is_ok() && !text.trim().is_empty() {
                    outline.objectives.push(text.trim().to_string());
                }
            }
        }
    }
    outline
}

fn utterances_of(t: &Transcript, role: SpeakerRole) -> String {
    t.utterances
        .iter()
        .filter(|u| t.role_of(&u.speaker) == Some(role))
        .map(|u| u.text.as_str())
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn derive_scenario(
    t: &Transcript,
    summarizer: &dyn Agent,
    prompts: &PromptSet,
    persona: PersonaKind,
    max_turns: u32,
) -> Result<Scenario, DeriveError> {
    if t.roles.is_none() {
        return Err(DeriveError::NoRoles(t.id.clone()));
    }
    let agent_err = |error| DeriveError::Agent {
        id: t.id.clone(),
        error,
    };
    let items_prompt = prompts
        .get("summarize_items")?
        .render("user", &[("source_utterances", utterances_of(t, SpeakerRole::Source))])?;
    let items_system = prompts.get("summarize_items")?.render("system", &[])?;
    let reply = chat_complete(
        summarizer,
        &[ChatMessage::system(items_system), ChatMessage::user(items_prompt)],
    )
    .map_err(agent_err)?;
    let items = parse_items(&reply);
    if items.len() < MIN_ITEMS {
        return Err(DeriveError::TooThin {
            id: t.id.clone(),
            found: items.len(),
        });
    }

    let outline_prompt = prompts.get("summarize_outline")?.render(
        "user",
        &[("interviewer_utterances", utterances_of(t, SpeakerRole::Interviewer))],
    )?;
    let outline_system = prompts.get("summarize_outline")?.render("system", &[])?;
    let reply = chat_complete(
        summarizer,
        &[ChatMessage::system(outline_system), ChatMessage::user(outline_prompt)],
    )
    .map_err(agent_err)?;
    let outline = parse_outline(&reply);
    if outline.objectives.is_empty() {
        return Err(DeriveError::NoObjectives { id: t.id.clone() });
    }
    if let Some((objective, item)) = find_leakage(&outline, &items) {
        return Err(DeriveError::Leakage {
            id: t.id.clone(),
            objective,
            item,
        });
    }
    Ok(Scenario {
        id: t.id.clone(),
        outline,
        items,
        persona,
        max_turns,
    })
}
