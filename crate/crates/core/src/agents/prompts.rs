//! Versioned prompt templates and the game-role prompt builders.
//!
//! Template files live in `templates/`. Format:
//!
//! ```text
//! version = 1
//! --- system ---
//! text with {{placeholders}}
//! --- user ---
//! ...
//! ```
//!
//! Every render call must supply exactly the placeholder set its section uses:
//! a missing variable and an unused variable are both errors. Each template's
//! SHA-256 is recorded in run records so prompt edits are visible in the logs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{ChatMessage, ChatRole};
use crate::domain::{InfoItem, ObjectiveOutline, Persona, PersuasionLevel, Turn};
use crate::persona::PersuasionProfile;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template `{0}` is not defined")]
    UnknownTemplate(String),
    #[error("template `{template}` has no section `{section}`")]
    UnknownSection { template: String, section: String },
    #[error("template `{template}` section `{section}`: missing variables {missing:?}")]
    Missing {
        template: String,
        section: String,
        missing: Vec<String>,
    },
    #[error("template `{template}` section `{section}`: unused variables {unused:?}")]
    Unused {
        template: String,
        section: String,
        unused: Vec<String>,
    },
    #[error("template `{name}` is malformed: {reason}")]
    Malformed { name: String, reason: String },
    #[error("could not read template {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: String,
    pub version: u32,
    sections: BTreeMap<String, String>,
    hash: String,
}

impl PromptTemplate {
    pub fn parse(name: &str, text: &str) -> Result<Self, TemplateError> {
        let malformed = |reason: &str| TemplateError::Malformed {
            name: name.to_string(),
            reason: reason.to_string(),
        };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| malformed("empty file"))?;
        let version = header
            .strip_prefix("version")
            .and_then(|r| r.trim().strip_prefix('='))
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or_else(|| malformed("first line must be `version = N`"))?;
        let mut sections = BTreeMap::new();
        let mut current: Option<(String, Vec<&str>)> = None;
        for line in lines {
            let trimmed = line.trim();
            if let Some(section) = trimmed
                .strip_prefix("--- ")
                .and_then(|s| s.strip_suffix(" ---"))
            {
                if let Some((n, body)) = current.take() {
                    sections.insert(n, body.join("\n").trim().to_string());
                }
                current = Some((section.trim().to_string(), Vec::new()));
            } else if let Some((_, body)) = current.as_mut() {
                body.push(line);
            } else if !trimmed.is_empty() {
                return Err(malformed("text before the first section marker"));
            }
        }
        if let Some((n, body)) = current.take() {
            sections.insert(n, body.join("\n").trim().to_string());
        }
        if sections.is_empty() {
            return Err(malformed("no sections"));
        }
        let hash = format!("sha256:{}", hex::encode(Sha256::digest(text.as_bytes())));
        Ok(PromptTemplate {
            name: name.to_string(),
            version,
            sections,
            hash,
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.sections.contains_key(section)
    }

    /// Placeholder names used by one section.
    pub fn placeholders(&self, section: &str) -> Result<BTreeSet<String>, TemplateError> {
        let text = self.section(section)?;
        Ok(scan_placeholders(text))
    }

    fn section(&self, section: &str) -> Result<&str, TemplateError> {
        self.sections
            .get(section)
            .map(String::as_str)
            .ok_or_else(|| TemplateError::UnknownSection {
                template: self.name.clone(),
                section: section.to_string(),
            })
    }

    pub fn render(&self, section: &str, vars: &[(&str, String)]) -> Result<String, TemplateError> {
        let text = self.section(section)?;
        let required = scan_placeholders(text);
        let provided: BTreeSet<String> = vars.iter().map(|(k, _)| k.to_string()).collect();
        let missing: Vec<String> = required.difference(&provided).cloned().collect();
        if !missing.is_empty() {
            return Err(TemplateError::Missing {
                template: self.name.clone(),
                section: section.to_string(),
                missing,
            });
        }
        let unused: Vec<String> = provided.difference(&required).cloned().collect();
        if !unused.is_empty() {
            return Err(TemplateError::Unused {
                template: self.name.clone(),
                section: section.to_string(),
                unused,
            });
        }
        // Single left-to-right pass so substituted values are never re-scanned.
        let mut out = String::with_capacity(text.len());
        let mut rest = text;
        while let Some(start) = rest.find("{{") {
            match rest[start + 2..].find("}}") {
                Some(len) => {
                    let key = rest[start + 2..start + 2 + len].trim();
                    out.push_str(&rest[..start]);
                    match vars.iter().find(|(k, _)| *k == key) {
                        Some((_, v)) => out.push_str(v),
                        None => out.push_str(&rest[start..start + 4 + len]),
                    }
                    rest = &rest[start + 4 + len..];
                }
                None => break,
            }
        }
        out.push_str(rest);
        Ok(out)
    }
}

fn scan_placeholders(text: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut rest = text;
    while let Some(start) = rest.find("{{") {
        match rest[start + 2..].find("}}") {
            Some(len) => {
                let key = rest[start + 2..start + 2 + len].trim();
                if !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    out.insert(key.to_string());
                }
                rest = &rest[start + 4 + len..];
            }
            None => break,
        }
    }
    out
}

const BUNDLED: &[(&str, &str)] = &[
    ("interviewer", include_str!("../../templates/interviewer.txt")),
    ("source", include_str!("../../templates/source.txt")),
    ("judge", include_str!("../../templates/judge.txt")),
    ("retriever", include_str!("../../templates/retriever.txt")),
    ("gate", include_str!("../../templates/gate.txt")),
    ("summarize_items", include_str!("../../templates/summarize_items.txt")),
    ("summarize_outline", include_str!("../../templates/summarize_outline.txt")),
    ("counterfactual_baseline", include_str!("../../templates/counterfactual_baseline.txt")),
    ("counterfactual_cot", include_str!("../../templates/counterfactual_cot.txt")),
    ("counterfactual_outline", include_str!("../../templates/counterfactual_outline.txt")),
    ("counterfactual_outline_cot", include_str!("../../templates/counterfactual_outline_cot.txt")),
    ("consistency", include_str!("../../templates/consistency.txt")),
    ("discourse", include_str!("../../templates/discourse.txt")),
];

/// Named collection of templates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    templates: BTreeMap<String, PromptTemplate>,
}

impl PromptSet {
    pub fn bundled() -> Self {
        let templates = BUNDLED
            .iter()
            .map(|(name, text)| {
                let t = PromptTemplate::parse(name, text).expect("bundled template parses");
                (name.to_string(), t)
            })
            .collect();
        PromptSet { templates }
    }

    /// Bundled templates, with any `<name>.txt` found in `dir` taking precedence.
    pub fn with_overrides(dir: &Path) -> Result<Self, TemplateError> {
        let mut set = PromptSet::bundled();
        for (name, _) in BUNDLED {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                let text = std::fs::read_to_string(&path).map_err(|e| TemplateError::Io {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })?;
                set.templates.insert(name.to_string(), PromptTemplate::parse(name, &text)?);
            }
        }
        Ok(set)
    }

    pub fn get(&self, name: &str) -> Result<&PromptTemplate, TemplateError> {
        self.templates
            .get(name)
            .ok_or_else(|| TemplateError::UnknownTemplate(name.to_string()))
    }

    pub fn hashes(&self, names: &[&str]) -> BTreeMap<String, String> {
        names
            .iter()
            .filter_map(|n| self.templates.get(*n).map(|t| (n.to_string(), t.hash.clone())))
            .collect()
    }
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet::bundled()
    }
}

pub const GAME_TEMPLATES: [&str; 4] = ["interviewer", "source", "judge", "retriever"];

pub fn render_objectives(outline: &ObjectiveOutline) -> String {
    outline
        .objectives
        .iter()
        .enumerate()
        .map(|(i, o)| format!("Objective {}: {}", i + 1, o))
        .collect::<Vec<_>>()
        .join("\n")
}

fn bullet_list(lines: &[String]) -> String {
    lines.iter().map(|l| format!("- {l}")).collect::<Vec<_>>().join("\n")
}

pub fn render_item_lines(items: &[InfoItem]) -> String {
    items
        .iter()
        .map(|i| format!("Information item #{}: {}", i.id, i.text))
        .collect::<Vec<_>>()
        .join("\n")
}

/// `Interviewer: ...` / `Source: ...` lines for a turn window.
pub fn render_transcript(turns: &[Turn]) -> String {
    turns
        .iter()
        .map(|t| format!("Interviewer: {}\nSource: {}", t.question, t.answer))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Interviewer: outline in the system message, past turns as alternating
/// assistant (own questions) / user (source answers) messages.
pub fn render_interviewer_prompt(
    prompts: &PromptSet,
    outline: &ObjectiveOutline,
    history: &[Turn],
) -> Result<Vec<ChatMessage>, TemplateError> {
    let t = prompts.get("interviewer")?;
    let mut messages = vec![ChatMessage::system(t.render(
        "system",
        &[
            ("source_bio", outline.source_bio.clone()),
            ("context", outline.context.clone()),
            ("objectives", render_objectives(outline)),
        ],
    )?)];
    if history.is_empty() {
        messages.push(ChatMessage::user(t.render("opening", &[])?));
    } else {
        for (i, turn) in history.iter().enumerate() {
            messages.push(ChatMessage::assistant(turn.question.clone()));
            if i + 1 == history.len() {
                messages.push(ChatMessage::user(format!(
                    "{}\n\n{}",
                    turn.answer,
                    t.render("next", &[])?
                )));
            } else {
                messages.push(ChatMessage::user(turn.answer.clone()));
            }
        }
    }
    Ok(messages)
}

/// Source: persona and prior level in the system message, past turns as
/// user (questions) / assistant (own answers), then the current question with
/// exactly the items to disclose.
pub fn render_source_prompt(
    prompts: &PromptSet,
    persona: &Persona,
    level: PersuasionLevel,
    disclose: &[InfoItem],
    question: &str,
    history: &[Turn],
) -> Result<Vec<ChatMessage>, TemplateError> {
    let t = prompts.get("source")?;
    let mut messages = vec![ChatMessage::system(t.render(
        "system",
        &[
            ("persona_name", persona.kind.display_name().to_string()),
            ("persona_description", persona.description.clone()),
            ("persona_examples", bullet_list(&persona.example_responses)),
            ("level", level.to_string()),
        ],
    )?)];
    for turn in history {
        messages.push(ChatMessage::user(turn.question.clone()));
        messages.push(ChatMessage::assistant(turn.answer.clone()));
    }
    let last = if disclose.is_empty() {
        t.render("deflect", &[("question", question.to_string())])?
    } else {
        let items: Vec<String> = disclose.iter().map(|i| i.text.clone()).collect();
        t.render(
            "disclose",
            &[("question", question.to_string()), ("items", bullet_list(&items))],
        )?
    };
    messages.push(ChatMessage::user(last));
    Ok(messages)
}

pub fn render_judge_prompt(
    prompts: &PromptSet,
    profile: &PersuasionProfile,
    window: &[Turn],
) -> Result<Vec<ChatMessage>, TemplateError> {
    let t = prompts.get("judge")?;
    let system = t.render(
        "system",
        &[
            ("persona_name", profile.persona.display_name().to_string()),
            ("cue_description", profile.cue_description.clone()),
            ("cue_examples", bullet_list(&profile.cue_examples)),
        ],
    )?;
    let user = if window.is_empty() {
        t.render("empty", &[])?
    } else {
        t.render("window", &[("transcript", render_transcript(window))])?
    };
    Ok(vec![ChatMessage::system(system), ChatMessage::user(user)])
}

pub fn render_retriever_prompt(
    prompts: &PromptSet,
    candidates: &[InfoItem],
    question: &str,
) -> Result<Vec<ChatMessage>, TemplateError> {
    let t = prompts.get("retriever")?;
    Ok(vec![
        ChatMessage::system(t.render("system", &[])?),
        ChatMessage::user(t.render(
            "user",
            &[
                ("items", render_item_lines(candidates)),
                ("question", question.to_string()),
            ],
        )?),
    ])
}

/// Contents of every `[...]` group, in order.
pub fn bracket_groups(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('[') {
        match rest[open + 1..].find(']') {
            Some(len) => {
                out.push(&rest[open + 1..open + 1 + len]);
                rest = &rest[open + 2 + len..];
            }
            None => break,
        }
    }
    out
}

/// The first bracketed integer, if it lies in 1..=5.
pub fn parse_bracketed_level(reply: &str) -> Option<PersuasionLevel> {
    let first = bracket_groups(reply)
        .into_iter()
        .find_map(|g| g.trim().parse::<i64>().ok())?;
    PersuasionLevel::new(first).ok()
}

/// The first bracket group that is a (possibly empty) comma-separated list of
/// item numbers, e.g. `[2, 5]`, `[#3]` or `[]`.
pub fn parse_bracketed_ids(reply: &str) -> Option<Vec<u32>> {
    bracket_groups(reply).into_iter().find_map(|g| {
        let g = g.trim();
        if g.is_empty() {
            return Some(Vec::new());
        }
        g.split(',')
            .map(|p| p.trim().trim_start_matches('#').parse::<u32>().ok())
            .collect()
    })
}

/// Case-insensitive bracketed YES/NO.
pub fn parse_bracketed_yes_no(reply: &str) -> Option<bool> {
    bracket_groups(reply).into_iter().find_map(|g| {
        match g.trim().trim_matches(|c| c == '\'' || c == '"').to_ascii_uppercase().as_str() {
            "YES" => Some(true),
            "NO" => Some(false),
            _ => None,
        }
    })
}

pub fn role_of(messages: &[ChatMessage], role: ChatRole) -> usize {
    messages.iter().filter(|m| m.role == role).count()
}
