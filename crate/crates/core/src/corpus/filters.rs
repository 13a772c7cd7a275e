//! Per-transcript keep/reject stages.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::Transcript;
use crate::agents::prompts::parse_bracketed_yes_no;
use crate::agents::{chat_complete, Agent, AgentError, ChatMessage, PromptSet, TemplateError};

/// Title keywords that mark non-interview segments.
pub const DEFAULT_KEYWORDS: [&str; 6] = ["Sunday Puzzle", "Traffic", "Puzzle", "Advertisement", "Sponsor", "Commentary"];

/// Transcripts with this many utterances or fewer are dropped.
pub const MAX_SHORT_UTTERANCES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Reject {
    Keyword { keyword: String },
    Duplicate { of: String },
    TooShortForWindow { utterances: usize },
    TooManySpeakers { speakers: usize },
    TooShort { utterances: usize },
    GateNo,
    GateUnparseable,
    /// Not exactly two core speakers to label.
    RolesUnassignable { speakers: usize },
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reject::Keyword { keyword } => write!(f, "title matches `{keyword}`"),
            Reject::Duplicate { of } => write!(f, "duplicate of {of}"),
            Reject::TooShortForWindow { utterances } => write!(f, "{utterances} utterances is too short for the window"),
            Reject::TooManySpeakers { speakers } => write!(f, "{speakers} speakers in the middle window"),
            Reject::TooShort { utterances } => write!(f, "only {utterances} utterances"),
            Reject::GateNo => f.write_str("not an informational interview"),
            Reject::GateUnparseable => f.write_str("gate reply unparseable"),
            Reject::RolesUnassignable { speakers } => write!(f, "{speakers} core speakers, need two"),
        }
    }
}

/// Rejects when the program or title contains a blocklisted keyword,
/// ignoring case.
pub fn keyword_filter(t: &Transcript, blocklist: &[String]) -> Result<(), Reject> {
    let haystack = format!("{}\n{}", t.program, t.title).to_lowercase();
    match blocklist.iter().find(|k| haystack.contains(&k.to_lowercase())) {
        Some(k) => Err(Reject::Keyword { keyword: k.clone() }),
        None => Ok(()),
    }
}

/// Index range of the central 70%: `[floor(0.15 n), ceil(0.85 n))`.
pub fn middle_window(n: usize) -> std::ops::Range<usize> {
    // Integer forms of floor(0.15 n) and ceil(0.85 n), exact for all n.
    let lo = (15 * n) / 100;
    let hi = (85 * n).div_ceil(100);
    lo..hi
}

pub fn middle_speakers(t: &Transcript) -> BTreeSet<&str> {
    t.utterances[middle_window(t.utterances.len())]
        .iter()
        .map(|u| u.speaker.as_str())
        .collect()
}

pub fn middle_speaker_filter(t: &Transcript) -> Result<(), Reject> {
    let n = t.utterances.len();
    if n < 4 {
        return Err(Reject::TooShortForWindow { utterances: n });
    }
    let speakers = middle_speakers(t).len();
    if speakers > 2 {
        return Err(Reject::TooManySpeakers { speakers });
    }
    Ok(())
}

pub fn length_filter(t: &Transcript, max_short: usize) -> Result<(), Reject> {
    let n = t.utterances.len();
    if n <= max_short {
        Err(Reject::TooShort { utterances: n })
    } else {
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GateError {
    #[error("gate agent failed on {id}: {error}")]
    Agent { id: String, error: AgentError },
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// Asks the gate agent whether `t` is a two-person informational interview.
/// An unparseable reply is retried once, then rejected.
pub fn informational_gate(t: &Transcript, gate: &dyn Agent, prompts: &PromptSet) -> Result<Result<(), Reject>, GateError> {
    let prompt = prompts.get("gate")?.render("user", &[("dialogue", t.render_dialogue())])?;
    let messages = [ChatMessage::user(prompt)];
    for attempt in 1..=2 {
        let reply = chat_complete(gate, &messages).map_err(|error| GateError::Agent {
            id: t.id.clone(),
            error,
        })?;
        match parse_bracketed_yes_no(&reply) {
            Some(true) => return Ok(Ok(())),
            Some(false) => return Ok(Err(Reject::GateNo)),
            None => warn!(transcript = %t.id, attempt, "unparseable gate reply"),
        }
    }
    Ok(Err(Reject::GateUnparseable))
}
