//! Discourse roles of interviewer utterances and their distribution over
//! the course of an interview.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{exchanges, render_exchanges, AnalysisError, Exchange};
use crate::agents::prompts::bracket_groups;
use crate::agents::{chat_complete, Agent, ChatMessage, PromptSet};
use crate::corpus::Transcript;

/// Exchanges shown before the utterance being labeled.
pub const DISCOURSE_CONTEXT: usize = 4;
pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscourseRole {
    StartingEndingRemarks,
    Acknowledgement,
    FollowUp,
    Verification,
    TopicTransition,
    OpinionSpeculation,
    Challenge,
    Broadening,
}

impl DiscourseRole {
    pub const ALL: [DiscourseRole; 8] = [
        Self::StartingEndingRemarks,
        Self::Acknowledgement,
        Self::FollowUp,
        Self::Verification,
        Self::TopicTransition,
        Self::OpinionSpeculation,
        Self::Challenge,
        Self::Broadening,
    ];

    /// Name used in prompts and reports.
    pub fn label(self) -> &'static str {
        match self {
            Self::StartingEndingRemarks => "Starting/Ending Remarks",
            Self::Acknowledgement => "Acknowledgement Statement",
            Self::FollowUp => "Follow-Up Question",
            Self::Verification => "Verification Question",
            Self::TopicTransition => "Topic-Transition Question",
            Self::OpinionSpeculation => "Opinion/Speculation Question",
            Self::Challenge => "Challenge Question",
            Self::Broadening => "Broadening Question",
        }
    }

    /// Accepts the label, the snake_case name, or a shortened form such as
    /// `follow-up`, `opinion` or `transition`, ignoring case and punctuation.
    pub fn parse(text: &str) -> Option<DiscourseRole> {
        let mut k: String = text
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        for suffix in ["question", "statement", "remarks", "remark"] {
            if k.len() > suffix.len() {
                if let Some(stripped) = k.strip_suffix(suffix) {
                    k = stripped.to_string();
                    break;
                }
            }
        }
        Some(match k.as_str() {
            "startingending" | "starting" | "ending" | "startingendingremarks" | "greeting" | "closing" => {
                Self::StartingEndingRemarks
            }
            "acknowledgement" | "acknowledgment" => Self::Acknowledgement,
            "followup" => Self::FollowUp,
            "verification" | "verify" => Self::Verification,
            "topictransition" | "transition" => Self::TopicTransition,
            "opinionspeculation" | "opinion" | "speculation" => Self::OpinionSpeculation,
            "challenge" | "challenging" => Self::Challenge,
            "broadening" | "broaden" => Self::Broadening,
            _ => return None,
        })
    }
}

impl fmt::Display for DiscourseRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DiscourseRole {
    type Err = AnalysisError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DiscourseRole::parse(s).ok_or_else(|| AnalysisError::Precondition(format!("unknown discourse role `{s}`")))
    }
}

/// A bracketed role anywhere in the reply, else the whole reply as a label.
pub fn parse_role_reply(reply: &str) -> Option<DiscourseRole> {
    bracket_groups(reply)
        .into_iter()
        .find_map(DiscourseRole::parse)
        .or_else(|| DiscourseRole::parse(reply.trim()))
}

pub fn discourse_prompt(
    question: &str,
    context: &[Exchange],
    prompts: &PromptSet,
) -> Result<Vec<ChatMessage>, AnalysisError> {
    let t = prompts.get("discourse")?;
    let start = context.len().saturating_sub(DISCOURSE_CONTEXT);
    Ok(vec![
        ChatMessage::system(t.render("system", &[])?),
        ChatMessage::user(t.render(
            "user",
            &[
                ("transcript", render_exchanges(&context[start..])),
                ("question", question.to_string()),
            ],
        )?),
    ])
}

/// Labels `question`, seeing the last few exchanges of `context` before it.
pub fn classify_discourse(
    question: &str,
    context: &[Exchange],
    judge: &dyn Agent,
    prompts: &PromptSet,
) -> Result<DiscourseRole, AnalysisError> {
    let messages = discourse_prompt(question, context, prompts)?;
    let mut last = String::new();
    for attempt in 1..=2 {
        let reply = chat_complete(judge, &messages).map_err(|error| AnalysisError::Agent {
            context: "discourse judge".into(),
            error,
        })?;
        match parse_role_reply(&reply) {
            Some(role) => return Ok(role),
            None => {
                warn!(attempt, reply = %reply, "discourse label outside the role set");
                last = reply;
            }
        }
    }
    Err(AnalysisError::Unparseable {
        context: "discourse judge".into(),
        reason: format!("no role in `{last}`"),
    })
}

/// One classified interviewer turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscourseLabel {
    pub transcript_id: String,
    pub turn_index: usize,
    pub total_turns: usize,
    pub role: DiscourseRole,
}

impl DiscourseLabel {
    pub fn position(&self) -> f64 {
        self.turn_index as f64 / self.total_turns as f64
    }
}

/// Labels turns 2..=n of a transcript; turn 1 is the greeting and is skipped.
pub fn label_transcript(
    t: &Transcript,
    judge: &dyn Agent,
    prompts: &PromptSet,
) -> Result<Vec<DiscourseLabel>, AnalysisError> {
    let ex = exchanges(t)?;
    (2..=ex.len())
        .map(|i| {
            let role = classify_discourse(&ex[i - 1].question, &ex[..i - 1], judge, prompts)?;
            Ok(DiscourseLabel {
                transcript_id: t.id.clone(),
                turn_index: i,
                total_turns: ex.len(),
                role,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscourseBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// Empty when no label fell in this bin.
    pub proportions: BTreeMap<DiscourseRole, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscourseDistribution {
    pub bins: Vec<DiscourseBin>,
}

/// Bin of a position in (0, 1]: bin k covers (k/bins, (k+1)/bins]. The small
/// tolerance keeps exact boundaries such as 0.3 with 10 bins in the lower bin
/// despite float rounding.
pub fn bin_of(position: f64, bins: usize) -> usize {
    let k = (position * bins as f64 - 1e-9).ceil() as i64 - 1;
    k.clamp(0, bins as i64 - 1) as usize
}

pub fn discourse_distribution(
    labels: &[(f64, DiscourseRole)],
    bins: usize,
) -> Result<DiscourseDistribution, AnalysisError> {
    if bins < 2 {
        return Err(AnalysisError::Precondition(format!("need at least 2 bins, got {bins}")));
    }
    if let Some((p, _)) = labels.iter().find(|(p, _)| !(*p > 0.0 && *p <= 1.0)) {
        return Err(AnalysisError::Precondition(format!("position {p} outside (0, 1]")));
    }
    let mut counts: Vec<BTreeMap<DiscourseRole, usize>> = vec![BTreeMap::new(); bins];
    for (p, role) in labels {
        *counts[bin_of(*p, bins)].entry(*role).or_default() += 1;
    }
    Ok(DiscourseDistribution {
        bins: counts
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                let n: usize = c.values().sum();
                DiscourseBin {
                    lower: k as f64 / bins as f64,
                    upper: (k + 1) as f64 / bins as f64,
                    count: n,
                    proportions: c.into_iter().map(|(r, m)| (r, m as f64 / n as f64)).collect(),
                }
            })
            .collect(),
    })
}
