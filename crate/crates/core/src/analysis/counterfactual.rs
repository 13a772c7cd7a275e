//! "What would you ask next?" generation at a given point of a real
//! interview, under four prompting variants.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{exchanges, render_exchanges, AnalysisError, Exchange};
use crate::agents::prompts::render_objectives;
use crate::agents::{chat_complete, Agent, ChatMessage, PromptSet};
use crate::corpus::Transcript;
use crate::domain::ObjectiveOutline;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CounterfactualVariant {
    Baseline,
    #[serde(rename = "cot")]
    CoT,
    Outline,
    #[serde(rename = "outline-cot")]
    OutlineCoT,
}

impl CounterfactualVariant {
    pub const ALL: [CounterfactualVariant; 4] = [Self::Baseline, Self::CoT, Self::Outline, Self::OutlineCoT];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Baseline => "baseline",
            Self::CoT => "cot",
            Self::Outline => "outline",
            Self::OutlineCoT => "outline-cot",
        }
    }

    pub fn template(self) -> &'static str {
        match self {
            Self::Baseline => "counterfactual_baseline",
            Self::CoT => "counterfactual_cot",
            Self::Outline => "counterfactual_outline",
            Self::OutlineCoT => "counterfactual_outline_cot",
        }
    }

    pub fn needs_outline(self) -> bool {
        matches!(self, Self::Outline | Self::OutlineCoT)
    }
}

impl fmt::Display for CounterfactualVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CounterfactualVariant {
    type Err = AnalysisError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| AnalysisError::Precondition(format!("unknown counterfactual variant `{s}`")))
    }
}

/// Prompt for the question at 1-based `turn_index`, covering the exchanges
/// before it.
pub fn counterfactual_prompt(
    history: &[Exchange],
    turn_index: usize,
    variant: CounterfactualVariant,
    outline: Option<&ObjectiveOutline>,
    prompts: &PromptSet,
) -> Result<Vec<ChatMessage>, AnalysisError> {
    if turn_index < 2 || turn_index > history.len() {
        return Err(AnalysisError::Precondition(format!(
            "turn index {turn_index} outside 2..={}",
            history.len()
        )));
    }
    let template = prompts.get(variant.template())?;
    let transcript = render_exchanges(&history[..turn_index - 1]);
    let user = if variant.needs_outline() {
        let outline = outline
            .ok_or_else(|| AnalysisError::Precondition(format!("variant {variant} requires an outline")))?;
        template.render(
            "user",
            &[
                ("source_bio", outline.source_bio.clone()),
                ("context", outline.context.clone()),
                ("objectives", render_objectives(outline)),
                ("transcript", transcript),
            ],
        )?
    } else {
        template.render("user", &[("transcript", transcript)])?
    };
    Ok(vec![ChatMessage::system(template.render("system", &[])?), ChatMessage::user(user)])
}

/// The text after the last `Question:` marker, else the whole reply.
pub fn extract_question(reply: &str) -> String {
    reply
        .lines()
        .rev()
        .find_map(|l| l.trim().strip_prefix("Question:"))
        .unwrap_or(reply)
        .trim()
        .to_string()
}

pub fn generate_counterfactual(
    t: &Transcript,
    turn_index: usize,
    variant: CounterfactualVariant,
    outline: Option<&ObjectiveOutline>,
    generator: &dyn Agent,
    prompts: &PromptSet,
) -> Result<String, AnalysisError> {
    let history = exchanges(t)?;
    let messages = counterfactual_prompt(&history, turn_index, variant, outline, prompts)?;
    let reply = chat_complete(generator, &messages).map_err(|error| AnalysisError::Agent {
        context: format!("{} turn {turn_index} ({variant})", t.id),
        error,
    })?;
    let question = extract_question(&reply);
    if question.is_empty() {
        return Err(AnalysisError::Unparseable {
            context: format!("{} turn {turn_index} ({variant})", t.id),
            reason: "empty question".into(),
        });
    }
    Ok(question)
}

/// One generated question next to the one actually asked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfactualRecord {
    pub transcript_id: String,
    pub turn_index: usize,
    pub variant: CounterfactualVariant,
    pub generated: String,
    pub human: String,
}

/// Every turn from 2 onward of every transcript.
pub fn counterfactual_records(
    corpus: &[Transcript],
    variant: CounterfactualVariant,
    outline_for: &dyn Fn(&str) -> Option<ObjectiveOutline>,
    generator: &dyn Agent,
    prompts: &PromptSet,
) -> Result<Vec<CounterfactualRecord>, AnalysisError> {
    let mut out = Vec::new();
    for t in corpus {
        let history = exchanges(t)?;
        let outline = outline_for(&t.id);
        for turn_index in 2..=history.len() {
            let generated = generate_counterfactual(t, turn_index, variant, outline.as_ref(), generator, prompts)?;
            out.push(CounterfactualRecord {
                transcript_id: t.id.clone(),
                turn_index,
                variant,
                generated,
                human: history[turn_index - 1].question.clone(),
            });
        }
    }
    Ok(out)
}
