//! Measurement suite over recorded interviews: counterfactual questions,
//! six-dimension consistency, discourse roles and their time-binned
//! distribution, and correlation statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentError, TemplateError};
use crate::corpus::{SpeakerRole, Transcript};
use crate::domain::Turn;

pub mod annotations;
pub mod consistency;
pub mod counterfactual;
pub mod discourse;
pub mod stats;

pub use annotations::{read_annotations, write_annotations, Annotation};
pub use consistency::{aggregate_consistency, parse_verdict, score_consistency, ConsistencyScores, ConsistencyVerdict};
pub use counterfactual::{generate_counterfactual, CounterfactualVariant};
pub use discourse::{classify_discourse, discourse_distribution, DiscourseDistribution, DiscourseRole};
pub use stats::{cohen_kappa, pearson, Correlation};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("{context}: {error}")]
    Agent { context: String, error: AgentError },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{context}: unparseable reply after retry: {reason}")]
    Unparseable { context: String, reason: String },
    #[error("correlation undefined: {0}")]
    Undefined(String),
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

/// One interviewer question with the source's reply, as seen by the
/// analysis prompts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub question: String,
    pub answer: String,
}

impl Exchange {
    pub fn new(question: impl Into<String>, answer: impl Into<String>) -> Self {
        Exchange {
            question: question.into(),
            answer: answer.into(),
        }
    }
}

impl From<&Turn> for Exchange {
    fn from(t: &Turn) -> Self {
        Exchange::new(t.question.clone(), t.answer.clone())
    }
}

/// Groups a labeled transcript into exchanges. Consecutive interviewer
/// utterances form one question; source utterances up to the next question
/// form its answer. Speakers labeled `Other`, and source speech before the
/// first question, are dropped.
pub fn exchanges(t: &Transcript) -> Result<Vec<Exchange>, AnalysisError> {
    if t.roles.is_none() {
        return Err(AnalysisError::Precondition(format!("{}: roles not assigned", t.id)));
    }
    let mut out: Vec<Exchange> = Vec::new();
    for u in &t.utterances {
        match t.role_of(&u.speaker) {
            Some(SpeakerRole::Interviewer) => match out.last_mut() {
                Some(last) if last.answer.is_empty() => {
                    last.question.push(' ');
                    last.question.push_str(&u.text);
                }
                _ => out.push(Exchange::new(u.text.clone(), String::new())),
            },
            Some(SpeakerRole::Source) => {
                if let Some(last) = out.last_mut() {
                    if !last.answer.is_empty() {
                        last.answer.push(' ');
                    }
                    last.answer.push_str(&u.text);
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Same line format as the game prompts. A trailing unanswered question
/// renders without a `Source:` line.
pub fn render_exchanges(exchanges: &[Exchange]) -> String {
    exchanges
        .iter()
        .map(|e| {
            if e.answer.is_empty() {
                format!("Interviewer: {}", e.question)
            } else {
                format!("Interviewer: {}\nSource: {}", e.question, e.answer)
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::assign_roles;

    #[test]
    fn exchanges_merge_and_skip_others() {
        let t = assign_roles(&Transcript::new(
            "x",
            vec![
                ("ANCHOR", "Coming up next."),
                ("GUEST", "Hello."),
                ("HOST", "Welcome."),
                ("HOST", "Why now?"),
                ("GUEST", "Timing."),
                ("GUEST", "And money."),
                ("HOST", "How much?"),
                ("GUEST", "A lot."),
                ("HOST", "Really?"),
                ("ANCHOR", "Back to you."),
            ],
        ))
        .unwrap();
        let ex = exchanges(&t).unwrap();
        assert_eq!(
            ex,
            vec![
                Exchange::new("Welcome. Why now?", "Timing. And money."),
                Exchange::new("How much?", "A lot."),
                Exchange::new("Really?", ""),
            ]
        );
        assert!(render_exchanges(&ex).ends_with("Interviewer: Really?"));
        assert!(exchanges(&Transcript::new("y", vec![("A", "b")])).is_err());
    }
}
