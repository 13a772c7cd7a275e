//! Six-dimension agreement between a generated question and the one a
//! journalist actually asked.

use serde::{Deserialize, Serialize};
use tracing::warn;

use super::{render_exchanges, AnalysisError, Exchange};
use crate::agents::{chat_complete, Agent, ChatMessage, PromptSet};

pub const DIMENSIONS: [&str; 6] = ["exact_match", "information", "motivation", "style", "discourse", "context"];

/// [`ConsistencyVerdict::new`], [`parse_verdict`] and deserialization all
/// refuse an exact match that disagrees elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawVerdict")]
pub struct ConsistencyVerdict {
    pub exact_match: bool,
    pub information: bool,
    pub motivation: bool,
    pub style: bool,
    pub discourse: bool,
    pub context: bool,
}

#[derive(Deserialize)]
struct RawVerdict {
    exact_match: bool,
    information: bool,
    motivation: bool,
    style: bool,
    discourse: bool,
    context: bool,
}

impl TryFrom<RawVerdict> for ConsistencyVerdict {
    type Error = String;
    fn try_from(r: RawVerdict) -> Result<Self, String> {
        ConsistencyVerdict::new([r.exact_match, r.information, r.motivation, r.style, r.discourse, r.context])
    }
}

impl ConsistencyVerdict {
    pub const ALL_TRUE: ConsistencyVerdict = ConsistencyVerdict {
        exact_match: true,
        information: true,
        motivation: true,
        style: true,
        discourse: true,
        context: true,
    };

    /// Values in [`DIMENSIONS`] order.
    pub fn new(v: [bool; 6]) -> Result<Self, String> {
        if v[0] && !v[1..].iter().all(|b| *b) {
            return Err("exact_match is yes but another dimension is no".into());
        }
        Ok(ConsistencyVerdict {
            exact_match: v[0],
            information: v[1],
            motivation: v[2],
            style: v[3],
            discourse: v[4],
            context: v[5],
        })
    }

    pub fn values(&self) -> [bool; 6] {
        [self.exact_match, self.information, self.motivation, self.style, self.discourse, self.context]
    }
}

fn dimension_of(key: &str) -> Option<usize> {
    let k: String = key
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_lowercase();
    Some(match k.as_str() {
        "exactmatch" | "exact" => 0,
        "information" | "informational" | "info" => 1,
        "motivation" | "motive" | "motivational" => 2,
        "style" | "stylistic" => 3,
        "discourse" => 4,
        "context" | "contextual" => 5,
        _ => return None,
    })
}

fn boolean(value: &str) -> Option<bool> {
    let v = value.trim().trim_matches(|c: char| !c.is_ascii_alphanumeric()).to_ascii_lowercase();
    match v.as_str() {
        "yes" | "y" | "true" => Some(true),
        "no" | "n" | "false" => Some(false),
        _ => None,
    }
}

/// Reads `key: yes|no` (or `key=yes`) pairs anywhere in the reply,
/// comma-separated or one per line; the last mention of a key wins. The
/// implication rule is checked before completeness, so `exact=yes, style=no`
/// is reported as a contradiction.
pub fn parse_verdict(reply: &str) -> Result<ConsistencyVerdict, String> {
    let mut found: [Option<bool>; 6] = [None; 6];
    for segment in reply.split(['\n', ',', ';']) {
        let Some((key, value)) = segment.split_once([':', '=']) else {
            continue;
        };
        let key = key.trim().trim_start_matches(['-', '*', ' ']);
        if let (Some(d), Some(b)) = (dimension_of(key), boolean(value)) {
            found[d] = Some(b);
        }
    }
    if found[0] == Some(true) && found[1..].contains(&Some(false)) {
        return Err("exact_match is yes but another dimension is no".into());
    }
    let missing: Vec<&str> = DIMENSIONS
        .iter()
        .zip(found)
        .filter(|(_, v)| v.is_none())
        .map(|(k, _)| *k)
        .collect();
    if !missing.is_empty() {
        return Err(format!("missing {}", missing.join(", ")));
    }
    ConsistencyVerdict::new(found.map(|v| v.unwrap_or_default()))
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn consistency_prompt(
    g: &str,
    h: &str,
    context: &[Exchange],
    prompts: &PromptSet,
) -> Result<Vec<ChatMessage>, AnalysisError> {
    let t = prompts.get("consistency")?;
    Ok(vec![
        ChatMessage::system(t.render("system", &[])?),
        ChatMessage::user(t.render(
            "user",
            &[
                ("transcript", render_exchanges(context)),
                ("generated", g.to_string()),
                ("human", h.to_string()),
            ],
        )?),
    ])
}

/// Identical questions (up to whitespace) agree everywhere without asking
/// the judge.
pub fn score_consistency(
    g: &str,
    h: &str,
    context: &[Exchange],
    judge: &dyn Agent,
    prompts: &PromptSet,
) -> Result<ConsistencyVerdict, AnalysisError> {
    if normalize(g) == normalize(h) {
        return Ok(ConsistencyVerdict::ALL_TRUE);
    }
    let messages = consistency_prompt(g, h, context, prompts)?;
    let mut last = String::new();
    for attempt in 1..=2 {
        let reply = chat_complete(judge, &messages).map_err(|error| AnalysisError::Agent {
            context: "consistency judge".into(),
            error,
        })?;
        match parse_verdict(&reply) {
            Ok(v) => return Ok(v),
            Err(e) => {
                warn!(attempt, error = %e, "unparseable consistency verdict");
                last = e;
            }
        }
    }
    Err(AnalysisError::Unparseable {
        context: "consistency judge".into(),
        reason: last,
    })
}

/// Per-dimension percentage of verdicts marked consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyScores {
    pub n: usize,
    pub exact_match: f64,
    pub information: f64,
    pub motivation: f64,
    pub style: f64,
    pub discourse: f64,
    pub context: f64,
}

impl ConsistencyScores {
    pub fn values(&self) -> [f64; 6] {
        [self.exact_match, self.information, self.motivation, self.style, self.discourse, self.context]
    }
}

pub fn aggregate_consistency(verdicts: &[ConsistencyVerdict]) -> Result<ConsistencyScores, AnalysisError> {
    if verdicts.is_empty() {
        return Err(AnalysisError::Precondition("no verdicts to aggregate".into()));
    }
    let mut counts = [0usize; 6];
    for v in verdicts {
        for (c, b) in counts.iter_mut().zip(v.values()) {
            *c += b as usize;
        }
    }
    let pct = counts.map(|c| c as f64 * 100.0 / verdicts.len() as f64);
    Ok(ConsistencyScores {
        n: verdicts.len(),
        exact_match: pct[0],
        information: pct[1],
        motivation: pct[2],
        style: pct[3],
        discourse: pct[4],
        context: pct[5],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::ScriptedAgent;

    const ALL_YES: &str = "exact_match: yes\ninformation: yes\nmotivation: yes\nstyle: yes\ndiscourse: yes\ncontext: yes";

    #[test]
    fn identical_questions_skip_the_judge() {
        let judge = ScriptedAgent::failing("j", "must not be called");
        let v = score_consistency("Why now?", " Why  now? ", &[], &judge, &PromptSet::bundled()).unwrap();
        assert_eq!(v, ConsistencyVerdict::ALL_TRUE);
    }

    #[test]
    fn exact_yes_with_style_no_is_a_contradiction() {
        let e = parse_verdict("exact=yes, style=no").unwrap_err();
        assert!(e.contains("exact_match"), "{e}");
        let judge = ScriptedAgent::fixed("j", "exact=yes, style=no");
        assert!(matches!(
            score_consistency("a?", "b?", &[], &judge, &PromptSet::bundled()),
            Err(AnalysisError::Unparseable { .. })
        ));
    }

    #[test]
    fn shared_topic_different_intent() {
        let judge = ScriptedAgent::fixed(
            "j",
            "Both ask about the budget, but A wants blame and B wants numbers.\n\
             exact_match: no\ninformation: yes\nmotivation: no\nstyle: no\ndiscourse: yes\ncontext: yes",
        );
        let v = score_consistency(
            "Who is to blame for the budget gap?",
            "How large is the budget gap?",
            &[Exchange::new("What is the budget?", "Ten million.")],
            &judge,
            &PromptSet::bundled(),
        )
        .unwrap();
        assert!(v.information && !v.motivation && !v.exact_match);
    }

    #[test]
    fn parser_accepts_aliases_and_retries_once() {
        let v = parse_verdict("- Exact: no\n- Info = Yes\nMotivation: yes\nStyle: no.\nDiscourse: YES\nContextual: n").unwrap();
        assert_eq!(v.values(), [false, true, true, false, true, false]);
        assert!(parse_verdict("exact_match: maybe").is_err());
        let judge = ScriptedAgent::in_call_order("j", vec!["no idea".into(), ALL_YES.into()]);
        assert_eq!(
            score_consistency("a?", "b?", &[], &judge, &PromptSet::bundled()).unwrap(),
            ConsistencyVerdict::ALL_TRUE
        );
    }

    #[test]
    fn aggregates() {
        assert!(aggregate_consistency(&[]).is_err());
        let all = aggregate_consistency(&[ConsistencyVerdict::ALL_TRUE; 3]).unwrap();
        assert_eq!(all.values(), [100.0; 6]);
        let mut vs = vec![ConsistencyVerdict::new([false, true, true, false, true, true]).unwrap(); 10];
        for v in vs.iter_mut().take(4) {
            v.style = true;
        }
        assert_eq!(aggregate_consistency(&vs).unwrap().style, 40.0);
    }

    #[test]
    fn deserialization_enforces_implication() {
        let bad = r#"{"exact_match":true,"information":true,"motivation":false,"style":true,"discourse":true,"context":true}"#;
        assert!(serde_json::from_str::<ConsistencyVerdict>(bad).is_err());
        let ok = serde_json::to_string(&ConsistencyVerdict::ALL_TRUE).unwrap();
        assert_eq!(serde_json::from_str::<ConsistencyVerdict>(&ok).unwrap(), ConsistencyVerdict::ALL_TRUE);
    }
}
