//! Named scripted agents that read the bundled prompt formats.
//!
//! These are the offline stand-ins for hosted models: each one parses the
//! rendered prompt it receives and answers with a deterministic heuristic.
//! The "stochastic" ones draw their noise from [`prompt_rng`], keyed by the
//! agent seed and the full prompt, so a run is reproducible from its seed.

use std::collections::BTreeSet;

use rand_core::RngCore;

use super::scripted::{last_user, prompt_rng, system_text};
use super::{AgentError, ChatMessage, ChatRole, ScriptedAgent};

pub const STOCK_AGENTS: &[(&str, &str)] = &[
    ("echo", "replies with the last user message"),
    ("outline-interviewer", "asks about each outline objective in turn, sometimes with a rapport phrase"),
    ("keyword-retriever", "marks items that share a content word with the question"),
    ("cue-judge", "scores persona cue phrases and acknowledgements in the window, plus noise"),
    ("template-source", "states the disclosed items in a persona voice, or deflects"),
    ("keyword-gate", "rejects call-in, panel and debate formats"),
    ("heuristic-discourse", "labels interviewer utterances by surface cues"),
    ("overlap-consistency", "judges question pairs by word overlap"),
    ("followup-generator", "asks about the last answer or an open objective"),
    ("extractive-summarizer", "extracts item sentences and keyword objectives"),
];

/// Builds the stock agent called `name`; `seed` keys its noise.
pub fn build(name: &str, seed: u64) -> Option<ScriptedAgent> {
    let name = name.strip_prefix("scripted:").unwrap_or(name);
    let id = format!("scripted:{name}");
    let agent = match name {
        "echo" => ScriptedAgent::echo(),
        "outline-interviewer" => ScriptedAgent::new(id, move |m| Ok(outline_interviewer(seed, m))),
        "keyword-retriever" => ScriptedAgent::new(id, |m| Ok(keyword_retriever(m))),
        "cue-judge" => ScriptedAgent::new(id, move |m| Ok(cue_judge(seed, m))),
        "template-source" => ScriptedAgent::new(id, |m| Ok(template_source(m))),
        "keyword-gate" => ScriptedAgent::new(id, |m| Ok(keyword_gate(m))),
        "heuristic-discourse" => ScriptedAgent::new(id, |m| Ok(heuristic_discourse(m))),
        "overlap-consistency" => ScriptedAgent::new(id, |m| Ok(overlap_consistency(m))),
        "followup-generator" => ScriptedAgent::new(id, move |m| Ok(followup_generator(seed, m))),
        "extractive-summarizer" => ScriptedAgent::new(id, extractive_summarizer),
        _ => return None,
    };
    Some(agent)
}

const STOPWORDS: &[&str] = &[
    "about", "after", "again", "all", "also", "and", "any", "are", "because", "been", "before", "being", "between",
    "both", "but", "can", "could", "describe", "did", "does", "doing", "during", "each", "few", "for", "from",
    "further", "had", "has", "have", "having", "her", "here", "hers", "him", "his", "how", "into", "its", "just",
    "more", "most", "much", "need", "not", "now", "off", "once", "only", "other", "our", "ours", "out", "over",
    "own", "same", "say", "she", "should", "some", "such", "tell", "than", "that", "the", "their", "theirs",
    "them", "then", "there", "these", "they", "thing", "things", "think", "this", "those", "through", "too",
    "under", "until", "very", "walk", "was", "way", "were", "what", "when", "where", "which", "while", "who",
    "whom", "why", "will", "with", "would", "you", "your", "yours", "yes", "yeah", "well", "really", "know",
    "like", "going", "get", "got", "let", "lot", "make", "made", "right", "see", "okay", "mean", "want",
];

/// Lowercased alphanumeric words of length ≥ 3 that are not stopwords.
pub fn content_tokens(text: &str) -> BTreeSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .map(str::to_lowercase)
        .filter(|w| w.chars().count() >= 3 && !STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Rapport phrases the offline interviewer mixes in; drawn from every
/// persona's cue list plus a few generic acknowledgements.
const RAPPORT: &[&str] = &[
    "I will be as fair as possible.",
    "I appreciate your honesty.",
    "Ah I see.",
    "I imagine there's more to the story.",
    "Just to be clear, are you saying that?",
    "I see why you made that choice.",
    "It's understandable.",
    "What were the key points, in your view?",
    "I understand, keep going.",
    "Take your time.",
    "I'd love your take.",
    "Your insights are valuable.",
    "It's okay to be unsure.",
    "Thank you, that's helpful.",
];

const ACKNOWLEDGEMENTS: &[&str] = &["thank", "appreciate", "understand", "i see", "fair", "helpful"];

fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn pick<'a, T>(rng: &mut impl RngCore, items: &'a [T]) -> &'a T {
    &items[(uniform(rng) * items.len() as f64) as usize % items.len()]
}

fn labelled_lines<'a>(text: &'a str, prefix: &str) -> Vec<&'a str> {
    text.lines()
        .filter_map(|l| l.trim().strip_prefix(prefix))
        .map(str::trim)
        .collect()
}

fn after_colon(line: &str) -> &str {
    line.split_once(':').map(|(_, r)| r.trim()).unwrap_or(line)
}

/// `- ` bullets directly following the line that ends with `marker`.
fn bullets_after<'a>(text: &'a str, marker: &str) -> Vec<&'a str> {
    let mut lines = text.lines().skip_while(|l| !l.trim_end().ends_with(marker));
    if lines.next().is_none() {
        return Vec::new();
    }
    lines
        .map(str::trim)
        .take_while(|l| l.starts_with("- "))
        .map(|l| l[2..].trim())
        .collect()
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) if !s.chars().nth(1).is_some_and(char::is_uppercase) => f.to_lowercase().chain(c).collect(),
        _ => s.to_string(),
    }
}

fn outline_interviewer(seed: u64, messages: &[ChatMessage]) -> String {
    let system = system_text(messages);
    let objectives: Vec<&str> = labelled_lines(system, "Objective ").into_iter().map(after_colon).collect();
    let turn = messages.iter().filter(|m| m.role == ChatRole::Assistant).count();
    let mut rng = prompt_rng(seed, "outline-interviewer", messages);
    let topic = if objectives.is_empty() {
        "your work".to_string()
    } else {
        // Start offset depends only on the outline, so a game visits objectives in a fixed rotation.
        let mut start = prompt_rng(seed, "outline-interviewer/start", &messages[..1]);
        let offset = (uniform(&mut start) * objectives.len() as f64) as usize;
        lower_first(objectives[(offset + turn) % objectives.len()].trim_end_matches('.'))
    };
    let forms = [
        "What can you tell me about {}?",
        "How would you describe {}?",
        "Could you walk me through {}?",
    ];
    let question = pick(&mut rng, &forms).replace("{}", &topic);
    if uniform(&mut rng) < 0.5 {
        format!("{} {question}", pick(&mut rng, RAPPORT))
    } else {
        question
    }
}

fn keyword_retriever(messages: &[ChatMessage]) -> String {
    let user = last_user(messages).unwrap_or_default();
    let question = labelled_lines(user, "Question:").first().copied().unwrap_or("");
    let q = content_tokens(question);
    let ids: Vec<String> = labelled_lines(user, "Information item #")
        .into_iter()
        .filter_map(|l| {
            let (id, text) = l.split_once(':')?;
            let id: u32 = id.trim().parse().ok()?;
            (!content_tokens(text).is_disjoint(&q)).then(|| id.to_string())
        })
        .collect();
    format!("[{}]", ids.join(", "))
}

fn normalize(s: &str) -> String {
    s.to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn cue_judge(seed: u64, messages: &[ChatMessage]) -> String {
    let user = last_user(messages).unwrap_or_default();
    if user.contains("has not started") {
        return "No exchanges yet. [2]".to_string();
    }
    let cues: Vec<String> = bullets_after(system_text(messages), "persuade this persona:")
        .into_iter()
        .map(|c| normalize(c.trim_end_matches("...")))
        .filter(|c| !c.is_empty())
        .collect();
    let mut score: f64 = 0.0;
    for line in labelled_lines(user, "Interviewer:") {
        let line = normalize(line);
        if cues.iter().any(|c| line.contains(c.as_str())) {
            score += 1.0;
        } else if ACKNOWLEDGEMENTS.iter().any(|a| line.contains(a)) {
            score += 0.5;
        }
    }
    let mut rng = prompt_rng(seed, "cue-judge", messages);
    let u = uniform(&mut rng);
    let noise = if u < 0.25 {
        -1
    } else if u < 0.75 {
        0
    } else {
        1
    };
    let level = (2 + (score.min(2.0) as i64) + noise).clamp(1, 5);
    format!("Cue score {score:.1}. [{level}]")
}

fn persona_voice(persona: &str) -> (&'static str, &'static str) {
    match persona {
        "Anxious" => ("I'm not sure I should be saying this, but", "I'm not sure I should talk about that."),
        "Avoidant" => ("Briefly,", "That's not really something I want to get into."),
        "Adversarial" => ("If you must know,", "Maybe if you did your homework you wouldn't need to ask."),
        "Defensive" => ("To be clear, and this was out of our hands,", "That criticism isn't fair to us."),
        "Straightforward" => ("Sure.", "I don't have anything to add on that."),
        "Poor Explainer" => ("Uh, well, so, the thing is,", "Uh, it's, well, complicated, I guess."),
        "Dominating" => ("Let me tell you what matters here.", "Let me talk about something more important instead."),
        "Clueless" => ("Oh, right, I think", "Oh, I'm not too sure about that..."),
        _ => ("", "I'd rather not say."),
    }
}

fn template_source(messages: &[ChatMessage]) -> String {
    let persona = labelled_lines(system_text(messages), "Persona:").first().copied().unwrap_or("");
    let user = last_user(messages).unwrap_or_default();
    let items = bullets_after(user, "reveal nothing else:");
    let (opener, deflect) = persona_voice(persona);
    if items.is_empty() {
        deflect.to_string()
    } else {
        let body = items.join(" ");
        let body = if opener.ends_with(['.', '?', '!']) || opener.is_empty() {
            body
        } else {
            lower_first(&body)
        };
        format!("{opener} {body}").trim().to_string()
    }
}

const GATE_REJECT: &[&str] = &["caller", "callers", "listener", "panel", "panelists", "debate", "quiz", "roundtable"];

fn keyword_gate(messages: &[ChatMessage]) -> String {
    let user = last_user(messages).unwrap_or_default();
    let dialogue = user
        .split_once("dialogue:")
        .map(|(_, r)| r.split("By reading through").next().unwrap_or(r))
        .unwrap_or(user);
    let words: BTreeSet<String> = dialogue
        .split(|c: char| !c.is_alphanumeric())
        .map(str::to_lowercase)
        .collect();
    if GATE_REJECT.iter().any(|w| words.contains(*w)) {
        "This looks like a multi-party or call-in format. [NO]".to_string()
    } else {
        "The host asks and the guest answers. [YES]".to_string()
    }
}

fn heuristic_discourse(messages: &[ChatMessage]) -> String {
    let user = last_user(messages).unwrap_or_default();
    let question = labelled_lines(user, "Utterance to label:").first().copied().unwrap_or("");
    let previous = user.split("Utterance to label:").next().unwrap_or("");
    let last_answer = labelled_lines(previous, "Source:").last().copied();
    let lower = question.to_lowercase();
    let has = |needles: &[&str]| needles.iter().any(|n| lower.contains(n));
    let label = if last_answer.is_none() || has(&["welcome", "thanks for joining", "thank you for joining"]) {
        "Starting/Ending Remarks"
    } else if has(&["is that right", "correct?", "to confirm", "did you say", "is it true"]) {
        "Verification Question"
    } else if !question.contains('?') {
        "Acknowledgement Statement"
    } else if has(&["critics", "isn't it", "but wouldn't", "how can you", "don't you"]) {
        "Challenge Question"
    } else if has(&["more broadly", "broader", "bigger picture", "beyond", "in general"]) {
        "Broadening Question"
    } else if has(&["do you think", "will ", "predict", "expect", "your view", "opinion"]) {
        "Opinion/Speculation Question"
    } else if last_answer.is_some_and(|a| !content_tokens(a).is_disjoint(&content_tokens(question))) {
        "Follow-Up Question"
    } else {
        "Topic-Transition Question"
    };
    format!("[{label}]")
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn overlap_consistency(messages: &[ChatMessage]) -> String {
    let user = last_user(messages).unwrap_or_default();
    let a = labelled_lines(user, "Question A (generated):").first().copied().unwrap_or("");
    let b = labelled_lines(user, "Question B (asked by the journalist):").first().copied().unwrap_or("");
    let (ta, tb) = (content_tokens(a), content_tokens(b));
    let j = jaccard(&ta, &tb);
    let exact = normalize(a) == normalize(b) || j >= 0.9;
    let first = |s: &str| s.split_whitespace().next().map(str::to_lowercase);
    let transcript = content_tokens(user.split("Question A").next().unwrap_or(""));
    let (la, lb) = (a.split_whitespace().count().max(1) as f64, b.split_whitespace().count().max(1) as f64);
    let verdicts = [
        ("exact_match", exact),
        ("information", exact || j >= 0.3),
        ("motivation", exact || (j >= 0.2 && a.contains('?') == b.contains('?'))),
        ("style", exact || (la / lb > 0.5 && la / lb < 2.0 && first(a) == first(b))),
        ("discourse", exact || a.contains('?') == b.contains('?')),
        (
            "context",
            exact || (!ta.is_disjoint(&transcript) == !tb.is_disjoint(&transcript)),
        ),
    ];
    let mut out = format!("Word overlap {j:.2}.\n");
    for (k, v) in verdicts {
        out.push_str(&format!("{k}: {}\n", if v { "yes" } else { "no" }));
    }
    out
}

fn followup_generator(seed: u64, messages: &[ChatMessage]) -> String {
    let user = last_user(messages).unwrap_or_default();
    let objectives: Vec<&str> = labelled_lines(user, "Objective ").into_iter().map(after_colon).collect();
    let last_answer = labelled_lines(user, "Source:").last().copied().unwrap_or("");
    let mut rng = prompt_rng(seed, "followup-generator", messages);
    let question = if !objectives.is_empty() && uniform(&mut rng) < 0.5 {
        format!(
            "Could we turn to {}?",
            lower_first(pick(&mut rng, &objectives).trim_end_matches('.'))
        )
    } else {
        let word = content_tokens(last_answer)
            .into_iter()
            .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)));
        match word {
            Some(w) => format!("Could you say more about {w}?"),
            None => "What happened next?".to_string(),
        }
    };
    if user.contains("step by step") {
        format!("The source last spoke about: {last_answer}\nQuestion: {question}")
    } else {
        question
    }
}

fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        current.push(c);
        if matches!(c, '.' | '!' | '?') {
            out.push(current.trim().to_string());
            current.clear();
        }
    }
    if !current.trim().is_empty() {
        out.push(current.trim().to_string());
    }
    out
}

fn extractive_summarizer(messages: &[ChatMessage]) -> Result<String, AgentError> {
    let user = last_user(messages).unwrap_or_default();
    let body = |intro: &str| {
        user.split_once(intro)
            .map(|(_, r)| r.split("\n\nSummarize").next().unwrap_or(r).trim().to_string())
            .unwrap_or_default()
    };
    if user.contains("Information item #1") {
        let text = body("during an interview.");
        let mut seen = BTreeSet::new();
        let items: Vec<String> = split_sentences(&text.replace('\n', " "))
            .into_iter()
            .filter(|s| !s.ends_with('?') && content_tokens(s).len() >= 4)
            .filter(|s| seen.insert(normalize(s)))
            .enumerate()
            .map(|(i, s)| format!("Information item #{}: {s}", i + 1))
            .collect();
        Ok(items.join("\n"))
    } else if user.contains("Objective 1:") {
        let text = body("during an interview.");
        let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let mut used = BTreeSet::new();
        let mut objectives = Vec::new();
        for q in lines.iter().filter(|l| l.contains('?')) {
            let mut words: Vec<String> = content_tokens(q).into_iter().filter(|w| !used.contains(w)).collect();
            words.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            words.truncate(3);
            if words.is_empty() {
                continue;
            }
            used.extend(words.iter().cloned());
            objectives.push(format!("Topics of {}", words.join(", ")));
            if objectives.len() == 4 {
                break;
            }
        }
        if objectives.is_empty() {
            objectives.push("General background".to_string());
        }
        let context: String = lines
            .first()
            .map(|l| l.split_whitespace().take(20).collect::<Vec<_>>().join(" "))
            .unwrap_or_default();
        let mut out = vec![
            "Source biography: A guest interviewed on the program.".to_string(),
            format!("Interview context: {context}"),
        ];
        out.extend(objectives.iter().enumerate().map(|(i, o)| format!("Objective {}: {o}", i + 1)));
        Ok(out.join("\n"))
    } else {
        Err(AgentError::Script("extractive-summarizer: unrecognized prompt".into()))
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::agents::chat_complete;
    use crate::agents::prompts::{
        parse_bracketed_ids, parse_bracketed_level, render_judge_prompt, render_retriever_prompt, PromptSet,
    };
    use crate::domain::{InfoItem, PersonaKind, PersuasionLevel, Turn};
    use crate::persona::PersonaCatalog;

    fn items(texts: &[&str]) -> Vec<InfoItem> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| InfoItem {
                id: i as u32 + 1,
                text: t.to_string(),
            })
            .collect()
    }

    #[test]
    fn every_listed_agent_builds() {
        for (name, _) in STOCK_AGENTS {
            assert!(build(name, 0).is_some(), "{name}");
            assert!(build(&format!("scripted:{name}"), 0).is_some());
        }
        assert!(build("nope", 0).is_none());
    }

    #[test]
    fn retriever_marks_overlapping_items() {
        let set = PromptSet::bundled();
        let fixture = items(&[
            "The budget was approved in March.",
            "Tariffs raised steel prices.",
            "Hiring slowed in the fall.",
            "The mayor resigned.",
            "Steel mills reopened in Ohio.",
        ]);
        let agent = build("keyword-retriever", 0).unwrap();
        let ask = |q: &str| {
            let msgs = render_retriever_prompt(&set, &fixture, q).unwrap();
            parse_bracketed_ids(&chat_complete(&agent, &msgs).unwrap()).unwrap()
        };
        // Hand check: only "steel" is shared, by items 2 and 5.
        assert_eq!(ask("What happened to steel?"), vec![2, 5]);
        assert_eq!(ask("What do you think about it?"), Vec::<u32>::new());
    }

    #[test]
    fn cue_judge_rewards_persona_cues() {
        let set = PromptSet::bundled();
        let catalog = PersonaCatalog::bundled();
        let profile = catalog.profile(PersonaKind::Anxious);
        let judge = build("cue-judge", 3).unwrap();
        let turn = |q: &str| Turn {
            index: 1,
            question: q.to_string(),
            answer: "ok".into(),
            relevant_ids: vec![],
            disclosed_ids: BTreeSet::new(),
            judged_level: PersuasionLevel::new(2).unwrap(),
            effective_level: PersuasionLevel::new(2).unwrap(),
            draw_fraction: None,
            judge_fallback: false,
            retriever_failed: false,
        };
        let level = |window: &[Turn]| {
            let msgs = render_judge_prompt(&set, profile, window).unwrap();
            parse_bracketed_level(&chat_complete(&judge, &msgs).unwrap()).unwrap().get()
        };
        assert_eq!(level(&[]), 2);
        let warm = [turn("I will be as fair as possible. Why?"), turn("I appreciate your honesty. And then?")];
        let cold = [turn("Why?"), turn("And then?")];
        assert!((3..=5).contains(&level(&warm)));
        assert!((1..=3).contains(&level(&cold)));
    }

    #[test]
    fn gate_rejects_call_in_shows() {
        let gate = build("keyword-gate", 0).unwrap();
        let ask = |d: &str| {
            chat_complete(
                &gate,
                &[ChatMessage::user(format!(
                    "Analyze this interview transcript that is in the form of a dialogue:\n{d}\nBy reading through the dialogue, ..."
                ))],
            )
            .unwrap()
        };
        assert!(ask("HOST: Our next caller is on the line.").contains("[NO]"));
        assert!(ask("HOST: What did you find? GUEST: Rust.").contains("[YES]"));
    }

    #[test]
    fn tokens_drop_stopwords_and_short_words() {
        let t = content_tokens("What can you tell me about the Steel tariffs, Bob?");
        assert_eq!(t, ["bob", "steel", "tariffs"].iter().map(|s| s.to_string()).collect());
    }
}
