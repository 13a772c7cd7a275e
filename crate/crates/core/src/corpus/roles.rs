//! Interviewer/source labeling by question-mark counts.

use std::collections::BTreeMap;

use thiserror::Error;

use super::filters::middle_speakers;
use super::{SpeakerRole, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoleError {
    #[error("{id}: need exactly two core speakers, found {found}")]
    SpeakerCount { id: String, found: usize },
}

fn first_seen(t: &Transcript) -> Vec<&str> {
    let mut order: Vec<&str> = Vec::new();
    for u in &t.utterances {
        if !order.contains(&u.speaker.as_str()) {
            order.push(&u.speaker);
        }
    }
    order
}

/// Labels the speaker with strictly more `?` characters as interviewer and the
/// other as source. On a tie the first of the two to ask a question (or, if
/// neither asks, the first to speak) becomes interviewer and `low_confidence`
/// is set. When more than two people speak overall, the core pair is taken
/// from the middle window and everyone else is labeled `Other`.
pub fn assign_roles(t: &Transcript) -> Result<Transcript, RoleError> {
    let everyone = first_seen(t);
    let core: Vec<&str> = if everyone.len() > 2 {
        let middle = middle_speakers(t);
        everyone.iter().copied().filter(|s| middle.contains(s)).collect()
    } else {
        everyone.clone()
    };
    if core.len() != 2 {
        return Err(RoleError::SpeakerCount {
            id: t.id.clone(),
            found: core.len(),
        });
    }
    let count = |s: &str| -> usize {
        t.utterances
            .iter()
            .filter(|u| u.speaker == s)
            .map(|u| u.text.matches('?').count())
            .sum()
    };
    let (a, b) = (core[0], core[1]);
    let (qa, qb) = (count(a), count(b));
    let (interviewer, low_confidence) = if qa != qb {
        (if qa > qb { a } else { b }, false)
    } else {
        let first_asker = t
            .utterances
            .iter()
            .find(|u| (u.speaker == a || u.speaker == b) && u.text.contains('?'))
            .map(|u| u.speaker.as_str());
        (first_asker.unwrap_or(a), true)
    };
    let roles: BTreeMap<String, SpeakerRole> = everyone
        .iter()
        .map(|s| {
            let role = if *s == interviewer {
                SpeakerRole::Interviewer
            } else if core.contains(s) {
                SpeakerRole::Source
            } else {
                SpeakerRole::Other
            };
            (s.to_string(), role)
        })
        .collect();
    let mut out = t.clone();
    out.roles = Some(roles);
    out.low_confidence = low_confidence;
    Ok(out)
}
