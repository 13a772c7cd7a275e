//! Readers for the two raw corpus shapes.
//!
//! * NPR style: an utterance CSV with columns `episode, episode_order,
//!   speaker, utterance` joined to an episode CSV with `id, program, title,
//!   episode_date`. Extra columns are ignored.
//! * MediaSum style: a JSON array of `{id, program, date, speaker[], utt[]}`
//!   objects, optionally with `title`.
//!
//! NPR transcripts get the id `NPR-<episode>`, matching the MediaSum naming,
//! so the same episode from both sources deduplicates.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::{Transcript, Utterance};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {reason}")]
    Read { path: String, reason: String },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
}

fn read_err(path: &Path, e: impl ToString) -> IngestError {
    IngestError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

fn format_err(path: &Path, e: impl ToString) -> IngestError {
    IngestError::Format {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

#[derive(Deserialize)]
struct NprUtterance {
    episode: String,
    episode_order: u64,
    speaker: String,
    utterance: String,
}

#[derive(Deserialize)]
struct NprEpisode {
    id: String,
    #[serde(default)]
    program: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    episode_date: String,
}

/// Transcripts in order of first appearance in the utterance file.
pub fn read_npr(utterances: &Path, episodes: &Path) -> Result<Vec<Transcript>, IngestError> {
    let mut meta: BTreeMap<String, NprEpisode> = BTreeMap::new();
    let mut rdr = csv::Reader::from_path(episodes).map_err(|e| read_err(episodes, e))?;
    for row in rdr.deserialize::<NprEpisode>() {
        let ep = row.map_err(|e| format_err(episodes, e))?;
        meta.insert(ep.id.clone(), ep);
    }

    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, Vec<(u64, Utterance)>> = BTreeMap::new();
    let mut rdr = csv::Reader::from_path(utterances).map_err(|e| read_err(utterances, e))?;
    for row in rdr.deserialize::<NprUtterance>() {
        let u = row.map_err(|e| format_err(utterances, e))?;
        if !rows.contains_key(&u.episode) {
            order.push(u.episode.clone());
        }
        rows.entry(u.episode).or_default().push((
            u.episode_order,
            Utterance {
                speaker: u.speaker.trim().to_string(),
                text: u.utterance.trim().to_string(),
            },
        ));
    }

    Ok(order
        .into_iter()
        .map(|episode| {
            let mut utts = rows.remove(&episode).unwrap_or_default();
            utts.sort_by_key(|(k, _)| *k);
            let m = meta.get(&episode);
            Transcript {
                id: format!("NPR-{episode}"),
                program: m.map(|m| m.program.clone()).unwrap_or_default(),
                title: m.map(|m| m.title.clone()).unwrap_or_default(),
                date: m.map(|m| m.episode_date.clone()).unwrap_or_default(),
                utterances: utts.into_iter().map(|(_, u)| u).collect(),
                roles: None,
                low_confidence: false,
            }
        })
        .collect())
}

#[derive(Deserialize)]
struct MediaSumRecord {
    id: String,
    #[serde(default)]
    program: String,
    #[serde(default)]
    title: String,
    #[serde(default)]
    date: String,
    speaker: Vec<String>,
    utt: Vec<String>,
}

pub fn read_mediasum(path: &Path) -> Result<Vec<Transcript>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| read_err(path, e))?;
    let records: Vec<MediaSumRecord> = serde_json::from_str(&text).map_err(|e| format_err(path, e))?;
    records
        .into_iter()
        .map(|r| {
            if r.speaker.len() != r.utt.len() {
                return Err(format_err(
                    path,
                    format!("{}: {} speakers for {} utterances", r.id, r.speaker.len(), r.utt.len()),
                ));
            }
            Ok(Transcript {
                id: r.id,
                program: r.program,
                title: r.title,
                date: r.date,
                utterances: r
                    .speaker
                    .into_iter()
                    .zip(r.utt)
                    .map(|(s, t)| Utterance {
                        speaker: s.trim().to_string(),
                        text: t.trim().to_string(),
                    })
                    .collect(),
                roles: None,
                low_confidence: false,
            })
        })
        .collect()
}
