//! Ordered filter stages over all input transcripts, with a per-stage report.
//!
//! Stage order: keyword → dedup → middle speakers → length → gate → roles.
//! Every stage runs on every surviving transcript regardless of which input
//! file it came from.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::filters::{
    informational_gate, keyword_filter, length_filter, middle_speaker_filter, GateError, Reject, DEFAULT_KEYWORDS,
    MAX_SHORT_UTTERANCES,
};
use super::ingest::{read_mediasum, read_npr, IngestError};
use super::roles::{assign_roles, RoleError};
use super::Transcript;
use crate::agents::{Agent, PromptSet};

pub const STAGES: [&str; 6] = ["keyword", "dedup", "middle_speakers", "length", "gate", "roles"];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error("cannot scan input directory {path}: {reason}")]
    Scan { path: String, reason: String },
    #[error("cannot write {path}: {reason}")]
    Write { path: String, reason: String },
}

/// NPR file pairs are read before MediaSum files, so an episode present in
/// both keeps its NPR copy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineInputs {
    /// (utterances.csv, episodes.csv)
    pub npr: Vec<(PathBuf, PathBuf)>,
    pub mediasum: Vec<PathBuf>,
}

impl PipelineInputs {
    /// Finds `*utterances*.csv` files (each paired with `episodes.csv` in the
    /// same directory) and `*.json` MediaSum files, in sorted order.
    pub fn from_dir(dir: &Path) -> Result<Self, PipelineError> {
        let scan_err = |e: std::io::Error| PipelineError::Scan {
            path: dir.display().to_string(),
            reason: e.to_string(),
        };
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(scan_err)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        paths.sort();
        let mut inputs = PipelineInputs::default();
        for p in paths {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
            if name.ends_with(".csv") && name.contains("utterances") {
                inputs.npr.push((p.clone(), dir.join("episodes.csv")));
            } else if name.ends_with(".json") {
                inputs.mediasum.push(p);
            }
        }
        Ok(inputs)
    }

    pub fn read(&self) -> Result<Vec<Transcript>, PipelineError> {
        let mut all = Vec::new();
        for (u, e) in &self.npr {
            all.extend(read_npr(u, e)?);
        }
        for m in &self.mediasum {
            all.extend(read_mediasum(m)?);
        }
        Ok(all)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub keywords: Vec<String>,
    pub max_short_utterances: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            keywords: DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            max_short_utterances: MAX_SHORT_UTTERANCES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub input: usize,
    pub kept: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub transcript_id: String,
    pub stage: String,
    #[serde(flatten)]
    pub reason: Reject,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub total_input: usize,
    pub stages: Vec<StageCount>,
    pub rejections: Vec<Rejection>,
    pub kept: usize,
    /// Transcripts whose roles came from the tie rule.
    pub low_confidence: Vec<String>,
}

impl FilterReport {
    pub fn stage(&self, name: &str) -> Option<&StageCount> {
        self.stages.iter().find(|s| s.stage == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub corpus: Vec<Transcript>,
    pub report: FilterReport,
}

struct Run {
    survivors: Vec<Transcript>,
    report: FilterReport,
}

impl Run {
    fn stage(&mut self, name: &str, verdicts: Vec<Result<(), Reject>>) {
        let input = self.survivors.len();
        let mut kept = Vec::with_capacity(input);
        for (t, v) in std::mem::take(&mut self.survivors).into_iter().zip(verdicts) {
            match v {
                Ok(()) => kept.push(t),
                Err(reason) => self.report.rejections.push(Rejection {
                    transcript_id: t.id.clone(),
                    stage: name.to_string(),
                    reason,
                }),
            }
        }
        self.report.stages.push(StageCount {
            stage: name.to_string(),
            input,
            kept: kept.len(),
            rejected: input - kept.len(),
        });
        self.survivors = kept;
    }
}

pub fn run_pipeline(
    transcripts: Vec<Transcript>,
    config: &PipelineConfig,
    gate: &dyn Agent,
    prompts: &PromptSet,
) -> Result<PipelineOutput, PipelineError> {
    let mut run = Run {
        report: FilterReport {
            total_input: transcripts.len(),
            ..FilterReport::default()
        },
        survivors: transcripts,
    };

    let v = run.survivors.iter().map(|t| keyword_filter(t, &config.keywords)).collect();
    run.stage("keyword", v);

    let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
    let v = run
        .survivors
        .iter()
        .map(|t| match seen.insert(t.id.as_str(), ()) {
            None => Ok(()),
            Some(()) => Err(Reject::Duplicate { of: t.id.clone() }),
        })
        .collect();
    run.stage("dedup", v);

    let v = run.survivors.iter().map(middle_speaker_filter).collect();
    run.stage("middle_speakers", v);

    let v = run
        .survivors
        .iter()
        .map(|t| length_filter(t, config.max_short_utterances))
        .collect();
    run.stage("length", v);

    let v: Result<Vec<_>, GateError> = run
        .survivors
        .par_iter()
        .map(|t| informational_gate(t, gate, prompts))
        .collect();
    run.stage("gate", v?);

    let labeled: Vec<Result<Transcript, RoleError>> = run.survivors.iter().map(assign_roles).collect();
    let v = labeled
        .iter()
        .map(|r| match r {
            Ok(_) => Ok(()),
            Err(RoleError::SpeakerCount { found, .. }) => Err(Reject::RolesUnassignable { speakers: *found }),
        })
        .collect();
    run.stage("roles", v);
    let corpus: Vec<Transcript> = labeled.into_iter().filter_map(Result::ok).collect();

    run.report.kept = corpus.len();
    run.report.low_confidence = corpus.iter().filter(|t| t.low_confidence).map(|t| t.id.clone()).collect();
    Ok(PipelineOutput {
        corpus,
        report: run.report,
    })
}

/// Writes `corpus.jsonl` and `filter_report.json` into `dir`.
pub fn write_outputs(out: &PipelineOutput, dir: &Path) -> Result<(), PipelineError> {
    let err = |p: &Path, e: String| PipelineError::Write {
        path: p.display().to_string(),
        reason: e,
    };
    std::fs::create_dir_all(dir).map_err(|e| err(dir, e.to_string()))?;
    let corpus_path = dir.join("corpus.jsonl");
    let mut text = String::new();
    for t in &out.corpus {
        text.push_str(&serde_json::to_string(t).map_err(|e| err(&corpus_path, e.to_string()))?);
        text.push('\n');
    }
    std::fs::write(&corpus_path, text).map_err(|e| err(&corpus_path, e.to_string()))?;
    let report_path = dir.join("filter_report.json");
    let json = serde_json::to_string_pretty(&out.report).map_err(|e| err(&report_path, e.to_string()))?;
    std::fs::write(&report_path, json + "\n").map_err(|e| err(&report_path, e.to_string()))
}

pub fn read_corpus(path: &Path) -> Result<Vec<Transcript>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, l)| {
            serde_json::from_str(l).map_err(|e| IngestError::Format {
                path: path.display().to_string(),
                reason: format!("line {}: {e}", n + 1),
            })
        })
        .collect()
}
