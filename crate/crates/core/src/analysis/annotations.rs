//! Annotation JSONL records and the JSON + CSV report tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::consistency::{ConsistencyScores, DIMENSIONS};
use super::discourse::{DiscourseDistribution, DiscourseRole};
use super::{AnalysisError, ConsistencyVerdict};
use crate::batch::{read_jsonl, write_jsonl};

/// One line of an annotation file. Which optional fields are present depends
/// on the kind of annotation: discourse role, consistency verdict, or a
/// persuasion rating pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub transcript_id: String,
    pub turn_index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<DiscourseRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<ConsistencyVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub human_level: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub llm_level: Option<u8>,
}

impl Annotation {
    pub fn new(transcript_id: impl Into<String>, turn_index: usize) -> Self {
        Annotation {
            transcript_id: transcript_id.into(),
            turn_index,
            role: None,
            verdict: None,
            human_level: None,
            llm_level: None,
        }
    }
}

fn io_err(path: &Path, reason: impl ToString) -> AnalysisError {
    AnalysisError::Io {
        path: path.display().to_string(),
        reason: reason.to_string(),
    }
}

pub fn read_annotations<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, AnalysisError> {
    read_jsonl(path).map_err(|e| io_err(path, e))
}

pub fn write_annotations<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), AnalysisError> {
    write_jsonl(path, rows).map_err(|e| io_err(path, e))
}

fn write_text(path: &Path, text: String) -> Result<(), AnalysisError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AnalysisError> {
    let json = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    write_text(path, json + "\n")
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), AnalysisError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| io_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(path, e))?;
    write_text(path, String::from_utf8_lossy(&bytes).into_owned())
}

/// One row per labeled condition (e.g. a counterfactual variant), one column
/// per dimension: `<stem>.json` and `<stem>.csv`.
pub fn write_consistency_table(rows: &[(String, ConsistencyScores)], dir: &Path, stem: &str) -> Result<(), AnalysisError> {
    let json: Vec<serde_json::Value> = rows
        .iter()
        .map(|(name, s)| serde_json::json!({ "condition": name, "scores": s }))
        .collect();
    write_json(&dir.join(format!("{stem}.json")), &json)?;
    let mut header = vec!["condition".to_string(), "n".to_string()];
    header.extend(DIMENSIONS.iter().map(|d| d.to_string()));
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(name, s)| {
            let mut r = vec![name.clone(), s.n.to_string()];
            r.extend(s.values().iter().map(|v| format!("{v:.1}")));
            r
        })
        .collect();
    write_csv(&dir.join(format!("{stem}.csv")), &header, &body)
}

/// `<stem>.json` plus `<stem>.csv` with one row per bin and one column per
/// role; empty bins have blank cells.
pub fn write_distribution(dist: &DiscourseDistribution, dir: &Path, stem: &str) -> Result<(), AnalysisError> {
    write_json(&dir.join(format!("{stem}.json")), dist)?;
    let mut header = vec!["bin_lower".to_string(), "bin_upper".to_string(), "count".to_string()];
    header.extend(DiscourseRole::ALL.iter().map(|r| r.label().to_string()));
    let body: Vec<Vec<String>> = dist
        .bins
        .iter()
        .map(|b| {
            let mut r = vec![format!("{:.2}", b.lower), format!("{:.2}", b.upper), b.count.to_string()];
            r.extend(DiscourseRole::ALL.iter().map(|role| {
                if b.count == 0 {
                    String::new()
                } else {
                    format!("{:.4}", b.proportions.get(role).copied().unwrap_or(0.0))
                }
            }));
            r
        })
        .collect();
    write_csv(&dir.join(format!("{stem}.csv")), &header, &body)
}

pub fn write_json_report<T: Serialize>(value: &T, path: &Path) -> Result<(), AnalysisError> {
    write_json(path, value)
}
