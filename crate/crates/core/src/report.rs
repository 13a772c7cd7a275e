//! Aggregates run logs into result tables: reward by interviewer and
//! condition, reward and judged level by persona, reward by turn.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::batch::{stable_mean, summarize};
use crate::domain::{AblationMode, PersonaKind, RunRecord};

/// One interviewer backend across the three game conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub interviewer: String,
    /// Full game.
    pub hardest: Option<f64>,
    /// Persuasion ablated.
    pub intermediate: Option<f64>,
    /// Withholding ablated.
    pub easiest: Option<f64>,
    pub games: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaRow {
    pub persona: PersonaKind,
    pub reward_percent: f64,
    pub judged_level: Option<f64>,
    pub games: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub runs: usize,
    pub aborted: usize,
    pub conditions: Vec<ConditionRow>,
    /// Full-game runs only.
    pub personas: Vec<PersonaRow>,
    pub reward_curves: BTreeMap<AblationMode, Vec<f64>>,
    pub warnings: Vec<String>,
}

pub fn build_report(records: &[RunRecord]) -> Report {
    let mut report = Report {
        runs: records.len(),
        aborted: records.iter().filter(|r| r.aborted.is_some()).count(),
        ..Report::default()
    };
    if records.is_empty() {
        warn!("report requested for an empty run log");
        report.warnings.push("run log is empty".into());
        return report;
    }
    if report.aborted > 0 {
        report
            .warnings
            .push(format!("{} aborted runs excluded from means", report.aborted));
    }

    let mut by_interviewer: BTreeMap<&str, BTreeMap<AblationMode, Vec<f64>>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.aborted.is_none()) {
        by_interviewer
            .entry(r.backends.interviewer.as_str())
            .or_default()
            .entry(r.ablation)
            .or_default()
            .push(r.reward_percent);
    }
    report.conditions = by_interviewer
        .into_iter()
        .map(|(name, mut cells)| {
            let games = cells.values().map(Vec::len).sum();
            let mut cell = |m| cells.get_mut(&m).and_then(|v| stable_mean(v));
            ConditionRow {
                interviewer: name.to_string(),
                hardest: cell(AblationMode::Full),
                intermediate: cell(AblationMode::NoPersuasion),
                easiest: cell(AblationMode::NoWithholding),
                games,
            }
        })
        .collect();

    let full: Vec<RunRecord> = records
        .iter()
        .filter(|r| r.ablation == AblationMode::Full)
        .cloned()
        .collect();
    let s = summarize(&full);
    let mut counts: BTreeMap<PersonaKind, usize> = BTreeMap::new();
    for r in full.iter().filter(|r| r.aborted.is_none()) {
        *counts.entry(r.persona).or_default() += 1;
    }
    report.personas = s
        .reward_by_persona
        .iter()
        .map(|(&persona, &reward)| PersonaRow {
            persona,
            reward_percent: reward,
            judged_level: s.judged_level_by_persona.get(&persona).copied(),
            games: counts.get(&persona).copied().unwrap_or(0),
        })
        .collect();

    for mode in AblationMode::ALL {
        let subset: Vec<RunRecord> = records.iter().filter(|r| r.ablation == mode).cloned().collect();
        if !subset.is_empty() {
            report.reward_curves.insert(mode, summarize(&subset).reward_curve);
        }
    }
    report
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.1}")).unwrap_or_default()
}

/// Writes `report.json`, `conditions.csv`, `personas.csv` and `curves.csv`.
pub fn write_report(report: &Report, dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;

    let mut w = csv::Writer::from_path(dir.join("conditions.csv"))?;
    w.write_record(["interviewer", "hardest", "intermediate", "easiest", "games"])?;
    for r in &report.conditions {
        w.write_record([
            r.interviewer.clone(),
            cell(r.hardest),
            cell(r.intermediate),
            cell(r.easiest),
            r.games.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("personas.csv"))?;
    w.write_record(["persona", "reward_percent", "judged_level", "games"])?;
    for r in &report.personas {
        w.write_record([
            r.persona.as_str().to_string(),
            format!("{:.1}", r.reward_percent),
            r.judged_level.map(|x| format!("{x:.2}")).unwrap_or_default(),
            r.games.to_string(),
        ])?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("curves.csv"))?;
    w.write_record(["ablation", "turn", "reward_percent"])?;
    for (mode, curve) in &report.reward_curves {
        for (t, v) in curve.iter().enumerate() {
            w.write_record([mode.as_str().to_string(), (t + 1).to_string(), format!("{v:.3}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Plain-text rendering of the condition table.
pub fn render_conditions(report: &Report) -> String {
    let mut out = format!("{:<32} {:>8} {:>13} {:>8}\n", "interviewer", "hardest", "intermediate", "easiest");
    for r in &report.conditions {
        out.push_str(&format!(
            "{:<32} {:>8} {:>13} {:>8}\n",
            r.interviewer,
            cell(r.hardest),
            cell(r.intermediate),
            cell(r.easiest)
        ));
    }
    out
}
