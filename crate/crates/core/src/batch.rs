//! Many seeded games, run in parallel, with a summary of the results.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::PromptSet;
use crate::config::RoleAgents;
use crate::domain::{reward_percent, AblationMode, PersonaKind, RunRecord, Scenario};
use crate::engine::{play_game, Clock, EngineConfig, GameSetup};
use crate::persona::PersonaCatalog;
use crate::rng::SimRng;

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("no scenarios to play")]
    NoScenarios,
    #[error("{aborted} of {total} games aborted")]
    TooManyAborts {
        aborted: usize,
        total: usize,
        records: Vec<RunRecord>,
    },
    #[error("run log {path}: {reason}")]
    Log { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchConfig {
    pub games: usize,
    pub seed: u64,
    pub ablation: AblationMode,
    pub engine: EngineConfig,
}

/// Seed of game `index` in a batch seeded with `seed`.
pub fn game_seed(seed: u64, index: usize) -> u64 {
    SimRng::derive_seed(seed, &format!("batch/game/{index}"))
}

/// Aggregates over a set of runs. Aborted runs are counted but excluded from
/// every mean.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub games: usize,
    pub aborted: usize,
    pub mean_reward_percent: Option<f64>,
    pub reward_by_persona: BTreeMap<PersonaKind, f64>,
    /// Mean cumulative reward % after each turn; finished-early games carry
    /// their final value forward.
    pub reward_curve: Vec<f64>,
    /// Mean judged level over turns where the judge ran.
    pub judged_level_by_persona: BTreeMap<PersonaKind, f64>,
}

/// Order-independent mean: values are sorted before summing so any
/// permutation of the input gives the same bits.
pub fn stable_mean(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(values.iter().sum::<f64>() / values.len() as f64)
}

pub fn summarize(records: &[RunRecord]) -> Summary {
    let done: Vec<&RunRecord> = records.iter().filter(|r| r.aborted.is_none()).collect();
    let mut rewards: Vec<f64> = done.iter().map(|r| r.reward_percent).collect();

    let mut by_persona: BTreeMap<PersonaKind, Vec<f64>> = BTreeMap::new();
    let mut levels: BTreeMap<PersonaKind, Vec<f64>> = BTreeMap::new();
    for r in &done {
        by_persona.entry(r.persona).or_default().push(r.reward_percent);
        if r.ablation != AblationMode::NoPersuasion {
            levels
                .entry(r.persona)
                .or_default()
                .extend(r.state.turns.iter().map(|t| f64::from(t.judged_level.get())));
        }
    }

    let horizon = done.iter().map(|r| r.state.turns.len()).max().unwrap_or(0);
    let reward_curve = (0..horizon)
        .map(|t| {
            let mut at_t: Vec<f64> = done
                .iter()
                .map(|r| {
                    let upto = (t + 1).min(r.state.turns.len());
                    let got: usize = r.state.turns[..upto].iter().map(|x| x.disclosed_ids.len()).sum();
                    reward_percent(got as u32, r.item_count as usize)
                })
                .collect();
            stable_mean(&mut at_t).unwrap_or(0.0)
        })
        .collect();

    Summary {
        games: records.len(),
        aborted: records.len() - done.len(),
        mean_reward_percent: stable_mean(&mut rewards),
        reward_by_persona: by_persona
            .into_iter()
            .filter_map(|(k, mut v)| stable_mean(&mut v).map(|m| (k, m)))
            .collect(),
        reward_curve,
        judged_level_by_persona: levels
            .into_iter()
            .filter_map(|(k, mut v)| stable_mean(&mut v).map(|m| (k, m)))
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub records: Vec<RunRecord>,
    pub summary: Summary,
}

/// Plays `config.games` games. Game `i` uses scenario `i mod |scenarios|` and
/// seed [`game_seed`]`(seed, i)`. Records come back in game order regardless of
/// scheduling. More than half the games aborting fails the batch.
pub fn run_batch(
    scenarios: &[Scenario],
    catalog: &PersonaCatalog,
    prompts: Arc<PromptSet>,
    agents: &RoleAgents,
    config: &BatchConfig,
    clock: &dyn Clock,
) -> Result<BatchOutcome, BatchError> {
    if config.games > 0 && scenarios.is_empty() {
        return Err(BatchError::NoScenarios);
    }
    let records: Vec<RunRecord> = (0..config.games)
        .into_par_iter()
        .map(|i| {
            let seed = game_seed(config.seed, i);
            let scenario = scenarios[i % scenarios.len()].clone();
            let mut setup = GameSetup::new(scenario, catalog, agents.instantiate(seed), prompts.clone());
            setup.config = config.engine;
            play_game(setup, config.ablation, seed, clock)
        })
        .collect();
    let aborted = records.iter().filter(|r| r.aborted.is_some()).count();
    if aborted * 2 > records.len() {
        return Err(BatchError::TooManyAborts {
            aborted,
            total: records.len(),
            records,
        });
    }
    let summary = summarize(&records);
    Ok(BatchOutcome { records, summary })
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), BatchError> {
    let err = |e: String| BatchError::Log {
        path: path.display().to_string(),
        reason: e,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| err(e.to_string()))?;
    }
    let file = std::fs::File::create(path).map_err(|e| err(e.to_string()))?;
    let mut out = std::io::BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut out, row).map_err(|e| err(e.to_string()))?;
        out.write_all(b"\n").map_err(|e| err(e.to_string()))?;
    }
    out.flush().map_err(|e| err(e.to_string()))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, BatchError> {
    let err = |e: String| BatchError::Log {
        path: path.display().to_string(),
        reason: e,
    };
    let file = std::fs::File::open(path).map_err(|e| err(e.to_string()))?;
    let mut rows = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| err(format!("line {}: {e}", n + 1)))?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::FixedClock;

    fn bundled_scenarios() -> Vec<Scenario> {
        Scenario::load_dir(&Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")).unwrap()
    }

    fn run(games: usize, seed: u64, ablation: AblationMode) -> BatchOutcome {
        run_batch(
            &bundled_scenarios(),
            &PersonaCatalog::bundled(),
            Arc::new(PromptSet::bundled()),
            &RoleAgents::scripted(),
            &BatchConfig {
                games,
                seed,
                ablation,
                engine: EngineConfig::default(),
            },
            &FixedClock::default(),
        )
        .unwrap()
    }

    #[test]
    fn rerun_gives_identical_summary() {
        let a = run(10, 7, AblationMode::Full);
        let b = run(10, 7, AblationMode::Full);
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.records, b.records);
        assert_eq!(a.summary.games, 10);
    }

    #[test]
    fn zero_games_is_an_empty_summary() {
        let out = run(0, 7, AblationMode::Full);
        assert!(out.records.is_empty());
        assert_eq!(out.summary, Summary::default());
    }

    #[test]
    fn no_withholding_beats_full() {
        let full = run(16, 3, AblationMode::Full).summary.mean_reward_percent.unwrap();
        let easy = run(16, 3, AblationMode::NoWithholding).summary.mean_reward_percent.unwrap();
        assert!(easy > full, "{easy} <= {full}");
    }

    #[test]
    fn summary_is_permutation_invariant() {
        let mut records = run(12, 11, AblationMode::Full).records;
        let s = summarize(&records);
        records.reverse();
        records.swap(0, 5);
        assert_eq!(summarize(&records), s);
    }

    #[test]
    fn jsonl_round_trip() {
        let records = run(3, 1, AblationMode::NoPersuasion).records;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs/out.jsonl");
        write_jsonl(&path, &records).unwrap();
        assert_eq!(read_jsonl::<RunRecord>(&path).unwrap(), records);
    }
}
