//! Simulates each condition, writes one combined run log, and aggregates it
//! into the condition and persona tables.
//!
//! ```bash
//! cargo run --example report -- /tmp/report-demo
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use interview_sim::agents::PromptSet;
use interview_sim::batch::{read_jsonl, run_batch, write_jsonl, BatchConfig};
use interview_sim::config::RoleAgents;
use interview_sim::domain::{AblationMode, RunRecord, Scenario};
use interview_sim::engine::{EngineConfig, FixedClock};
use interview_sim::persona::PersonaCatalog;
use interview_sim::report::{build_report, render_conditions, write_report};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("interview-sim-report"));
    let scenarios = Scenario::bundled();
    let catalog = PersonaCatalog::bundled();
    let prompts = Arc::new(PromptSet::bundled());

    let mut records = Vec::new();
    for ablation in AblationMode::ALL {
        let config = BatchConfig {
            games: 40,
            seed: 11,
            ablation,
            engine: EngineConfig::default(),
        };
        records.extend(run_batch(&scenarios, &catalog, prompts.clone(), &RoleAgents::scripted(), &config, &FixedClock::default())?.records);
    }
    std::fs::create_dir_all(&out)?;
    let log = out.join("runs.jsonl");
    write_jsonl(&log, &records)?;

    let records: Vec<RunRecord> = read_jsonl(&log)?;
    let report = build_report(&records);
    write_report(&report, &out)?;
    print!("{}", render_conditions(&report));
    println!();
    for p in &report.personas {
        println!("{:<18} {:>6.1}%  level {:.2}", p.persona.display_name(), p.reward_percent, p.judged_level.unwrap_or(0.0));
    }
    println!("\ntables written to {}", out.display());
    Ok(())
}
