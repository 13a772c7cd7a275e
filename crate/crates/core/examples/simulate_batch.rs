//! Plays a seeded batch of games with the offline stock agents in each of the
//! three conditions and prints the mean reward.
//!
//! ```bash
//! cargo run --example simulate_batch -- 100 7
//! ```

use std::sync::Arc;

use interview_sim::agents::PromptSet;
use interview_sim::batch::{run_batch, BatchConfig};
use interview_sim::config::RoleAgents;
use interview_sim::domain::{AblationMode, Scenario};
use interview_sim::engine::{EngineConfig, FixedClock};
use interview_sim::persona::PersonaCatalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let games: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(60);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let scenarios = Scenario::bundled();
    let catalog = PersonaCatalog::bundled();
    let prompts = Arc::new(PromptSet::bundled());
    println!("{games} games per condition over {} scenarios, seed {seed}", scenarios.len());
    for ablation in AblationMode::ALL {
        let config = BatchConfig {
            games,
            seed,
            ablation,
            engine: EngineConfig::default(),
        };
        let out = run_batch(&scenarios, &catalog, prompts.clone(), &RoleAgents::scripted(), &config, &FixedClock::default())?;
        let mean = out.summary.mean_reward_percent.unwrap_or(0.0);
        println!("{:<16} {mean:>6.2}%", ablation.as_str());
        if ablation == AblationMode::Full {
            for (persona, reward) in &out.summary.reward_by_persona {
                println!("    {:<18} {reward:>6.2}%", persona.display_name());
            }
        }
    }
    Ok(())
}
