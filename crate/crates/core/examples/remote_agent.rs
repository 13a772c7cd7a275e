//! Plays one game with the interviewer on an OpenAI-compatible chat endpoint
//! and the other roles on the stock agents.
//!
//! ```bash
//! export MY_LLM_KEY=...
//! cargo run --example remote_agent -- http://localhost:8000/v1 llama-3.1-8b-instruct MY_LLM_KEY
//! ```
//!
//! The same backend can be named in a config file and used from the CLI:
//!
//! ```toml
//! [backends.local]
//! base_url = "http://localhost:8000/v1"
//! model = "llama-3.1-8b-instruct"
//! api_key_env = "MY_LLM_KEY"
//! ```
//!
//! `interview-sim --config sim.toml simulate --interviewer local --out runs.jsonl`

use std::sync::Arc;

use interview_sim::agents::{AgentRole, PromptSet, RemoteConfig};
use interview_sim::config::{AgentSource, Config, RoleAgents};
use interview_sim::domain::{AblationMode, Scenario};
use interview_sim::engine::{play_game, GameSetup, SystemClock};
use interview_sim::persona::PersonaCatalog;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (Some(base_url), Some(model)) = (args.first(), args.get(1)) else {
        eprintln!("usage: remote_agent <base_url> <model> [api_key_env]");
        std::process::exit(2);
    };
    let mut backend = RemoteConfig::new(base_url.as_str(), model.as_str());
    backend.api_key_env = args.get(2).cloned();
    let mut config = Config::default();
    config.backends.insert("remote".into(), backend);

    let mut agents = RoleAgents::scripted();
    agents.interviewer = AgentSource::resolve("remote", AgentRole::Interviewer, &config)?;
    let scenario = Scenario::bundled().remove(0);
    let setup = GameSetup::new(scenario, &PersonaCatalog::bundled(), agents.instantiate(3), Arc::new(PromptSet::bundled()));
    let record = play_game(setup, AblationMode::Full, 3, &SystemClock);

    if let Some(why) = &record.aborted {
        eprintln!("game aborted: {why}");
    }
    for t in &record.state.turns {
        println!("Q{}: {}\nA{}: {}\n", t.index, t.question, t.index, t.answer);
    }
    println!(
        "reward {:.1}%, interviewer calls {}, tokens {}+{}",
        record.reward_percent, record.agent_calls.interviewer, record.tokens.prompt_tokens, record.tokens.completion_tokens
    );
    Ok(())
}
