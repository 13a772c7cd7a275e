//! Drives a human-source session through the store: the engine picks the
//! question and suggests which items to reveal, the "human" answers and
//! rates how persuasive each question was.
//!
//! ```bash
//! cargo run --example sessions
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use interview_sim::agents::PromptSet;
use interview_sim::config::Config;
use interview_sim::domain::Scenario;
use interview_sim::engine::SystemClock;
use interview_sim::persona::PersonaCatalog;
use interview_sim::sessions::{AgentSpecs, CreateSession, PendingAction, SessionMode, SessionStore, StoreOptions, TurnInput};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let store = SessionStore::open(StoreOptions {
        data_dir: dir.path().to_path_buf(),
        scenarios: Scenario::bundled(),
        catalog: PersonaCatalog::bundled(),
        prompts: Arc::new(PromptSet::bundled()),
        config: Config::default(),
        defaults: AgentSpecs::scripted(),
        clock: Arc::new(SystemClock),
    })?;
    let scenario_id = store.scenario_ids().remove(0);
    let mut view = store.create(CreateSession {
        scenario_id,
        mode: Some(SessionMode::HumanSource),
        ablation: None,
        seed: Some(5),
        agents: BTreeMap::new(),
    })?;
    let id = view.id.to_string();
    let brief = view.source_brief.clone().expect("human source gets a brief");
    println!("you are {}: {}\n", brief.persona_name, brief.persona_description);

    let mut rating = 1;
    while view.pending != PendingAction::Finished {
        let brief = view.source_brief.as_ref().expect("brief");
        println!("Q: {}", view.current_question.as_deref().unwrap_or(""));
        let reveal: Vec<&str> = brief
            .items
            .iter()
            .filter(|i| brief.suggested_ids.contains(&i.id))
            .map(|i| i.text.as_str())
            .collect();
        let answer = if reveal.is_empty() { "I'd rather not get into that.".to_string() } else { reveal.join(" ") };
        println!("A: {answer}");
        store.post_turn(
            &id,
            TurnInput {
                answer: Some(answer),
                ..TurnInput::default()
            },
        )?;
        view = store.post_rating(&id, rating)?;
        rating = rating % 5 + 1;
    }

    let outcome = view.outcome.expect("finished sessions have an outcome");
    println!("\nreward {}/{} ({:.1}%)", outcome.reward, outcome.item_count, outcome.reward_percent);
    for t in &view.history {
        println!("turn {}: judged {:?}, you said {:?}", t.index, t.judged_level, t.human_level);
    }
    println!("ratings log: {}", store.ratings_path().display());
    Ok(())
}
