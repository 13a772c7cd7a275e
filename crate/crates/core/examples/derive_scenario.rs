//! Turns a role-labeled transcript into a game scenario: information items,
//! an outline that does not leak them, and a persona.
//!
//! ```bash
//! cargo run --example derive_scenario
//! ```

use std::path::PathBuf;

use interview_sim::agents::{stock, PromptSet};
use interview_sim::corpus::ingest::read_mediasum;
use interview_sim::corpus::{assign_roles, derive_scenario};
use interview_sim::domain::PersonaKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/npr85.json");
    let transcript = assign_roles(&read_mediasum(&path)?.remove(0))?;
    let summarizer = stock::build("extractive-summarizer", 0).expect("stock summarizer");
    let scenario = derive_scenario(&transcript, &summarizer, &PromptSet::bundled(), PersonaKind::PoorExplainer, 8)?;
    println!("{}", serde_json::to_string_pretty(&scenario)?);
    Ok(())
}
