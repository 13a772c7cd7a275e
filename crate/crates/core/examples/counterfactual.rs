//! Asks a generator for the interviewer's next question at one point of a
//! transcript, under each prompting variant, and shows the real question.
//!
//! ```bash
//! cargo run --example counterfactual -- 5
//! ```

use std::path::PathBuf;

use interview_sim::agents::{stock, PromptSet};
use interview_sim::analysis::{exchanges, generate_counterfactual, CounterfactualVariant};
use interview_sim::corpus::ingest::read_mediasum;
use interview_sim::corpus::assign_roles;
use interview_sim::domain::ObjectiveOutline;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let turn: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/npr85.json");
    let transcript = assign_roles(&read_mediasum(&path)?.remove(0))?;
    let history = exchanges(&transcript)?;
    let outline = ObjectiveOutline {
        source_bio: "Blues singer from Detroit, later a Raelette and a Stax recording artist.".into(),
        context: "A look back at a long career in rhythm and blues.".into(),
        objectives: vec!["Her early career in Detroit".into(), "What she is working on now".into()],
    };
    let generator = stock::build("followup-generator", 1).expect("stock generator");
    let prompts = PromptSet::bundled();

    println!("turn {turn} of {}", history.len());
    println!("{:<12} {}", "real", history[turn - 1].question);
    for variant in CounterfactualVariant::ALL {
        let outline = variant.needs_outline().then_some(&outline);
        let q = generate_counterfactual(&transcript, turn, variant, outline, &generator, &prompts)?;
        println!("{:<12} {q}", variant.as_str());
    }
    Ok(())
}
