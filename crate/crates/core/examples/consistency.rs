//! Scores generated questions against the ones a journalist actually asked,
//! on six dimensions, then aggregates the verdicts.
//!
//! ```bash
//! cargo run --example consistency
//! ```

use interview_sim::agents::{stock, PromptSet};
use interview_sim::analysis::consistency::DIMENSIONS;
use interview_sim::analysis::{aggregate_consistency, parse_verdict, score_consistency, Exchange};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let context = [Exchange::new(
        "When did the plant close?",
        "It shut down in March, after the last contract ran out.",
    )];
    let pairs = [
        ("What happened to the workers?", "What happened to the workers?"),
        ("How many workers lost their jobs in March?", "How many people were laid off when it closed?"),
        ("Who owned the plant?", "Why did the contract run out?"),
        ("That must have been hard.", "How did the town react?"),
    ];
    let judge = stock::build("overlap-consistency", 0).expect("stock judge");
    let prompts = PromptSet::bundled();

    let mut verdicts = Vec::new();
    for (generated, real) in pairs {
        let v = score_consistency(generated, real, &context, &judge, &prompts)?;
        println!("{generated:<46} | {real}");
        println!("    {:?}", v.values());
        verdicts.push(v);
    }
    let scores = aggregate_consistency(&verdicts)?;
    println!();
    for (name, pct) in DIMENSIONS.iter().zip(scores.values()) {
        println!("{name:<12} {pct:>6.1}%");
    }

    // A reply that claims an exact match but disagrees elsewhere is rejected.
    let bad = "exact_match: yes\ninformation: no\nmotivation: yes\nstyle: yes\ndiscourse: yes\ncontext: yes";
    println!("\ninconsistent reply -> {:?}", parse_verdict(bad).err());
    Ok(())
}
