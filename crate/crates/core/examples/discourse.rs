//! Labels every interviewer turn of a transcript with a discourse role and
//! bins the labels by relative position.
//!
//! ```bash
//! cargo run --example discourse
//! ```

use std::path::PathBuf;

use interview_sim::agents::{stock, PromptSet};
use interview_sim::analysis::discourse::label_transcript;
use interview_sim::analysis::{discourse_distribution, DiscourseRole};
use interview_sim::corpus::assign_roles;
use interview_sim::corpus::ingest::read_mediasum;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/npr85.json");
    let transcript = assign_roles(&read_mediasum(&path)?.remove(0))?;
    let judge = stock::build("heuristic-discourse", 0).expect("stock labeler");
    let labels = label_transcript(&transcript, &judge, &PromptSet::bundled())?;
    for l in &labels {
        println!("{:>3}/{:<3} {}", l.turn_index, l.total_turns, l.role.label());
    }

    let pairs: Vec<(f64, DiscourseRole)> = labels.iter().map(|l| (l.position(), l.role)).collect();
    let dist = discourse_distribution(&pairs, 5)?;
    println!();
    for b in &dist.bins {
        let top = b
            .proportions
            .iter()
            .max_by(|x, y| x.1.total_cmp(y.1))
            .map(|(r, p)| format!("{} {:.0}%", r.label(), p * 100.0))
            .unwrap_or_default();
        println!("({:.1}, {:.1}]  n={:<3} {top}", b.lower, b.upper, b.count);
    }
    Ok(())
}
