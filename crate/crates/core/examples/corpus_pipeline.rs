//! Runs the filter pipeline over a directory of NPR CSV pairs and MediaSum
//! JSON files and prints the per-stage report.
//!
//! ```bash
//! cargo run --example corpus_pipeline -- crates/core/fixtures/corpus
//! ```

use std::path::PathBuf;

use interview_sim::agents::{stock, PromptSet};
use interview_sim::corpus::{run_pipeline, PipelineConfig, PipelineInputs};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/corpus"));
    let inputs = PipelineInputs::from_dir(&dir)?;
    let gate = stock::build("keyword-gate", 0).expect("stock gate");
    let out = run_pipeline(inputs.read()?, &PipelineConfig::default(), &gate, &PromptSet::bundled())?;

    println!("{:<16} {:>5} {:>5}", "stage", "in", "kept");
    for s in &out.report.stages {
        println!("{:<16} {:>5} {:>5}", s.stage, s.input, s.kept);
    }
    println!();
    for r in &out.report.rejections {
        println!("{:<8} {:<16} {}", r.transcript_id, r.stage, r.reason);
    }
    for t in out.corpus.iter().take(3) {
        let interviewer = t.speaker_with(interview_sim::corpus::SpeakerRole::Interviewer).unwrap_or("?");
        println!("\n{} ({} utterances), interviewer {interviewer}", t.id, t.utterances.len());
    }
    Ok(())
}
