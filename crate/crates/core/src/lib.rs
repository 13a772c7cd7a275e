//! Simulation environment and analysis toolkit for informational-interview
//! dialogue games.
//!
//! An interviewer agent questions a source agent that holds a fixed set of
//! information items and a persona. Each turn a judge rates how persuasive the
//! interviewer has been, and the source reveals a Beta-distributed share of
//! the relevant items it has not given up yet. Reward is the number of items
//! extracted.
//!
//! The same crate builds the corpus that scenarios are derived from and
//! analyzes how human interviewers behave.
//!
//! ## Examples
//!
//! Every capability has a runnable example under `examples/`:
//!
//! | example            | shows                                                        |
//! |--------------------|--------------------------------------------------------------|
//! | `simulate_batch`   | seeded batches in each game condition ([`batch`])            |
//! | `withholding`      | per-persona disclosure rates by level ([`withholding`])      |
//! | `corpus_pipeline`  | filter stages and their report ([`corpus`])                  |
//! | `derive_scenario`  | items, outline and persona from a transcript                 |
//! | `counterfactual`   | next-question generation under four prompt variants          |
//! | `consistency`      | six-dimension comparison of generated vs real questions      |
//! | `discourse`        | discourse-role labels binned by position                     |
//! | `correlation`      | Pearson's r with p-value, Cohen's kappa                      |
//! | `report`           | run logs aggregated into result tables ([`report`])          |
//! | `sessions`         | a human-source session driven through [`sessions`]           |
//! | `http_server`      | the session API over HTTP ([`server`])                       |
//! | `remote_agent`     | an OpenAI-compatible chat endpoint as one of the agents      |
//!
//! ```bash
//! cargo run --example simulate_batch -- 100 7
//! ```
//!
//! All stock agents in [`agents::stock`] run offline and deterministically, so
//! every example works without a model server.

pub mod agents;
pub mod analysis;
pub mod batch;
pub mod config;
pub mod corpus;
pub mod domain;
pub mod engine;
pub mod persona;
pub mod report;
pub mod rng;
pub mod server;
pub mod sessions;
pub mod withholding;
