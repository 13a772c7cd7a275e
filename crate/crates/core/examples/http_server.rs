//! Starts the session API on an ephemeral port and plays a human-interviewer
//! session over HTTP.
//!
//! ```bash
//! cargo run --example http_server
//! ```

use std::net::SocketAddr;
use std::sync::Arc;

use interview_sim::agents::PromptSet;
use interview_sim::config::Config;
use interview_sim::domain::Scenario;
use interview_sim::engine::SystemClock;
use interview_sim::persona::PersonaCatalog;
use interview_sim::server::router;
use interview_sim::sessions::{AgentSpecs, SessionStore, StoreOptions};
use serde_json::{json, Value};

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
    let app = router(Arc::new(store), None);

    let rt = tokio::runtime::Runtime::new()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind(SocketAddr::from(([127, 0, 0, 1], 0))))?;
    let base = format!("http://{}", listener.local_addr()?);
    rt.spawn(async move { axum::serve(listener, app).await });

    let http = reqwest::blocking::Client::new();
    let scenarios: Vec<String> = http.get(format!("{base}/scenarios")).send()?.json()?;
    let created: Value = http
        .post(format!("{base}/sessions"))
        .json(&json!({ "scenario_id": scenarios[0], "mode": "human_interviewer", "seed": 1 }))
        .send()?
        .json()?;
    let id = created["id"].as_str().unwrap_or_default().to_string();
    println!("session {id}");
    println!("outline: {}\n", created["outline"]);

    let objectives: Vec<String> = serde_json::from_value(created["outline"]["objectives"].clone())?;
    let mut view = created;
    for objective in objectives.iter().cycle() {
        if view["pending"] == "finished" {
            break;
        }
        let resp = http
            .post(format!("{base}/sessions/{id}/turn"))
            .json(&json!({ "question": format!("Can you tell me about {}?", objective.to_lowercase()) }))
            .send()?;
        let status = resp.status();
        view = resp.json()?;
        let last = &view["history"][view["turns_taken"].as_u64().unwrap_or(1) as usize - 1];
        println!("[{status}] Q: {}\n      A: {}", last["question"], last["answer"]);
    }
    println!("\noutcome: {}", view["outcome"]);

    let late = http
        .post(format!("{base}/sessions/{id}/turn"))
        .json(&json!({ "question": "One more?" }))
        .send()?;
    println!("posting after the end -> {}", late.status());
    Ok(())
}
