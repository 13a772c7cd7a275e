mod common;

use std::sync::Arc;

use common::{completion, mock_chat_server};
use interview_sim::agents::{
    chat_complete, stock, Agent, AgentError, ChatMessage, PromptSet, RemoteChatAgent, RemoteConfig,
};
use interview_sim::domain::{AblationMode, Scenario};
use interview_sim::engine::{play_game, FixedClock, GameAgents, GameSetup};
use interview_sim::persona::PersonaCatalog;

fn fast(base_url: String) -> RemoteConfig {
    let mut c = RemoteConfig::new(base_url, "test-model");
    c.initial_backoff_ms = 1;
    c.max_backoff_ms = 4;
    c.timeout_secs = 5;
    c
}

#[test]
fn retries_server_errors_then_succeeds() {
    let server = mock_chat_server(Arc::new(|n, _| {
        if n < 2 {
            (500, "overloaded".into())
        } else {
            (200, completion("[4]"))
        }
    }));
    let agent = RemoteChatAgent::new("mock", fast(server.base_url()), 0.0).unwrap();
    let c = agent.complete(&[ChatMessage::user("rate me")]).unwrap();
    assert_eq!(c.text, "[4]");
    assert_eq!(c.usage.unwrap().prompt_tokens, 10);
    assert_eq!(server.hits(), 3);
}

#[test]
fn gives_up_after_max_retries() {
    let server = mock_chat_server(Arc::new(|_, _| (503, "down".into())));
    let mut config = fast(server.base_url());
    config.max_retries = 2;
    let agent = RemoteChatAgent::new("mock", config, 0.0).unwrap();
    let err = agent.complete(&[ChatMessage::user("x")]).unwrap_err();
    assert!(matches!(err, AgentError::Exhausted { attempts: 3, .. }), "{err}");
    assert_eq!(server.hits(), 3);
}

#[test]
fn nonconforming_body_and_client_errors_fail_fast() {
    let server = mock_chat_server(Arc::new(|_, _| (200, r#"{"choices": []}"#.into())));
    let agent = RemoteChatAgent::new("mock", fast(server.base_url()), 0.0).unwrap();
    assert!(matches!(agent.complete(&[ChatMessage::user("x")]), Err(AgentError::Protocol(_))));
    assert_eq!(server.hits(), 1);

    let server = mock_chat_server(Arc::new(|_, _| (401, "bad key".into())));
    let agent = RemoteChatAgent::new("mock", fast(server.base_url()), 0.0).unwrap();
    assert!(matches!(
        agent.complete(&[ChatMessage::user("x")]),
        Err(AgentError::Status { status: 401, .. })
    ));
    assert_eq!(server.hits(), 1);
}

#[test]
fn sends_model_temperature_and_bearer_key() {
    let server = mock_chat_server(Arc::new(|_, body| {
        let ok = body["model"] == "test-model" && body["temperature"] == 0.25 && body["messages"][0]["role"] == "system";
        (200, completion(if ok { "fine" } else { "wrong request" }))
    }));
    let mut config = fast(server.base_url());
    config.api_key_env = Some("INTERVIEW_SIM_TEST_MOCK_KEY".into());
    std::env::set_var("INTERVIEW_SIM_TEST_MOCK_KEY", "sekret");
    let agent = RemoteChatAgent::new("mock", config, 0.25).unwrap();
    let reply = chat_complete(&agent, &[ChatMessage::system("s"), ChatMessage::user("u")]).unwrap();
    assert_eq!(reply, "fine");
    assert_eq!(server.auth.lock().unwrap()[0].as_deref(), Some("Bearer sekret"));
}

#[test]
fn full_game_against_a_mock_backend() {
    // The mock routes each request to the matching stock agent, so the game
    // exercises the wire protocol for every role.
    let server = mock_chat_server(Arc::new(|_, body| {
        let messages: Vec<ChatMessage> = serde_json::from_value(body["messages"].clone()).unwrap();
        let system = messages.first().map(|m| m.content.clone()).unwrap_or_default();
        let name = if system.starts_with("You assess how persuaded") {
            "cue-judge"
        } else if system.starts_with("You match an interviewer") {
            "keyword-retriever"
        } else if system.starts_with("You are a source") {
            "template-source"
        } else {
            "outline-interviewer"
        };
        let agent = stock::build(name, 1).unwrap();
        (200, completion(&agent.complete(&messages).unwrap().text))
    }));
    let remote: Arc<dyn Agent> = Arc::new(RemoteChatAgent::new("mock", fast(server.base_url()), 0.0).unwrap());
    let agents = GameAgents {
        interviewer: remote.clone(),
        source: remote.clone(),
        judge: remote.clone(),
        retriever: remote,
    };
    let scenario = Scenario::bundled().remove(0);
    let setup = GameSetup::new(scenario, &PersonaCatalog::bundled(), agents, Arc::new(PromptSet::bundled()));
    let rec = play_game(setup, AblationMode::Full, 3, &FixedClock::default());
    assert_eq!(rec.aborted, None);
    assert_eq!(rec.state.turns.len(), rec.max_turns as usize);
    assert!(rec.state.turns.iter().all(|t| !t.judge_fallback), "judge replies must parse");
    assert!(rec.tokens.prompt_tokens > 0);
}
