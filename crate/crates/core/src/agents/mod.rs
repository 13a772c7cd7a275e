//! Uniform agent abstraction.
//!
//! Every role in the system (interviewer, source, judge, retriever, corpus
//! gate, summarizer, counterfactual generator) is an [`Agent`]: a function from
//! an ordered list of chat messages to assistant text. Two families exist:
//! [`RemoteChatAgent`] speaks the common chat-completion JSON protocol, and
//! [`ScriptedAgent`] is a deterministic in-process function used for tests,
//! fixtures and offline runs.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod prompts;
pub mod remote;
pub mod scripted;
pub mod stock;

pub use prompts::{PromptSet, PromptTemplate, TemplateError};
pub use remote::{RemoteChatAgent, RemoteConfig};
pub use scripted::ScriptedAgent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: ChatRole::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub usage: Option<TokenUsage>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AgentError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("gave up after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("scripted agent failed: {0}")]
    Script(String),
    #[error("agent misconfigured: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    RemoteChat,
    Scripted,
}

/// Role an agent plays; selects default sampling temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentRole {
    Interviewer,
    Source,
    Judge,
    Retriever,
    Gate,
    Summarizer,
    Generator,
}

impl AgentRole {
    pub fn default_temperature(self) -> f64 {
        match self {
            AgentRole::Interviewer | AgentRole::Source | AgentRole::Generator => 0.7,
            AgentRole::Judge | AgentRole::Retriever | AgentRole::Gate | AgentRole::Summarizer => 0.0,
        }
    }
}

impl fmt::Display for AgentRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AgentRole::Interviewer => "interviewer",
            AgentRole::Source => "source",
            AgentRole::Judge => "judge",
            AgentRole::Retriever => "retriever",
            AgentRole::Gate => "gate",
            AgentRole::Summarizer => "summarizer",
            AgentRole::Generator => "generator",
        };
        f.write_str(s)
    }
}

pub trait Agent: Send + Sync {
    fn id(&self) -> &str;
    fn kind(&self) -> AgentKind;
    fn complete(&self, messages: &[ChatMessage]) -> Result<Completion, AgentError>;
}

pub type AgentHandle = Arc<dyn Agent>;

/// Sends `messages` and returns only the assistant text.
pub fn chat_complete(agent: &dyn Agent, messages: &[ChatMessage]) -> Result<String, AgentError> {
    agent.complete(messages).map(|c| c.text)
}
