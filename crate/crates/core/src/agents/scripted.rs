//! Deterministic in-process agents.

use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use super::{Agent, AgentError, AgentKind, ChatMessage, ChatRole, Completion};
use crate::rng::SimRng;

type ScriptFn = dyn Fn(&[ChatMessage]) -> Result<String, AgentError> + Send + Sync;

/// An agent backed by a Rust closure over the prompt.
#[derive(Clone)]
pub struct ScriptedAgent {
    id: String,
    script: Arc<ScriptFn>,
}

impl std::fmt::Debug for ScriptedAgent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScriptedAgent").field("id", &self.id).finish()
    }
}

impl ScriptedAgent {
    pub fn new<F>(id: impl Into<String>, script: F) -> Self
    where
        F: Fn(&[ChatMessage]) -> Result<String, AgentError> + Send + Sync + 'static,
    {
        ScriptedAgent {
            id: id.into(),
            script: Arc::new(script),
        }
    }

    /// Replies with the content of the last user message.
    pub fn echo() -> Self {
        ScriptedAgent::new("scripted:echo", |messages| {
            Ok(last_user(messages).unwrap_or_default().to_string())
        })
    }

    pub fn fixed(id: impl Into<String>, reply: impl Into<String>) -> Self {
        let reply = reply.into();
        ScriptedAgent::new(id, move |_| Ok(reply.clone()))
    }

    /// Picks `replies[k]`, where `k` is the number of assistant messages already
    /// in the conversation; the last reply repeats once the list runs out.
    /// Stateless, so one instance can serve concurrent sessions.
    pub fn by_turn(id: impl Into<String>, replies: Vec<String>) -> Self {
        assert!(!replies.is_empty(), "by_turn needs at least one reply");
        ScriptedAgent::new(id, move |messages| {
            let k = messages.iter().filter(|m| m.role == ChatRole::Assistant).count();
            Ok(replies[k.min(replies.len() - 1)].clone())
        })
    }

    /// Returns the replies in call order; the last one repeats.
    pub fn in_call_order(id: impl Into<String>, replies: Vec<String>) -> Self {
        assert!(!replies.is_empty(), "in_call_order needs at least one reply");
        let next = Mutex::new(0usize);
        ScriptedAgent::new(id, move |_| {
            let mut n = next.lock().unwrap_or_else(|e| e.into_inner());
            let reply = replies[(*n).min(replies.len() - 1)].clone();
            *n += 1;
            Ok(reply)
        })
    }

    /// Always fails with a script error.
    pub fn failing(id: impl Into<String>, message: impl Into<String>) -> Self {
        let message = message.into();
        ScriptedAgent::new(id, move |_| Err(AgentError::Script(message.clone())))
    }
}

impl Agent for ScriptedAgent {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AgentKind {
        AgentKind::Scripted
    }

    fn complete(&self, messages: &[ChatMessage]) -> Result<Completion, AgentError> {
        (self.script)(messages).map(|text| Completion { text, usage: None })
    }
}

pub fn last_user(messages: &[ChatMessage]) -> Option<&str> {
    messages
        .iter()
        .rev()
        .find(|m| m.role == ChatRole::User)
        .map(|m| m.content.as_str())
}

pub fn system_text(messages: &[ChatMessage]) -> &str {
    messages
        .iter()
        .find(|m| m.role == ChatRole::System)
        .map(|m| m.content.as_str())
        .unwrap_or("")
}

/// Random stream keyed by the full prompt, so a scripted agent's "noise" is a
/// pure function of `(seed, agent label, messages)`.
pub fn prompt_rng(seed: u64, label: &str, messages: &[ChatMessage]) -> SimRng {
    let mut hasher = Sha256::new();
    for m in messages {
        hasher.update([m.role as u8]);
        hasher.update((m.content.len() as u64).to_le_bytes());
        hasher.update(m.content.as_bytes());
    }
    let digest = hex::encode(&hasher.finalize()[..16]);
    SimRng::new(seed, &format!("{label}/{digest}"))
}
