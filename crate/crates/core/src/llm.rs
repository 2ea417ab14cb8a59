//! Text-completion clients: an OpenAI-compatible chat adapter and a scripted
//! client for tests.

use std::collections::VecDeque;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Serialize, Deserialize)]
pub enum LlmError {
    #[error("LLM endpoint unavailable: {0}")]
    Unavailable(String),
    #[error("unexpected LLM response: {0}")]
    BadResponse(String),
    #[error("scripted LLM has no reply left for prompt")]
    Exhausted,
}

/// `complete` must be reentrant; implementations are shared across threads.
pub trait LlmClient: Send + Sync {
    fn id(&self) -> String;
    fn complete(&self, prompt: &str) -> Result<String, LlmError>;
}

type Responder = Box<dyn Fn(&str) -> Result<String, LlmError> + Send + Sync>;

/// Deterministic client driven by a closure or a fixed reply queue.
pub struct ScriptedLlm {
    id: String,
    responder: Responder,
}

impl ScriptedLlm {
    pub fn from_fn(
        id: impl Into<String>,
        f: impl Fn(&str) -> Result<String, LlmError> + Send + Sync + 'static,
    ) -> Self {
        Self { id: id.into(), responder: Box::new(f) }
    }

    /// Same reply for every prompt.
    pub fn fixed(reply: impl Into<String>) -> Self {
        let reply = reply.into();
        Self::from_fn("scripted-fixed", move |_| Ok(reply.clone()))
    }

    /// Replies in order; errors with [`LlmError::Exhausted`] afterwards.
    pub fn sequence<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        let queue: Mutex<VecDeque<String>> = Mutex::new(replies.into_iter().map(Into::into).collect());
        Self::from_fn("scripted-sequence", move |_| {
            queue.lock().expect("scripted queue lock").pop_front().ok_or(LlmError::Exhausted)
        })
    }
}

impl LlmClient for ScriptedLlm {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        (self.responder)(prompt)
    }
}

/// Chat-completions client (`POST {endpoint}` with `messages`), temperature 0.
#[derive(Debug, Clone)]
pub struct HttpChatClient {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl LlmClient for HttpChatClient {
    fn id(&self) -> String {
        self.model.clone()
    }

    fn complete(&self, prompt: &str) -> Result<String, LlmError> {
        let agent: ureq::Agent = ureq::Agent::config_builder().timeout_global(Some(self.timeout)).build().into();
        let mut req = agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let body = serde_json::json!({
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut resp = req.send_json(&body).map_err(|e| LlmError::Unavailable(e.to_string()))?;
        let parsed: ChatResponse = resp.body_mut().read_json().map_err(|e| LlmError::BadResponse(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| LlmError::BadResponse("no choices".into()))
    }
}
