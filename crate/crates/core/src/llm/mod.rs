//! Completion backends. Agents talk to a language model only through
//! [`LlmBackend`]; the [`ScriptedBackend`] answers from an ordered rule list
//! for tests and reproducible runs, and the [`RemoteBackend`] speaks a
//! chat-completion protocol over HTTP.

mod remote;
mod scripted;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use remote::{RemoteBackend, RemoteConfig, TOKEN_ENV};
pub use scripted::{Matcher, ScriptedBackend, ScriptedRule};

/// Default context budget in tokens, approximated as characters / 4.
pub const DEFAULT_CONTEXT_LIMIT: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContextSegment {
    pub label: String,
    pub text: String,
}

impl ContextSegment {
    pub fn new(label: impl Into<String>, text: impl Into<String>) -> Self {
        ContextSegment { label: label.into(), text: text.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Decoding {
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for Decoding {
    fn default() -> Self {
        Decoding { temperature: 0.0, max_tokens: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptRequest {
    pub role_prompt: String,
    pub context: Vec<ContextSegment>,
    pub user_content: String,
    pub decoding: Decoding,
}

impl PromptRequest {
    pub fn new(role_prompt: impl Into<String>, user_content: impl Into<String>) -> Self {
        PromptRequest {
            role_prompt: role_prompt.into(),
            context: Vec::new(),
            user_content: user_content.into(),
            decoding: Decoding::default(),
        }
    }

    pub fn with_segment(mut self, label: impl Into<String>, text: impl Into<String>) -> Self {
        self.context.push(ContextSegment::new(label, text));
        self
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.role_prompt.trim().is_empty() {
            return Err(BackendError::InvalidRequest("role prompt is empty".into()));
        }
        if !(self.decoding.temperature >= 0.0) {
            return Err(BackendError::InvalidRequest("temperature must be non-negative".into()));
        }
        if self.decoding.max_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_tokens must be positive".into()));
        }
        Ok(())
    }

    /// Context segments and user content, without the role prompt. This is
    /// the user message sent to remote backends.
    pub fn render_user_message(&self) -> String {
        let mut out = String::new();
        for seg in &self.context {
            out.push('[');
            out.push_str(&seg.label);
            out.push_str("]\n");
            out.push_str(&seg.text);
            out.push_str("\n\n");
        }
        out.push_str(&self.user_content);
        out
    }

    /// Approximate token count of the full rendering.
    pub fn approx_tokens(&self) -> usize {
        render_request(self).chars().count().div_ceil(4)
    }

    /// Fails with [`BackendError::ContextOverflow`] when the rendering exceeds `limit` tokens.
    pub fn check_context(&self, limit: usize) -> Result<(), BackendError> {
        let tokens = self.approx_tokens();
        if tokens > limit {
            return Err(BackendError::ContextOverflow { tokens, limit });
        }
        Ok(())
    }
}

/// Canonical rendering: the role prompt, a blank line, each context segment
/// as `[label]\n<text>` followed by a blank line, then the user content.
pub fn render_request(request: &PromptRequest) -> String {
    format!("{}\n\n{}", request.role_prompt, request.render_user_message())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Completion {
    pub text: String,
    pub backend_id: String,
    pub latency: Duration,
    /// Set when the model explicitly refused; `text` may then be empty.
    pub refused: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("no scripted rule matched request {digest}")]
    NoRuleMatched { digest: String },
    #[error("remote backend timed out after {attempts} attempt(s)")]
    RemoteTimeout { attempts: u32 },
    #[error("remote protocol error: {0}")]
    RemoteProtocol(String),
    #[error("request needs ~{tokens} tokens, context limit is {limit}")]
    ContextOverflow { tokens: usize, limit: usize },
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("backend configuration error: {0}")]
    Config(String),
}

pub trait LlmBackend: Send + Sync {
    fn id(&self) -> &str;

    fn complete(&self, request: &PromptRequest) -> Result<Completion, BackendError>;
}

impl<B: LlmBackend + ?Sized> LlmBackend for &B {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, request: &PromptRequest) -> Result<Completion, BackendError> {
        (**self).complete(request)
    }
}

impl<B: LlmBackend + ?Sized> LlmBackend for Box<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, request: &PromptRequest) -> Result<Completion, BackendError> {
        (**self).complete(request)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_without_context() {
        let r = PromptRequest::new("ROLE", "question");
        assert_eq!(render_request(&r), "ROLE\n\nquestion");
    }

    #[test]
    fn render_keeps_segment_order() {
        let r = PromptRequest::new("ROLE", "q").with_segment("ENV", "snr=20").with_segment("APIS", "a, b");
        let text = render_request(&r);
        assert_eq!(text, "ROLE\n\n[ENV]\nsnr=20\n\n[APIS]\na, b\n\nq");
        assert!(text.find("[ENV]").unwrap() < text.find("[APIS]").unwrap());
        assert_eq!(text, render_request(&r.clone()));
    }

    #[test]
    fn context_limit() {
        let r = PromptRequest::new("R", "x".repeat(100));
        assert!(r.check_context(100).is_ok());
        assert_eq!(
            r.check_context(10),
            Err(BackendError::ContextOverflow { tokens: 26, limit: 10 })
        );
    }

    #[test]
    fn validation() {
        assert!(PromptRequest::new(" ", "q").validate().is_err());
        let mut r = PromptRequest::new("R", "q");
        r.decoding.temperature = -1.0;
        assert!(r.validate().is_err());
    }
}
