use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{BackendError, Completion, LlmBackend, PromptRequest, DEFAULT_CONTEXT_LIMIT};

/// Environment variable holding the bearer token. Tokens are never read from
/// flags or files.
pub const TOKEN_ENV: &str = "LLM_API_TOKEN";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    pub timeout_secs: f64,
    pub context_limit: usize,
    /// Total attempts, counting the first one. Only timeouts are retried.
    pub max_attempts: u32,
    /// Wait before the first retry; doubles for each further retry.
    pub backoff_base_secs: f64,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "phy-agent-l2".into(),
            timeout_secs: 30.0,
            context_limit: DEFAULT_CONTEXT_LIMIT,
            max_attempts: 3,
            backoff_base_secs: 0.5,
        }
    }
}

/// Chat-completion client. The role prompt goes out as the system message and
/// the rendered context plus user content as the user message.
pub struct RemoteBackend {
    id: String,
    config: RemoteConfig,
    token: Option<String>,
    client: reqwest::blocking::Client,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig, token: Option<String>) -> Result<Self, BackendError> {
        if !(config.timeout_secs > 0.0) {
            return Err(BackendError::Config("timeout_secs must be positive".into()));
        }
        if config.max_attempts == 0 {
            return Err(BackendError::Config("max_attempts must be at least 1".into()));
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        Ok(RemoteBackend { id: format!("remote:{}", config.model), config, token, client })
    }

    /// Builds a client taking the token from [`TOKEN_ENV`].
    pub fn from_env(config: RemoteConfig) -> Result<Self, BackendError> {
        let token = std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty());
        Self::new(config, token)
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn body(&self, request: &PromptRequest) -> Value {
        json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.role_prompt},
                {"role": "user", "content": request.render_user_message()},
            ],
            "temperature": request.decoding.temperature,
            "max_tokens": request.decoding.max_tokens,
        })
    }

    fn send_once(&self, body: &Value) -> Result<String, reqwest::Error> {
        let mut req = self.client.post(&self.config.endpoint).json(body);
        if let Some(token) = &self.token {
            req = req.bearer_auth(token);
        }
        let resp = req.send()?.error_for_status()?;
        resp.text()
    }

    fn backoff(&self, retry: u32) -> Duration {
        Duration::from_secs_f64(self.config.backoff_base_secs * f64::from(1u32 << retry.min(16)))
    }
}

fn parse_response(text: &str) -> Result<(String, bool), BackendError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| BackendError::RemoteProtocol(format!("response is not JSON: {e}")))?;
    let message = v
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("message"))
        .ok_or_else(|| BackendError::RemoteProtocol("missing choices[0].message".into()))?;
    match message.get("content") {
        Some(Value::String(s)) if !s.is_empty() => Ok((s.clone(), false)),
        _ => match message.get("refusal") {
            Some(Value::String(_)) => Ok((String::new(), true)),
            _ => Err(BackendError::RemoteProtocol("missing choices[0].message.content".into())),
        },
    }
}

impl LlmBackend for RemoteBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, request: &PromptRequest) -> Result<Completion, BackendError> {
        request.validate()?;
        request.check_context(self.config.context_limit)?;
        let body = self.body(request);
        let start = Instant::now();
        for attempt in 1..=self.config.max_attempts {
            match self.send_once(&body) {
                Ok(text) => {
                    let (text, refused) = parse_response(&text)?;
                    return Ok(Completion {
                        text,
                        backend_id: self.id.clone(),
                        latency: start.elapsed(),
                        refused,
                    });
                }
                Err(e) if e.is_timeout() => {
                    if attempt < self.config.max_attempts {
                        std::thread::sleep(self.backoff(attempt - 1));
                    }
                }
                Err(e) => return Err(BackendError::RemoteProtocol(e.to_string())),
            }
        }
        Err(BackendError::RemoteTimeout { attempts: self.config.max_attempts })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_content_and_refusal() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"1. go"}}]}"#;
        assert_eq!(parse_response(ok).unwrap(), ("1. go".into(), false));
        let refusal = r#"{"choices":[{"message":{"content":null,"refusal":"no"}}]}"#;
        assert_eq!(parse_response(refusal).unwrap(), (String::new(), true));
        assert!(parse_response(r#"{"choices":[]}"#).is_err());
        assert!(parse_response("not json").is_err());
    }

    #[test]
    fn backoff_doubles() {
        let b = RemoteBackend::new(RemoteConfig::default(), None).unwrap();
        assert_eq!(b.backoff(0), Duration::from_millis(500));
        assert_eq!(b.backoff(1), Duration::from_secs(1));
        assert_eq!(b.backoff(2), Duration::from_secs(2));
    }

    #[test]
    fn wire_body_layout() {
        let b = RemoteBackend::new(RemoteConfig::default(), None).unwrap();
        let req = PromptRequest::new("ROLE", "question").with_segment("ENV", "snr=3");
        let body = b.body(&req);
        assert_eq!(body["messages"][0], json!({"role": "system", "content": "ROLE"}));
        assert_eq!(body["messages"][1]["content"], "[ENV]\nsnr=3\n\nquestion");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["max_tokens"], 1024);
    }
}
