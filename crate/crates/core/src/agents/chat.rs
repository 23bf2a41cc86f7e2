//! Blocking client for OpenAI-style chat-completion endpoints.

use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::LlmConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChatError {
    #[error("request timed out ({attempts} attempts)")]
    Timeout { attempts: u32 },
    #[error("transport error after {attempts} attempts: {message}")]
    Transport { message: String, attempts: u32 },
    #[error("endpoint answered HTTP {code} ({attempts} attempts)")]
    Status { code: u16, attempts: u32 },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
}

/// One chat completion per call. Implementations handle their own retries.
pub trait ChatTransport: Send {
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, ChatError>;
}

/// Caps the number of chat requests in flight across threads.
#[derive(Debug)]
pub struct RequestLimiter {
    cap: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a>(&'a RequestLimiter);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut n = self.0.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.0.freed.notify_one();
    }
}

impl RequestLimiter {
    pub fn new(cap: usize) -> Self {
        Self {
            cap: cap.max(1),
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= self.cap {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
        Permit(self)
    }
}

enum Attempt {
    Retry(ChatError),
    Fatal(ChatError),
}

pub struct HttpChatClient {
    cfg: LlmConfig,
    agent: ureq::Agent,
    limiter: Option<Arc<RequestLimiter>>,
}

impl HttpChatClient {
    pub fn new(cfg: LlmConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            cfg,
            agent,
            limiter: None,
        }
    }

    pub fn with_limiter(mut self, limiter: Option<Arc<RequestLimiter>>) -> Self {
        self.limiter = limiter;
        self
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, body: &Value, attempts: u32) -> Result<String, Attempt> {
        let _permit = self.limiter.as_ref().map(|l| l.acquire());
        let mut req = self.agent.post(&self.endpoint());
        if let Ok(key) = std::env::var(&self.cfg.api_key_env) {
            if !key.is_empty() {
                req = req.header("Authorization", &format!("Bearer {key}"));
            }
        }
        let mut resp = match req.send_json(body) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Err(Attempt::Retry(ChatError::Timeout { attempts })),
            Err(e) => {
                return Err(Attempt::Retry(ChatError::Transport {
                    message: e.to_string(),
                    attempts,
                }))
            }
        };
        let code = resp.status().as_u16();
        if resp.status().is_server_error() {
            return Err(Attempt::Retry(ChatError::Status { code, attempts }));
        }
        if !resp.status().is_success() {
            return Err(Attempt::Fatal(ChatError::Status { code, attempts }));
        }
        let text = match resp.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(_)) => return Err(Attempt::Retry(ChatError::Timeout { attempts })),
            Err(e) => return Err(Attempt::Fatal(ChatError::MalformedResponse(e.to_string()))),
        };
        extract_content(&text).map_err(Attempt::Fatal)
    }
}

/// The assistant text of the first choice.
fn extract_content(body: &str) -> Result<String, ChatError> {
    if body.trim().is_empty() {
        return Err(ChatError::MalformedResponse("empty body".into()));
    }
    let v: Value = serde_json::from_str(body).map_err(|e| ChatError::MalformedResponse(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| ChatError::MalformedResponse("no choices[0].message.content".into()))
}

impl ChatTransport for HttpChatClient {
    /// Up to `1 + max_retries` POSTs. Timeouts, connection failures and
    /// 5xx answers are retried after `backoff_ms · 2^i`; anything else
    /// fails at once.
    fn complete(&mut self, messages: &[ChatMessage]) -> Result<String, ChatError> {
        let body = json!({
            "model": self.cfg.model,
            "messages": messages,
            "temperature": 0,
        });
        let total = self.cfg.max_retries + 1;
        let mut attempt = 1;
        loop {
            match self.attempt(&body, attempt) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) if attempt >= total => return Err(e),
                Err(Attempt::Retry(e)) => {
                    let delay = self.cfg.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                    log::warn!("chat attempt {attempt}/{total} failed ({e}); retrying in {delay} ms");
                    std::thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
            }
        }
    }
}

/// One-shot convenience over [`HttpChatClient`].
pub fn call_chat_endpoint(cfg: &LlmConfig, messages: &[ChatMessage]) -> Result<String, ChatError> {
    HttpChatClient::new(cfg.clone()).complete(messages)
}
