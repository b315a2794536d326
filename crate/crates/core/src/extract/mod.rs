//! VLM endpoint adapters and structured-output parsing.
//!
//! The HTTP transport sends a chat-style body:
//!
//! ```json
//! {"model": "...", "max_tokens": 512,
//!  "messages": [{"role": "user", "content": [
//!     {"type": "text", "text": "<prompt>"},
//!     {"type": "image", "media_type": "image/png", "data": "<base64>"}]}]}
//! ```
//!
//! and reads the answer from `choices[0].message.content`.

mod mock;
mod parse;

use std::path::PathBuf;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use mock::{mock_answer, mock_response_text};
pub use parse::{first_balanced, parse_structured_output, ParsedValue};

/// Version of the request body layout above.
pub const WIRE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("VLM endpoint unavailable: {0}")]
    EndpointUnavailable(String),
    #[error("VLM call timed out after {0:?}")]
    Timeout(Duration),
    #[error("environment variable {0} holding the API token is not set")]
    AuthMissing(String),
    #[error("could not parse model output: {message}")]
    ParseError { message: String, raw: String },
    #[error("output keys {found:?} do not match expected {expected:?}")]
    KeyMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("invalid VLM config: {0}")]
    InvalidConfig(String),
    #[error("reading page image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VlmTransport {
    Http,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MockVlmConfig {
    /// Attached pages beyond this many are invisible to the mock.
    pub context_cap_pages: usize,
    pub seed: u64,
}

impl Default for MockVlmConfig {
    fn default() -> Self {
        MockVlmConfig {
            context_cap_pages: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VlmEndpointConfig {
    pub transport: VlmTransport,
    /// Chat endpoint URL for the `http` transport.
    pub base_url: String,
    pub model_id: String,
    pub auth_env_var: Option<String>,
    pub max_images_per_call: usize,
    pub max_response_tokens: usize,
    pub timeout_s: u64,
    pub retries: u32,
    /// Concurrent requests allowed against the endpoint.
    pub max_in_flight: usize,
    pub mock: MockVlmConfig,
}

impl Default for VlmEndpointConfig {
    fn default() -> Self {
        VlmEndpointConfig {
            transport: VlmTransport::Mock,
            base_url: String::new(),
            model_id: "mock-vlm".into(),
            auth_env_var: None,
            max_images_per_call: 8,
            max_response_tokens: 1024,
            timeout_s: 120,
            retries: 2,
            max_in_flight: 2,
            mock: MockVlmConfig::default(),
        }
    }
}

impl VlmEndpointConfig {
    pub fn validate(&self) -> Result<(), ExtractError> {
        let bad = |m: &str| Err(ExtractError::InvalidConfig(m.to_string()));
        if self.max_images_per_call == 0 {
            return bad("max_images_per_call must be at least 1");
        }
        if self.max_in_flight == 0 {
            return bad("max_in_flight must be at least 1");
        }
        if self.model_id.is_empty() {
            return bad("model_id is empty");
        }
        if self.transport == VlmTransport::Http && self.base_url.is_empty() {
            return bad("base_url is required for the http transport");
        }
        Ok(())
    }
}

/// A page image attached to a call.
#[derive(Debug, Clone, PartialEq)]
pub struct VlmImage {
    pub page_index: usize,
    pub path: PathBuf,
    /// Ground-truth text for the mock transport; defaults to `path` with a
    /// `.txt` extension.
    pub sidecar_path: Option<PathBuf>,
}

impl VlmImage {
    fn sidecar(&self) -> PathBuf {
        self.sidecar_path
            .clone()
            .unwrap_or_else(|| self.path.with_extension("txt"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VlmRawResponse {
    pub text: String,
    pub latency_ms: u64,
    pub token_usage: Option<TokenUsage>,
    /// Pages actually attached after truncation.
    pub pages_sent: Vec<usize>,
}

/// Counting semaphore bounding in-flight requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn acquire(&self) -> GateGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|p| p.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|p| p.into_inner());
        }
        *free -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|p| p.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// A client for one VLM endpoint, shared by all workers of a run.
pub struct VlmClient {
    cfg: VlmEndpointConfig,
    gate: Gate,
    http: Option<reqwest::blocking::Client>,
}

impl VlmClient {
    pub fn new(cfg: VlmEndpointConfig) -> Result<Self, ExtractError> {
        cfg.validate()?;
        let http = match cfg.transport {
            VlmTransport::Http => Some(
                reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(cfg.timeout_s))
                    .build()
                    .map_err(|e| ExtractError::EndpointUnavailable(e.to_string()))?,
            ),
            VlmTransport::Mock => None,
        };
        Ok(VlmClient {
            gate: Gate {
                free: Mutex::new(cfg.max_in_flight),
                cv: Condvar::new(),
            },
            cfg,
            http,
        })
    }

    pub fn config(&self) -> &VlmEndpointConfig {
        &self.cfg
    }

    /// Builds the HTTP request body for `prompt` and `images`, truncated to
    /// `max_images_per_call`.
    pub fn request_body(&self, prompt: &str, images: &[VlmImage]) -> Result<Value, ExtractError> {
        let mut content = vec![json!({"type": "text", "text": prompt})];
        for img in images.iter().take(self.cfg.max_images_per_call) {
            let bytes = std::fs::read(&img.path).map_err(|source| ExtractError::Image {
                path: img.path.clone(),
                source,
            })?;
            content.push(json!({
                "type": "image",
                "media_type": "image/png",
                "data": base64::engine::general_purpose::STANDARD.encode(bytes),
            }));
        }
        Ok(json!({
            "model": self.cfg.model_id,
            "max_tokens": self.cfg.max_response_tokens,
            "messages": [{"role": "user", "content": content}],
        }))
    }

    /// Sends one extraction call. Images beyond `max_images_per_call` are
    /// dropped from the end, so callers pass them best-first.
    pub fn call_vlm(&self, prompt: &str, images: &[VlmImage]) -> Result<VlmRawResponse, ExtractError> {
        let sent = &images[..images.len().min(self.cfg.max_images_per_call)];
        if sent.len() < images.len() {
            tracing::warn!(
                attached = images.len(),
                limit = self.cfg.max_images_per_call,
                "truncating images to the per-call limit"
            );
        }
        let pages_sent = sent.iter().map(|i| i.page_index).collect();
        match self.cfg.transport {
            VlmTransport::Mock => {
                let start = Instant::now();
                let visible = sent
                    .iter()
                    .take(self.cfg.mock.context_cap_pages)
                    .map(|img| {
                        let p = img.sidecar();
                        std::fs::read_to_string(&p).map_err(|source| ExtractError::Image { path: p, source })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let text = mock_response_text(prompt, sent, &visible, self.cfg.mock.seed);
                Ok(VlmRawResponse {
                    text,
                    latency_ms: start.elapsed().as_millis() as u64,
                    token_usage: None,
                    pages_sent,
                })
            }
            VlmTransport::Http => {
                let token = match &self.cfg.auth_env_var {
                    Some(var) => Some(std::env::var(var).map_err(|_| ExtractError::AuthMissing(var.clone()))?),
                    None => None,
                };
                let body = self.request_body(prompt, sent)?;
                let _slot = self.gate.acquire();
                let start = Instant::now();
                let (text, usage) = self.post_with_retries(&body, token.as_deref())?;
                Ok(VlmRawResponse {
                    text,
                    latency_ms: start.elapsed().as_millis() as u64,
                    token_usage: usage,
                    pages_sent,
                })
            }
        }
    }

    fn post_with_retries(
        &self,
        body: &Value,
        token: Option<&str>,
    ) -> Result<(String, Option<TokenUsage>), ExtractError> {
        let client = self.http.as_ref().expect("http client built for http transport");
        let mut attempt = 0;
        loop {
            let mut req = client.post(&self.cfg.base_url).json(body);
            if let Some(t) = token {
                req = req.bearer_auth(t);
            }
            let transient = match req.send() {
                Ok(resp) if resp.status().is_success() => {
                    let v: Value = resp
                        .json()
                        .map_err(|e| ExtractError::EndpointUnavailable(format!("malformed response body: {e}")))?;
                    return Ok(extract_choice(&v));
                }
                Ok(resp) if resp.status().is_server_error() || resp.status().as_u16() == 429 => {
                    ExtractError::EndpointUnavailable(format!("HTTP {}", resp.status()))
                }
                Ok(resp) => {
                    let status = resp.status();
                    let text = resp.text().unwrap_or_default();
                    return Err(ExtractError::EndpointUnavailable(format!("HTTP {status}: {text}")));
                }
                Err(e) if e.is_timeout() => ExtractError::Timeout(Duration::from_secs(self.cfg.timeout_s)),
                Err(e) => ExtractError::EndpointUnavailable(e.to_string()),
            };
            if attempt >= self.cfg.retries {
                return Err(transient);
            }
            let backoff = Duration::from_millis(200 * (1 << attempt.min(6)));
            tracing::warn!(attempt, ?backoff, error = %transient, "retrying VLM call");
            std::thread::sleep(backoff);
            attempt += 1;
        }
    }
}

/// Response text and usage from a chat-completions style body.
fn extract_choice(v: &Value) -> (String, Option<TokenUsage>) {
    let content = &v["choices"][0]["message"]["content"];
    let text = match content {
        Value::String(s) => s.clone(),
        Value::Array(parts) => parts
            .iter()
            .filter_map(|p| p["text"].as_str())
            .collect::<Vec<_>>()
            .join(""),
        _ => String::new(),
    };
    let usage = v.get("usage").and_then(|u| {
        Some(TokenUsage {
            prompt_tokens: u.get("prompt_tokens")?.as_u64()?,
            completion_tokens: u.get("completion_tokens")?.as_u64()?,
        })
    });
    (text, usage)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auth_missing_before_network() {
        let cfg = VlmEndpointConfig {
            transport: VlmTransport::Http,
            base_url: "http://127.0.0.1:9/never".into(),
            auth_env_var: Some("PAGEWISE_TEST_TOKEN_THAT_IS_NOT_SET".into()),
            ..Default::default()
        };
        let client = VlmClient::new(cfg).unwrap();
        assert!(matches!(client.call_vlm("p", &[]), Err(ExtractError::AuthMissing(_))));
    }

    #[test]
    fn choice_text_from_parts() {
        let v = json!({"choices": [{"message": {"content": [{"type": "text", "text": "{\"a\""}, {"type": "text", "text": ":1}"}]}}]});
        assert_eq!(extract_choice(&v).0, "{\"a\":1}");
    }
}
