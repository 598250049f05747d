//! Minimal blocking client for chat-completions style JSON endpoints.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const TOKEN_ENV: &str = "NEURONARR_API_TOKEN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub url: String,
    pub model: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub max_in_flight: usize,
    pub token_env: String,
    /// Logs full request bodies at info level.
    pub log_requests: bool,
    pub temperature: f64,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            url: "http://127.0.0.1:8080/v1/chat/completions".into(),
            model: "narrator".into(),
            timeout_ms: 30_000,
            max_retries: 3,
            backoff_ms: 250,
            max_in_flight: 4,
            token_env: TOKEN_ENV.into(),
            log_requests: false,
            temperature: 0.0,
        }
    }
}

pub fn chat_request_body(ep: &EndpointConfig, system: &str, user: &str) -> Value {
    json!({
        "model": ep.model,
        "temperature": ep.temperature,
        "messages": [
            {"role": "system", "content": system},
            {"role": "user", "content": user},
        ],
    })
}

/// Extracts `choices[0].message.content`.
pub fn parse_chat_response(body: &str) -> Result<String> {
    let v: Value = serde_json::from_str(body).map_err(|e| Error::Protocol(format!("response is not JSON: {e}")))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Protocol("response lacks choices[0].message.content".into()))
}

fn retryable_status(code: u16) -> bool {
    code == 429 || code >= 500
}

/// POSTs one chat request with bounded retries and exponential backoff.
/// Transport failures and 429/5xx responses are retried; other statuses
/// fail immediately. A body that does not parse is a protocol error.
pub fn post_chat(ep: &EndpointConfig, system: &str, user: &str) -> Result<String> {
    let body = chat_request_body(ep, system, user);
    if ep.log_requests {
        log::info!("request to {}: {body}", ep.url);
    }
    let agent = ureq::AgentBuilder::new()
        .timeout(Duration::from_millis(ep.timeout_ms))
        .build();
    let token = std::env::var(&ep.token_env).ok();
    let mut last = String::new();
    for attempt in 0..=ep.max_retries {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(ep.backoff_ms.saturating_mul(1 << (attempt - 1).min(16))));
        }
        let mut req = agent.post(&ep.url).set("Content-Type", "application/json");
        if let Some(t) = &token {
            req = req.set("Authorization", &format!("Bearer {t}"));
        }
        match req.send_string(&body.to_string()) {
            Ok(resp) => {
                let text = resp
                    .into_string()
                    .map_err(|e| Error::Protocol(format!("unreadable response body: {e}")))?;
                return parse_chat_response(&text);
            }
            Err(ureq::Error::Status(code, _)) if !retryable_status(code) => {
                return Err(Error::Transport(format!("HTTP {code} from {}", ep.url)));
            }
            Err(ureq::Error::Status(code, _)) => last = format!("HTTP {code}"),
            Err(e) => last = e.to_string(),
        }
        log::warn!("attempt {} to {} failed: {last}", attempt + 1, ep.url);
    }
    Err(Error::Transport(format!("{} failed after {} attempts: {last}", ep.url, ep.max_retries + 1)))
}

/// Applies `f` to every item with at most `max_in_flight` calls running
/// at once; results keep input order.
pub fn run_bounded<T: Sync, R: Send>(items: &[T], max_in_flight: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let workers = max_in_flight.max(1).min(items.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("result slots poisoned")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("result slots poisoned")
        .into_iter()
        .map(|r| r.expect("every item processed"))
        .collect()
}
