//! Chat-completions submission for OpenAI-compatible endpoints.

use super::prompt::render_prompt;
use super::{Transcript, TranscriptSource};
use crate::model::Instance;
use std::time::Duration;
use thiserror::Error;

/// Primary and fallback environment variables holding the API credential.
/// Credentials are never accepted as CLI flags.
pub const API_KEY_ENV: &str = "OPENXOR_API_KEY";
pub const API_KEY_ENV_FALLBACK: &str = "OPENAI_API_KEY";

#[derive(Debug, Clone)]
pub struct EndpointConfig {
    /// Base URL of the chat-completions endpoint, e.g.
    /// `http://host:port/v1/chat/completions`.
    pub url: String,
    pub model: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    /// Retries on 429/5xx; Retry-After is honored when present.
    pub max_retries: usize,
    pub timeout: Duration,
}

impl EndpointConfig {
    pub fn new(url: String, model: String) -> Self {
        EndpointConfig {
            url,
            model,
            api_key: std::env::var(API_KEY_ENV)
                .or_else(|_| std::env::var(API_KEY_ENV_FALLBACK))
                .ok(),
            temperature: 0.0,
            max_retries: 3,
            timeout: Duration::from_secs(300),
        }
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("prompt rendering failed: {0}")]
    Prompt(#[from] super::prompt::PromptError),
    #[error("request to {url} failed: {reason}")]
    Request { url: String, reason: String },
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("endpoint response malformed: {0}")]
    Malformed(String),
}

/// Submit one instance as a single user-message chat completion at the
/// configured temperature and capture the reply as a [`Transcript`].
pub fn submit(instance: &Instance, config: &EndpointConfig) -> Result<Transcript, TransportError> {
    let prompt = render_prompt(instance)?;
    let body = serde_json::json!({
        "model": config.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
    });

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(config.timeout))
        .build()
        .into();

    let mut attempt = 0usize;
    loop {
        let mut request = agent.post(&config.url);
        if let Some(key) = &config.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let result = request
            .header("Content-Type", "application/json")
            .send_json(&body);
        let mut response = match result {
            Ok(r) => r,
            Err(e) => {
                return Err(TransportError::Request {
                    url: config.url.clone(),
                    reason: e.to_string(),
                })
            }
        };
        let status = response.status().as_u16();
        if (status == 429 || status >= 500) && attempt < config.max_retries {
            attempt += 1;
            let wait = response
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|s| s.trim().parse::<u64>().ok())
                .unwrap_or(1 << attempt);
            std::thread::sleep(Duration::from_secs(wait.min(60)));
            continue;
        }
        if !(200..300).contains(&status) {
            let body = response
                .body_mut()
                .read_to_string()
                .unwrap_or_else(|_| "<unreadable body>".into());
            return Err(TransportError::Status { status, body });
        }
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| TransportError::Malformed(e.to_string()))?;
        let choice = value
            .get("choices")
            .and_then(|c| c.get(0))
            .ok_or_else(|| TransportError::Malformed("missing choices[0]".into()))?;
        let text = choice
            .pointer("/message/content")
            .and_then(|c| c.as_str())
            .ok_or_else(|| TransportError::Malformed("missing message content".into()))?
            .to_string();
        let token_limit = choice
            .get("finish_reason")
            .and_then(|f| f.as_str())
            .map(|f| f == "length");
        return Ok(Transcript {
            instance_id: instance.id.clone(),
            text,
            source: TranscriptSource::Endpoint,
            token_limit,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate_instance, GenConfig};
    use std::io::{Read, Write};
    use std::net::TcpListener;

    /// Minimal one-shot HTTP test double.
    fn serve_once(response_json: String) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = vec![0u8; 65536];
            let mut request = String::new();
            loop {
                let read = stream.read(&mut buf).unwrap();
                request.push_str(&String::from_utf8_lossy(&buf[..read]));
                if let Some(header_end) = request.find("\r\n\r\n") {
                    let headers = request[..header_end].to_lowercase();
                    if headers.contains("transfer-encoding: chunked") {
                        // body complete at the zero-length chunk terminator
                        if request.ends_with("0\r\n\r\n") {
                            break;
                        }
                    } else {
                        let content_length = headers
                            .lines()
                            .find(|l| l.starts_with("content-length:"))
                            .and_then(|l| l.split(':').nth(1))
                            .and_then(|v| v.trim().parse::<usize>().ok())
                            .unwrap_or(0);
                        if request.len() >= header_end + 4 + content_length {
                            break;
                        }
                    }
                }
            }
            let payload = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                response_json.len(),
                response_json
            );
            stream.write_all(payload.as_bytes()).unwrap();
            request
        });
        (format!("http://{addr}/v1/chat/completions"), handle)
    }

    #[test]
    fn mock_endpoint_round_trip() {
        let inst = generate_instance(&GenConfig::new(8, 0.125, 55, 1), 0);
        let answer = crate::model::ops_to_string(inst.ground_truth.as_ref().unwrap());
        let canned = serde_json::json!({
            "choices": [{"message": {"content": answer}, "finish_reason": "stop"}]
        })
        .to_string();
        let (url, handle) = serve_once(canned);
        let mut config = EndpointConfig::new(url, "test-model".into());
        config.api_key = Some("sk-test".into());
        let transcript = submit(&inst, &config).unwrap();
        assert_eq!(transcript.source, TranscriptSource::Endpoint);
        assert_eq!(transcript.token_limit, Some(false));
        let classified = crate::bridge::classify(&transcript, inst.n(), true);
        assert_eq!(classified.class, crate::bridge::FailureClass::ValidAttempt);

        // request carried the prompt, model name, temperature 0, and auth
        let request = handle.join().unwrap();
        assert!(request.contains("\"model\": \"test-model\""));
        assert!(request.contains("\"temperature\": 0.0"));
        assert!(request.contains("Bearer sk-test"));
        assert!(request.contains("XOR/NOP Reasoning Challenge"));
    }

    #[test]
    fn finish_reason_length_sets_token_limit_flag() {
        let inst = generate_instance(&GenConfig::new(8, 0.125, 56, 1), 0);
        let canned = serde_json::json!({
            "choices": [{"message": {"content": "XOR NOP"}, "finish_reason": "length"}]
        })
        .to_string();
        let (url, _handle) = serve_once(canned);
        let mut config = EndpointConfig::new(url, "m".into());
        config.api_key = None;
        let transcript = submit(&inst, &config).unwrap();
        assert_eq!(transcript.token_limit, Some(true));
    }

    #[test]
    fn unreachable_host_is_transport_error() {
        let inst = generate_instance(&GenConfig::new(8, 0.125, 57, 1), 0);
        let mut config = EndpointConfig::new(
            // reserved TEST-NET-1 address: nothing listens there
            "http://192.0.2.1:9/v1/chat/completions".into(),
            "m".into(),
        );
        config.api_key = None;
        config.max_retries = 0;
        config.timeout = Duration::from_millis(300);
        let err = submit(&inst, &config).unwrap_err();
        assert!(matches!(err, TransportError::Request { .. }), "{err}");
    }
}
