//! Prompt rendering, transcript parsing and grading, and optional
//! submission to an OpenAI-compatible chat endpoint.

mod classify;
mod endpoint;
mod parse;
mod prompt;

pub use classify::{classify, instance_confirmed_satisfiable, Classified, FailureClass};
pub use endpoint::{submit, EndpointConfig, TransportError, API_KEY_ENV, API_KEY_ENV_FALLBACK};
pub use parse::{parse_response, FormatFailure};
pub use prompt::{render_prompt, PromptError};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptSource {
    File,
    Endpoint,
}

/// One model response, preserved byte-exactly for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub instance_id: String,
    pub text: String,
    pub source: TranscriptSource,
    /// Set when the source reported hitting its token budget
    /// (e.g. `finish_reason = "length"`). `None` when unknown.
    pub token_limit: Option<bool>,
}
