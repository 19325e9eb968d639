//! Question- and answer-generation backends.
//!
//! [`MockBackend`] is a deterministic rule-based generator used for tests
//! and fixtures. [`HttpBackend`] speaks a small JSON-over-HTTP protocol:
//!
//! ```text
//! POST {endpoint}/v1/question  {"context", "property"}             -> {"question"}
//! POST {endpoint}/v1/answer    {"context", "question", "property"} -> {"answer"}
//! ```
//!
//! 503 responses are retried with jittered exponential backoff; 400 is a
//! fatal rejection of the input.

mod http;
mod mock;
mod prompt;
pub mod stub;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Context, TemporalProperty};

pub use http::HttpBackend;
pub use mock::MockBackend;
pub use prompt::{parse_qa_prompt, render_qa_prompt, truncate_answer, QAPrompt, END_OF_SEQUENCE};

/// Environment variable that overrides the configured endpoint.
pub const ENDPOINT_ENV: &str = "TCOM_ENDPOINT";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("invalid backend configuration: {0}")]
    InvalidConfig(String),
    #[error("prompt field {0} is empty")]
    EmptyPromptField(&'static str),
    #[error("backend timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("backend unavailable after {attempts} attempt(s): {reason}")]
    Unavailable { attempts: u32, reason: String },
    #[error("backend rejected the input: {0}")]
    InputRejected(String),
    #[error("backend returned an empty generation")]
    EmptyGeneration,
    #[error("malformed backend response: {0}")]
    Protocol(String),
}

/// Source of generated questions and answers.
pub trait Backend: Send + Sync {
    /// Recorded in every dataset row produced through this backend.
    fn name(&self) -> String;

    fn generate_question(
        &self,
        context: &Context,
        property: TemporalProperty,
    ) -> Result<String, BackendError>;

    fn generate_answer(
        &self,
        context: &Context,
        question: &str,
        property: TemporalProperty,
    ) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub timeout: Duration,
    pub max_retries: u32,
    pub max_parallel: usize,
    /// Mock answer variety; 0 keeps the fixed per-property answers.
    pub seed: u64,
    /// First retry delay; doubles on each further attempt.
    pub backoff_base: Duration,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Mock,
            endpoint: None,
            timeout: Duration::from_secs(30),
            max_retries: 3,
            max_parallel: 4,
            seed: 0,
            backoff_base: Duration::from_millis(250),
        }
    }
}

impl BackendConfig {
    pub fn mock() -> Self {
        Self::default()
    }

    pub fn http(endpoint: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::Http,
            endpoint: Some(endpoint.into()),
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), BackendError> {
        let invalid = |msg: &str| Err(BackendError::InvalidConfig(msg.to_string()));
        match (self.kind, &self.endpoint) {
            (BackendKind::Http, None) => return invalid("http backend needs an endpoint"),
            (BackendKind::Mock, Some(_)) => return invalid("mock backend takes no endpoint"),
            (BackendKind::Http, Some(url))
                if !(url.starts_with("http://") || url.starts_with("https://")) =>
            {
                return invalid("endpoint must be an http:// or https:// URL")
            }
            _ => {}
        }
        if self.max_parallel == 0 {
            return invalid("max_parallel must be at least 1");
        }
        if self.timeout.is_zero() {
            return invalid("timeout must be positive");
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Arc<dyn Backend>, BackendError> {
        self.check()?;
        Ok(match self.kind {
            BackendKind::Mock => Arc::new(MockBackend::new(self.seed)),
            BackendKind::Http => Arc::new(HttpBackend::new(self)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRequest {
    pub context: String,
    pub property: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionResponse {
    pub question: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRequest {
    pub context: String,
    pub question: String,
    pub property: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerResponse {
    pub answer: String,
}
