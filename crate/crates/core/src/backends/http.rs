use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use log::{debug, warn};
use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::model::{Context, TemporalProperty};

use super::prompt::{render_qa_prompt, truncate_answer};
use super::{
    AnswerRequest, AnswerResponse, Backend, BackendConfig, BackendError, QuestionRequest,
    QuestionResponse,
};

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Window {
    free: Mutex<usize>,
    cond: Condvar,
}

struct Permit<'a>(&'a Window);

impl Window {
    fn new(size: usize) -> Self {
        Self {
            free: Mutex::new(size),
            cond: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cond.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cond.notify_one();
    }
}

enum Attempt<T> {
    Done(T),
    Retry { timed_out: bool, reason: String },
    Fatal(BackendError),
}

/// Client for the JSON wire protocol. Shareable across threads; at most
/// `max_parallel` requests are in flight at once.
pub struct HttpBackend {
    endpoint: String,
    agent: ureq::Agent,
    window: Window,
    max_retries: u32,
    backoff_base: Duration,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.endpoint)
            .field("max_retries", &self.max_retries)
            .finish()
    }
}

impl HttpBackend {
    pub fn new(cfg: &BackendConfig) -> Result<Self, BackendError> {
        cfg.check()?;
        let endpoint = cfg
            .endpoint
            .clone()
            .ok_or_else(|| BackendError::InvalidConfig("http backend needs an endpoint".into()))?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self {
            endpoint: endpoint.trim_end_matches('/').to_string(),
            agent,
            window: Window::new(cfg.max_parallel),
            max_retries: cfg.max_retries,
            backoff_base: cfg.backoff_base,
        })
    }

    fn attempt<B: Serialize, T: DeserializeOwned>(&self, url: &str, body: &B) -> Attempt<T> {
        let _permit = self.window.acquire();
        let mut resp = match self.agent.post(url).send_json(body) {
            Ok(resp) => resp,
            Err(ureq::Error::Timeout(_)) => {
                return Attempt::Retry {
                    timed_out: true,
                    reason: "timeout".into(),
                }
            }
            Err(e) => {
                return Attempt::Retry {
                    timed_out: false,
                    reason: e.to_string(),
                }
            }
        };
        let status = resp.status().as_u16();
        match status {
            200 => match resp.body_mut().read_json::<T>() {
                Ok(v) => Attempt::Done(v),
                Err(ureq::Error::Timeout(_)) => Attempt::Retry {
                    timed_out: true,
                    reason: "timeout reading body".into(),
                },
                Err(e) => Attempt::Fatal(BackendError::Protocol(e.to_string())),
            },
            400 => {
                let msg = resp.body_mut().read_to_string().unwrap_or_default();
                Attempt::Fatal(BackendError::InputRejected(msg))
            }
            500..=599 => Attempt::Retry {
                timed_out: false,
                reason: format!("HTTP {status}"),
            },
            _ => Attempt::Fatal(BackendError::Protocol(format!("unexpected HTTP {status}"))),
        }
    }

    fn post<B: Serialize, T: DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<T, BackendError> {
        let url = format!("{}{path}", self.endpoint);
        let attempts = self.max_retries + 1;
        let mut last_timed_out = false;
        let mut last_reason = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let delay = self.backoff_base.saturating_mul(1 << (attempt - 1).min(16));
                let jitter = rand::rng().random_range(0.5..=1.0);
                thread::sleep(delay.mul_f64(jitter));
            }
            match self.attempt(&url, body) {
                Attempt::Done(v) => return Ok(v),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry { timed_out, reason } => {
                    debug!("{url}: attempt {} failed: {reason}", attempt + 1);
                    last_timed_out = timed_out;
                    last_reason = reason;
                }
            }
        }
        warn!("{url}: giving up after {attempts} attempt(s): {last_reason}");
        Err(if last_timed_out {
            BackendError::Timeout { attempts }
        } else {
            BackendError::Unavailable {
                attempts,
                reason: last_reason,
            }
        })
    }
}

impl Backend for HttpBackend {
    fn name(&self) -> String {
        format!("http:{}", self.endpoint)
    }

    fn generate_question(
        &self,
        context: &Context,
        property: TemporalProperty,
    ) -> Result<String, BackendError> {
        let req = QuestionRequest {
            context: context.text.clone(),
            property: property.canonical_form().to_string(),
        };
        let resp: QuestionResponse = self.post("/v1/question", &req)?;
        let question = resp.question.trim();
        if question.is_empty() {
            return Err(BackendError::EmptyGeneration);
        }
        Ok(question.to_string())
    }

    fn generate_answer(
        &self,
        context: &Context,
        question: &str,
        property: TemporalProperty,
    ) -> Result<String, BackendError> {
        let prompt = render_qa_prompt(&context.text, question, property)?;
        let req = AnswerRequest {
            context: prompt.context_text,
            question: prompt.question,
            property: property.canonical_form().to_string(),
        };
        let resp: AnswerResponse = self.post("/v1/answer", &req)?;
        truncate_answer(&resp.answer)
    }
}
