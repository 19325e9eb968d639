//! In-process stub of the model server, for tests and local dry runs.
//!
//! The default responder implements the wire protocol on top of
//! [`MockBackend`]. Custom responders can inject failures, delays or odd
//! payloads. The server counts concurrent requests so callers can check
//! client-side concurrency bounds.

use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde_json::{json, Value};

use crate::model::{parse_property, TemporalProperty};

use super::MockBackend;

#[derive(Debug, Clone, PartialEq)]
pub struct StubRequest {
    pub method: String,
    pub path: String,
    /// Parsed JSON body; `Value::Null` when the body is not JSON.
    pub body: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StubReply {
    pub status: u16,
    pub body: String,
}

impl StubReply {
    pub fn json(status: u16, body: Value) -> Self {
        Self {
            status,
            body: body.to_string(),
        }
    }
}

pub type Responder = Arc<dyn Fn(&StubRequest) -> StubReply + Send + Sync>;

#[derive(Debug, Default)]
pub struct StubStats {
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
    requests: AtomicUsize,
}

impl StubStats {
    pub fn max_in_flight(&self) -> usize {
        self.max_in_flight.load(Ordering::SeqCst)
    }

    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

pub struct StubServer {
    server: Arc<tiny_http::Server>,
    url: String,
    stats: Arc<StubStats>,
    handle: Option<JoinHandle<()>>,
}

fn field<'a>(body: &'a Value, name: &str) -> Option<&'a str> {
    body.get(name).and_then(Value::as_str)
}

fn bad_request(msg: &str) -> StubReply {
    StubReply::json(400, json!({ "error": msg }))
}

/// Wire-protocol responder backed by a [`MockBackend`]. Answers carry a
/// trailing end-of-sequence marker and some rambling, as a decoder would.
pub fn protocol_responder(mock: MockBackend) -> Responder {
    Arc::new(move |req: &StubRequest| {
        let property = |body: &Value| -> Result<TemporalProperty, StubReply> {
            let raw =
                field(body, "property").ok_or_else(|| bad_request("missing field: property"))?;
            parse_property(raw).map_err(|e| bad_request(&e.to_string()))
        };
        match (req.method.as_str(), req.path.as_str()) {
            ("GET", "/healthz") => StubReply::json(200, json!({ "status": "ok" })),
            ("POST", "/v1/question") => {
                let Some(context) = field(&req.body, "context") else {
                    return bad_request("missing field: context");
                };
                match property(&req.body) {
                    Ok(p) => {
                        StubReply::json(200, json!({ "question": mock.question_for(context, p) }))
                    }
                    Err(reply) => reply,
                }
            }
            ("POST", "/v1/answer") => {
                let (Some(context), Some(question)) =
                    (field(&req.body, "context"), field(&req.body, "question"))
                else {
                    return bad_request("missing field: context or question");
                };
                match property(&req.body) {
                    Ok(p) => {
                        let answer = format!(
                            "{}</s> and then some more text",
                            mock.answer_for(context, question, p)
                        );
                        StubReply::json(200, json!({ "answer": answer }))
                    }
                    Err(reply) => reply,
                }
            }
            (_, "/healthz" | "/v1/question" | "/v1/answer") => {
                StubReply::json(405, json!({ "error": "method not allowed" }))
            }
            _ => StubReply::json(404, json!({ "error": "not found" })),
        }
    })
}

impl StubServer {
    /// Serve the wire protocol with a seed-0 mock on an ephemeral port.
    pub fn start_protocol() -> io::Result<Self> {
        Self::start(protocol_responder(MockBackend::new(0)), Duration::ZERO)
    }

    /// Serve `responder` on 127.0.0.1 with an ephemeral port. Each request
    /// is handled on its own thread after sleeping `delay`.
    pub fn start(responder: Responder, delay: Duration) -> io::Result<Self> {
        let server = tiny_http::Server::http("127.0.0.1:0").map_err(io::Error::other)?;
        let port = server
            .server_addr()
            .to_ip()
            .map(|a| a.port())
            .ok_or_else(|| io::Error::other("stub server has no IP address"))?;
        let server = Arc::new(server);
        let stats = Arc::new(StubStats::default());
        let handle = {
            let server = Arc::clone(&server);
            let stats = Arc::clone(&stats);
            thread::spawn(move || {
                for request in server.incoming_requests() {
                    let responder = Arc::clone(&responder);
                    let stats = Arc::clone(&stats);
                    thread::spawn(move || handle(request, &responder, &stats, delay));
                }
            })
        };
        Ok(Self {
            server,
            url: format!("http://127.0.0.1:{port}"),
            stats,
            handle: Some(handle),
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn stats(&self) -> &StubStats {
        &self.stats
    }
}

fn handle(
    mut request: tiny_http::Request,
    responder: &Responder,
    stats: &StubStats,
    delay: Duration,
) {
    let now = stats.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    stats.max_in_flight.fetch_max(now, Ordering::SeqCst);
    stats.requests.fetch_add(1, Ordering::SeqCst);
    let mut raw = String::new();
    let _ = request.as_reader().read_to_string(&mut raw);
    let req = StubRequest {
        method: request.method().as_str().to_uppercase(),
        path: request.url().split('?').next().unwrap_or("").to_string(),
        body: serde_json::from_str(&raw).unwrap_or(Value::Null),
    };
    if !delay.is_zero() {
        thread::sleep(delay);
    }
    let reply = responder(&req);
    stats.in_flight.fetch_sub(1, Ordering::SeqCst);
    let header = tiny_http::Header::from_bytes("Content-Type", "application/json")
        .expect("static header is valid");
    let response = tiny_http::Response::from_string(reply.body)
        .with_status_code(reply.status)
        .with_header(header);
    let _ = request.respond(response);
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
