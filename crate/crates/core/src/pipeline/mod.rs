//! End-to-end extraction: generate, validate, answer, persist.

mod io;

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use chrono::{DateTime, Utc};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{Backend, BackendConfig, BackendError};
use crate::model::{CandidateQuestion, Context, ModelError, TComQARecord, TemporalProperty};
use crate::validators::{validate, ValidationConfig, ValidationError};

pub use io::{
    ingest_corpus, read_jsonl, read_records, rejects_path, write_jsonl, write_records,
    write_rejects, CorpusFormat,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid pipeline configuration: {0}")]
    InvalidConfig(String),
    #[error("duplicate context id {0:?}")]
    DuplicateContextId(String),
    #[error("context {context_id} / {property}: {source}")]
    Backend {
        context_id: String,
        property: TemporalProperty,
        #[source]
        source: BackendError,
    },
    #[error("{}:{line}: {reason}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("line {line}: missing field {field:?}")]
    MissingField { line: usize, field: &'static str },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    BackendConfig(#[from] BackendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailPolicy {
    /// Count the failure and move on.
    #[default]
    SkipAndLog,
    /// Stop at the first backend failure.
    Abort,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub properties: Vec<TemporalProperty>,
    pub validation: ValidationConfig,
    pub backend: BackendConfig,
    pub output_path: PathBuf,
    pub fail_policy: FailPolicy,
    /// Also write rejected questions to the `.rejected.jsonl` sidecar.
    pub keep_rejects: bool,
    /// Stamped on every record of the run.
    pub created_at: DateTime<Utc>,
}

impl PipelineConfig {
    /// All five properties, lexical validation, mock backend.
    pub fn new(output_path: impl Into<PathBuf>) -> Self {
        Self {
            properties: TemporalProperty::ALL.to_vec(),
            validation: ValidationConfig::lexical(),
            backend: BackendConfig::mock(),
            output_path: output_path.into(),
            fail_policy: FailPolicy::SkipAndLog,
            keep_rejects: false,
            created_at: DateTime::<Utc>::UNIX_EPOCH,
        }
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        if self.properties.is_empty() {
            return Err(PipelineError::InvalidConfig(
                "no properties selected".into(),
            ));
        }
        let unique: HashSet<_> = self.properties.iter().collect();
        if unique.len() != self.properties.len() {
            return Err(PipelineError::InvalidConfig("duplicate properties".into()));
        }
        self.validation.check()?;
        self.backend.check()?;
        Ok(())
    }

    fn ordered_properties(&self) -> Vec<TemporalProperty> {
        let mut props = self.properties.clone();
        props.sort();
        props
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCounts {
    pub generated: usize,
    pub valid: usize,
    pub answered: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub contexts_in: usize,
    pub questions_generated: usize,
    pub questions_valid: usize,
    pub answers_generated: usize,
    pub errors: usize,
    /// Contexts for which no question passed validation.
    pub contexts_without_valid: usize,
    pub per_property: BTreeMap<TemporalProperty, PropertyCounts>,
}

impl RunReport {
    /// (contexts, generated, valid, answered, errors)
    pub fn totals(&self) -> (usize, usize, usize, usize, usize) {
        (
            self.contexts_in,
            self.questions_generated,
            self.questions_valid,
            self.answers_generated,
            self.errors,
        )
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "contexts: {}  generated: {}  valid: {}  answered: {}  errors: {}\n",
            self.contexts_in,
            self.questions_generated,
            self.questions_valid,
            self.answers_generated,
            self.errors
        );
        for (p, c) in &self.per_property {
            s.push_str(&format!(
                "  {:<12} generated {:>6}  valid {:>6}  answered {:>6}  errors {:>6}\n",
                p.canonical_form(),
                c.generated,
                c.valid,
                c.answered,
                c.errors
            ));
        }
        s
    }
}

enum Outcome {
    GenerationFailed(BackendError),
    Rejected(CandidateQuestion),
    AnswerFailed(BackendError),
    Accepted(TComQARecord),
}

/// Everything a run produced, before anything is written.
#[derive(Debug, Clone, Default)]
pub struct Extraction {
    /// Sorted by context id, then property.
    pub records: Vec<TComQARecord>,
    /// Same order as `records`.
    pub rejects: Vec<CandidateQuestion>,
    pub report: RunReport,
}

fn process_context(
    ctx: &Context,
    properties: &[TemporalProperty],
    cfg: &PipelineConfig,
    backend: &dyn Backend,
    backend_name: &str,
) -> Vec<(TemporalProperty, Outcome)> {
    let mut out = Vec::with_capacity(properties.len());
    for &property in properties {
        let question = match backend.generate_question(ctx, property) {
            Ok(q) => q,
            Err(e) => {
                out.push((property, Outcome::GenerationFailed(e)));
                if cfg.fail_policy == FailPolicy::Abort {
                    break;
                }
                continue;
            }
        };
        let candidate = match validate(ctx, property, &question, &cfg.validation) {
            Ok(c) => c,
            Err(_) => {
                out.push((
                    property,
                    Outcome::GenerationFailed(BackendError::EmptyGeneration),
                ));
                continue;
            }
        };
        if !candidate.is_accepted() {
            out.push((property, Outcome::Rejected(candidate)));
            continue;
        }
        match backend.generate_answer(ctx, &candidate.text, property) {
            Ok(answer) => out.push((
                property,
                Outcome::Accepted(TComQARecord {
                    context_id: ctx.id.clone(),
                    context_text: ctx.text.clone(),
                    property,
                    question: candidate.text,
                    answer,
                    validator_used: cfg.validation.mode,
                    theta: cfg.validation.recorded_theta(),
                    backend_name: backend_name.to_string(),
                    created_at: cfg.created_at,
                }),
            )),
            Err(e) => {
                out.push((property, Outcome::AnswerFailed(e)));
                if cfg.fail_policy == FailPolicy::Abort {
                    break;
                }
            }
        }
    }
    out
}

/// Run generation, validation and answering over `contexts` without writing
/// anything. Contexts are processed by `cfg.backend.max_parallel` workers;
/// the result order does not depend on scheduling.
pub fn extract<I>(
    contexts: I,
    cfg: &PipelineConfig,
    backend: &dyn Backend,
) -> Result<Extraction, PipelineError>
where
    I: IntoIterator<Item = Context>,
{
    cfg.check()?;
    let mut contexts: Vec<Context> = contexts.into_iter().collect();
    contexts.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = contexts.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(PipelineError::DuplicateContextId(w[0].id.clone()));
    }
    let properties = cfg.ordered_properties();
    let backend_name = backend.name();
    let workers = cfg.backend.max_parallel.min(contexts.len()).max(1);
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let mut results: Vec<Option<Vec<(TemporalProperty, Outcome)>>> =
        (0..contexts.len()).map(|_| None).collect();

    thread::scope(|scope| {
        let (tx, rx) = mpsc::channel();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, stop, contexts, properties) = (&next, &stop, &contexts, &properties);
            let backend_name = backend_name.as_str();
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(ctx) = contexts.get(i) else { break };
                let outcomes = process_context(ctx, properties, cfg, backend, backend_name);
                let failed = outcomes.iter().any(|(_, o)| {
                    matches!(o, Outcome::GenerationFailed(_) | Outcome::AnswerFailed(_))
                });
                if failed && cfg.fail_policy == FailPolicy::Abort {
                    stop.store(true, Ordering::SeqCst);
                }
                if tx.send((i, outcomes)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, outcomes) in rx {
            results[i] = Some(outcomes);
        }
    });

    let mut extraction = Extraction::default();
    let report = &mut extraction.report;
    report.contexts_in = contexts.len();
    for &p in &properties {
        report.per_property.insert(p, PropertyCounts::default());
    }
    let mut first_error: Option<PipelineError> = None;
    for (ctx, outcomes) in contexts.iter().zip(results) {
        let Some(outcomes) = outcomes else { continue };
        let mut any_valid = false;
        for (property, outcome) in outcomes {
            let counts = report.per_property.entry(property).or_default();
            let failure = match outcome {
                Outcome::GenerationFailed(e) => Some(e),
                Outcome::Rejected(candidate) => {
                    counts.generated += 1;
                    extraction.rejects.push(candidate);
                    None
                }
                Outcome::AnswerFailed(e) => {
                    counts.generated += 1;
                    counts.valid += 1;
                    any_valid = true;
                    Some(e)
                }
                Outcome::Accepted(record) => {
                    counts.generated += 1;
                    counts.valid += 1;
                    counts.answered += 1;
                    any_valid = true;
                    extraction.records.push(record);
                    None
                }
            };
            if let Some(e) = failure {
                counts.errors += 1;
                warn!("context {} / {property}: {e}", ctx.id);
                first_error.get_or_insert(PipelineError::Backend {
                    context_id: ctx.id.clone(),
                    property,
                    source: e,
                });
            }
        }
        if !any_valid {
            info!("context {} produced no valid question", ctx.id);
            report.contexts_without_valid += 1;
        }
    }
    for c in report.per_property.values() {
        report.questions_generated += c.generated;
        report.questions_valid += c.valid;
        report.answers_generated += c.answered;
        report.errors += c.errors;
    }
    if cfg.fail_policy == FailPolicy::Abort {
        if let Some(e) = first_error {
            return Err(e);
        }
    }
    Ok(extraction)
}

/// [`extract`] with the backend built from `cfg.backend`, then write the
/// dataset (and the rejects sidecar when enabled).
pub fn run<I>(contexts: I, cfg: &PipelineConfig) -> Result<RunReport, PipelineError>
where
    I: IntoIterator<Item = Context>,
{
    cfg.check()?;
    let backend = cfg.backend.build()?;
    run_with_backend(contexts, cfg, backend.as_ref())
}

pub fn run_with_backend<I>(
    contexts: I,
    cfg: &PipelineConfig,
    backend: &dyn Backend,
) -> Result<RunReport, PipelineError>
where
    I: IntoIterator<Item = Context>,
{
    let extraction = extract(contexts, cfg, backend)?;
    write_records(&extraction.records, &cfg.output_path)?;
    if cfg.keep_rejects {
        write_rejects(&extraction.rejects, &rejects_path(&cfg.output_path))?;
    }
    Ok(extraction.report)
}
