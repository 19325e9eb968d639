//! Temporal commonsense extraction from short texts.
//!
//! For every context and every temporal property the pipeline generates a
//! question, checks it with a lexical and/or semantic validator, asks a
//! model backend for an answer, and writes the surviving question-answer
//! pairs as JSON lines. The [`evaluation`] module scores the results against
//! crowd labels and gold answers.

pub mod backends;
pub mod embeddings;
pub mod evaluation;
pub mod model;
pub mod pipeline;
pub mod text;
pub mod validators;

pub use backends::{Backend, BackendConfig, BackendError, BackendKind};
pub use embeddings::{cosine, embed_text, load_vectors, VectorStore};
pub use model::{
    parse_property, CandidateQuestion, Context, GoldLabel, JudgeVote, Label, TComQARecord,
    TemporalProperty, ValidatorMode,
};
pub use pipeline::{FailPolicy, PipelineConfig, RunReport};
pub use text::{MarkerLexicon, Token};
pub use validators::{ValidationConfig, DEFAULT_THETA};

use thiserror::Error;

/// Crate-level error wrapping each module's error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Text(#[from] text::TextError),
    #[error(transparent)]
    Embedding(#[from] embeddings::EmbeddingError),
    #[error(transparent)]
    Validation(#[from] validators::ValidationError),
    #[error(transparent)]
    Backend(#[from] backends::BackendError),
    #[error(transparent)]
    Pipeline(#[from] pipeline::PipelineError),
    #[error(transparent)]
    Evaluation(#[from] evaluation::EvaluationError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
