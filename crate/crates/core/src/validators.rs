//! Lexical and semantic question validators.
//!
//! The lexical validator accepts a question when it carries a temporal
//! marker and shares at least one content lemma with its context. The
//! semantic validator replaces the lemma overlap with a phrase-similarity
//! test: some context phrase and question phrase must reach cosine
//! similarity `theta`.

use std::sync::Arc;

use thiserror::Error;

use crate::embeddings::{cosine, embed_text, VectorStore};
use crate::model::{CandidateQuestion, Context, TemporalProperty, ValidatorMode};
use crate::text::{
    analyze, content_lemmas, extract_phrases, find_markers, LexiconTagger, MarkerLexicon, Tagger,
};

pub const DEFAULT_THETA: f64 = 0.5;

/// Best score reported when either side has no phrases.
pub const NO_PHRASES_SCORE: f64 = -1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("theta {0} is outside [0, 1]")]
    ThetaOutOfRange(f64),
    #[error("mode {0} needs a vector store")]
    MissingStore(ValidatorMode),
}

#[derive(Debug, Clone)]
pub struct ValidationConfig {
    pub theta: f64,
    pub mode: ValidatorMode,
    pub lexicon: Arc<MarkerLexicon>,
    pub store: Option<Arc<VectorStore>>,
    pub tagger: Arc<dyn Tagger>,
}

impl ValidationConfig {
    pub fn new(
        mode: ValidatorMode,
        theta: f64,
        lexicon: Arc<MarkerLexicon>,
        store: Option<Arc<VectorStore>>,
    ) -> Result<Self, ValidationError> {
        let cfg = Self {
            theta,
            mode,
            lexicon,
            store,
            tagger: Arc::new(LexiconTagger::shared().clone()),
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Lexical mode over the bundled marker lexicon.
    pub fn lexical() -> Self {
        Self::new(
            ValidatorMode::Lexical,
            DEFAULT_THETA,
            Arc::new(MarkerLexicon::default()),
            None,
        )
        .expect("lexical config needs no store")
    }

    pub fn with_tagger(mut self, tagger: Arc<dyn Tagger>) -> Self {
        self.tagger = tagger;
        self
    }

    pub fn check(&self) -> Result<(), ValidationError> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(ValidationError::ThetaOutOfRange(self.theta));
        }
        if self.mode.uses_semantic() && self.store.is_none() {
            return Err(ValidationError::MissingStore(self.mode));
        }
        Ok(())
    }

    /// The theta recorded in dataset rows: present only for semantic modes.
    pub fn recorded_theta(&self) -> Option<f64> {
        self.mode.uses_semantic().then_some(self.theta)
    }
}

fn has_marker(question: &str, lexicon: &MarkerLexicon) -> bool {
    !find_markers(question, lexicon).is_empty()
}

pub fn validate_lexical_with(
    context: &str,
    question: &str,
    lexicon: &MarkerLexicon,
    tagger: &dyn Tagger,
) -> bool {
    if !has_marker(question, lexicon) {
        return false;
    }
    let (Ok(c), Ok(q)) = (analyze(context, tagger), analyze(question, tagger)) else {
        return false;
    };
    let (c, q) = (content_lemmas(&c), content_lemmas(&q));
    c.intersection(&q).next().is_some()
}

/// Lexical validator with the bundled tagger.
pub fn validate_lexical(context: &Context, question: &str, lexicon: &MarkerLexicon) -> bool {
    validate_lexical_with(&context.text, question, lexicon, LexiconTagger::shared())
}

/// Highest phrase-pair cosine similarity between context and question, or
/// [`NO_PHRASES_SCORE`] when either has no noun or verb phrase.
pub fn best_phrase_similarity(
    context: &str,
    question: &str,
    store: &VectorStore,
    tagger: &dyn Tagger,
) -> f64 {
    let embed_phrases = |text: &str| -> Vec<Vec<f64>> {
        analyze(text, tagger)
            .map(|toks| extract_phrases(&toks))
            .unwrap_or_default()
            .iter()
            .map(|p| embed_text(&p.text, store))
            .collect()
    };
    let (cp, qp) = (embed_phrases(context), embed_phrases(question));
    let mut best = NO_PHRASES_SCORE;
    for i in &cp {
        for j in &qp {
            let sim = cosine(i, j).expect("embeddings share the store dimension");
            best = best.max(sim);
        }
    }
    best
}

/// Semantic validator. Returns the verdict and the best phrase similarity.
pub fn validate_semantic(
    context: &Context,
    question: &str,
    cfg: &ValidationConfig,
) -> Result<(bool, f64), ValidationError> {
    let store = cfg
        .store
        .as_deref()
        .ok_or(ValidationError::MissingStore(cfg.mode))?;
    let best = best_phrase_similarity(&context.text, question, store, cfg.tagger.as_ref());
    let accepted = best >= cfg.theta && has_marker(question, &cfg.lexicon);
    Ok((accepted, best))
}

/// Run the validators selected by `cfg.mode` and record their verdicts.
pub fn validate(
    context: &Context,
    property: TemporalProperty,
    question: &str,
    cfg: &ValidationConfig,
) -> Result<CandidateQuestion, crate::Error> {
    cfg.check()?;
    let mut candidate = CandidateQuestion::new(context.id.clone(), property, question)?;
    if cfg.mode.uses_lexical() {
        candidate.lexical_verdict = Some(validate_lexical_with(
            &context.text,
            question,
            &cfg.lexicon,
            cfg.tagger.as_ref(),
        ));
    }
    if cfg.mode.uses_semantic() {
        let (verdict, score) = validate_semantic(context, question, cfg)?;
        candidate.set_semantic(verdict, score);
    }
    Ok(candidate)
}
