//! Domain types shared by the extraction pipeline and the evaluation harness.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown temporal property: {0:?}")]
    UnknownProperty(String),
    #[error("unknown validator mode: {0:?}")]
    UnknownValidatorMode(String),
    #[error("unknown label: {0:?}")]
    UnknownLabel(String),
    #[error("context text is empty")]
    EmptyContext,
    #[error("question text is empty")]
    EmptyQuestion,
    #[error("answer text is empty")]
    EmptyAnswer,
    #[error("semantic score and verdict must be present together")]
    ScoreVerdictMismatch,
    #[error("theta must be present exactly when the validator includes the semantic check")]
    ThetaMismatch,
    #[error("theta {0} is outside [0, 1]")]
    ThetaOutOfRange(f64),
}

/// The five kinds of temporal commonsense a question can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TemporalProperty {
    Duration,
    TypicalTime,
    Frequency,
    Stationarity,
    EventOrder,
}

impl TemporalProperty {
    /// All variants in canonical order. Output files are sorted by this order.
    pub const ALL: [TemporalProperty; 5] = [
        TemporalProperty::Duration,
        TemporalProperty::TypicalTime,
        TemporalProperty::Frequency,
        TemporalProperty::Stationarity,
        TemporalProperty::EventOrder,
    ];

    /// String form used in files, prompts and on the wire.
    pub fn canonical_form(self) -> &'static str {
        match self {
            TemporalProperty::Duration => "duration",
            TemporalProperty::TypicalTime => "typical time",
            TemporalProperty::Frequency => "frequency",
            TemporalProperty::Stationarity => "stationary",
            TemporalProperty::EventOrder => "event order",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for TemporalProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical_form())
    }
}

/// Case- and whitespace-insensitive parse. "stationarity" is accepted as an
/// alias of "stationary".
pub fn parse_property(s: &str) -> Result<TemporalProperty, ModelError> {
    let normalized = s
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ");
    if normalized == "stationarity" {
        return Ok(TemporalProperty::Stationarity);
    }
    TemporalProperty::ALL
        .into_iter()
        .find(|p| p.canonical_form() == normalized)
        .ok_or_else(|| ModelError::UnknownProperty(s.to_string()))
}

impl FromStr for TemporalProperty {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_property(s)
    }
}

impl Serialize for TemporalProperty {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.canonical_form())
    }
}

impl<'de> Deserialize<'de> for TemporalProperty {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_property(&s).map_err(serde::de::Error::custom)
    }
}

/// Which validators gate a question.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValidatorMode {
    #[default]
    Lexical,
    Semantic,
    Both,
}

impl ValidatorMode {
    pub fn uses_lexical(self) -> bool {
        matches!(self, ValidatorMode::Lexical | ValidatorMode::Both)
    }

    pub fn uses_semantic(self) -> bool {
        matches!(self, ValidatorMode::Semantic | ValidatorMode::Both)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ValidatorMode::Lexical => "lexical",
            ValidatorMode::Semantic => "semantic",
            ValidatorMode::Both => "both",
        }
    }
}

impl fmt::Display for ValidatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ValidatorMode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "lexical" => Ok(ValidatorMode::Lexical),
            "semantic" => Ok(ValidatorMode::Semantic),
            "both" => Ok(ValidatorMode::Both),
            _ => Err(ModelError::UnknownValidatorMode(s.to_string())),
        }
    }
}

/// A short input text, the unit of extraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub id: String,
    pub text: String,
    pub source: String,
}

impl Context {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        source: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(ModelError::EmptyContext);
        }
        Ok(Self {
            id: id.into(),
            text,
            source: source.into(),
        })
    }
}

/// A generated question bound to its context and target property, together
/// with whatever validator verdicts were computed for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateQuestion {
    pub context_id: String,
    pub property: TemporalProperty,
    pub text: String,
    pub lexical_verdict: Option<bool>,
    pub semantic_verdict: Option<bool>,
    pub semantic_score: Option<f64>,
}

impl CandidateQuestion {
    pub fn new(
        context_id: impl Into<String>,
        property: TemporalProperty,
        text: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(ModelError::EmptyQuestion);
        }
        Ok(Self {
            context_id: context_id.into(),
            property,
            text,
            lexical_verdict: None,
            semantic_verdict: None,
            semantic_score: None,
        })
    }

    pub fn set_semantic(&mut self, verdict: bool, score: f64) {
        self.semantic_verdict = Some(verdict);
        self.semantic_score = Some(score);
    }

    /// True when at least one verdict is populated and every populated
    /// verdict is positive.
    pub fn is_accepted(&self) -> bool {
        let verdicts = [self.lexical_verdict, self.semantic_verdict];
        verdicts.iter().any(Option::is_some) && verdicts.iter().flatten().all(|v| *v)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if self.text.trim().is_empty() {
            return Err(ModelError::EmptyQuestion);
        }
        if self.semantic_score.is_some() != self.semantic_verdict.is_some() {
            return Err(ModelError::ScoreVerdictMismatch);
        }
        Ok(())
    }
}

/// One row of the emitted dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TComQARecord {
    pub context_id: String,
    pub context_text: String,
    pub property: TemporalProperty,
    pub question: String,
    pub answer: String,
    pub validator_used: ValidatorMode,
    pub theta: Option<f64>,
    pub backend_name: String,
    #[serde(with = "iso_utc")]
    pub created_at: DateTime<Utc>,
}

impl TComQARecord {
    pub fn check(&self) -> Result<(), ModelError> {
        if self.answer.trim().is_empty() {
            return Err(ModelError::EmptyAnswer);
        }
        if self.question.trim().is_empty() {
            return Err(ModelError::EmptyQuestion);
        }
        if self.theta.is_some() != self.validator_used.uses_semantic() {
            return Err(ModelError::ThetaMismatch);
        }
        if let Some(t) = self.theta {
            if !(0.0..=1.0).contains(&t) {
                return Err(ModelError::ThetaOutOfRange(t));
            }
        }
        Ok(())
    }
}

mod iso_utc {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(dt: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&dt.to_rfc3339_opts(SecondsFormat::AutoSi, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|dt| dt.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

/// A crowd judgement, also used as the aggregated gold label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Valid,
    Invalid,
    Uncertain,
}

pub type GoldLabel = Label;

impl Label {
    pub const ALL: [Label; 3] = [Label::Valid, Label::Invalid, Label::Uncertain];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Valid => "valid",
            Label::Invalid => "invalid",
            Label::Uncertain => "uncertain",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "valid" => Ok(Label::Valid),
            "invalid" => Ok(Label::Invalid),
            "uncertain" => Ok(Label::Uncertain),
            _ => Err(ModelError::UnknownLabel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeVote {
    pub item_id: String,
    pub judge_id: String,
    pub label: Label,
}

impl JudgeVote {
    pub fn new(item_id: impl Into<String>, judge_id: impl Into<String>, label: Label) -> Self {
        Self {
            item_id: item_id.into(),
            judge_id: judge_id.into(),
            label,
        }
    }
}
