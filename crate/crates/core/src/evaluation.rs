//! Scoring: answer similarity, crowd-vote aggregation, validator
//! precision/recall and per-property report tables.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::embeddings::{cosine, embed_text, VectorStore};
use crate::model::{parse_property, Context, GoldLabel, JudgeVote, Label, TemporalProperty};
use crate::pipeline::{read_jsonl, PipelineError};
use crate::text::find_markers;
use crate::validators::{best_phrase_similarity, ValidationConfig, ValidationError};

#[derive(Debug, Error)]
pub enum EvaluationError {
    #[error("no votes for item {0:?}")]
    NoVotes(String),
    #[error("judge {judge_id:?} voted twice on item {item_id:?}")]
    DuplicateJudge { item_id: String, judge_id: String },
    #[error("votes for more than one item passed to a single-item aggregation")]
    MixedItems,
    #[error("duplicate item id {0:?}")]
    DuplicateItem(String),
    #[error("no items")]
    EmptyInput,
    #[error("every item has uncertain gold; nothing left to score")]
    EmptyAfterExclusion,
    #[error("thetas must be sorted ascending")]
    UnsortedThetas,
    #[error("item {0:?} has no gold counterpart")]
    MissingGold(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Io(#[from] PipelineError),
}

/// Cosine similarity of the averaged word vectors of `a` and `b`. A text
/// with no in-vocabulary word embeds to zero and scores 0.
pub fn semantic_similarity(a: &str, b: &str, store: &VectorStore) -> f64 {
    cosine(&embed_text(a, store), &embed_text(b, store)).expect("same store, same dimension")
}

/// Plurality label over one item's votes; a tie for the top count is
/// `Uncertain`.
pub fn aggregate_majority(votes: &[JudgeVote]) -> Result<GoldLabel, EvaluationError> {
    let Some(first) = votes.first() else {
        return Err(EvaluationError::NoVotes(String::new()));
    };
    let mut judges = HashSet::new();
    let mut counts = [0usize; 3];
    for v in votes {
        if v.item_id != first.item_id {
            return Err(EvaluationError::MixedItems);
        }
        if !judges.insert(v.judge_id.as_str()) {
            return Err(EvaluationError::DuplicateJudge {
                item_id: v.item_id.clone(),
                judge_id: v.judge_id.clone(),
            });
        }
        counts[label_index(v.label)] += 1;
    }
    let top = *counts.iter().max().expect("three counters");
    let leaders: Vec<_> = Label::ALL
        .iter()
        .filter(|&&l| counts[label_index(l)] == top)
        .collect();
    Ok(match leaders.as_slice() {
        [only] => **only,
        _ => Label::Uncertain,
    })
}

fn label_index(l: Label) -> usize {
    match l {
        Label::Valid => 0,
        Label::Invalid => 1,
        Label::Uncertain => 2,
    }
}

/// Group votes by item and aggregate each group.
pub fn aggregate_votes(
    votes: &[JudgeVote],
) -> Result<BTreeMap<String, GoldLabel>, EvaluationError> {
    let mut by_item: BTreeMap<&str, Vec<JudgeVote>> = BTreeMap::new();
    for v in votes {
        by_item
            .entry(v.item_id.as_str())
            .or_default()
            .push(v.clone());
    }
    by_item
        .into_iter()
        .map(|(id, vs)| Ok((id.to_string(), aggregate_majority(&vs)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledItem {
    pub item_id: String,
    /// Whether the validator accepted the item.
    pub prediction: bool,
    pub gold: GoldLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PRResult {
    /// `None` when nothing was predicted positive.
    pub precision: Option<f64>,
    /// `None` when no gold item is valid.
    pub recall: Option<f64>,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub excluded: usize,
}

pub fn validator_pr(items: &[LabeledItem]) -> Result<PRResult, EvaluationError> {
    if items.is_empty() {
        return Err(EvaluationError::EmptyInput);
    }
    let mut seen = HashSet::new();
    let mut r = PRResult {
        precision: None,
        recall: None,
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
        excluded: 0,
    };
    for item in items {
        if !seen.insert(item.item_id.as_str()) {
            return Err(EvaluationError::DuplicateItem(item.item_id.clone()));
        }
        match (item.prediction, item.gold) {
            (_, Label::Uncertain) => r.excluded += 1,
            (true, Label::Valid) => r.tp += 1,
            (true, Label::Invalid) => r.fp += 1,
            (false, Label::Valid) => r.fn_ += 1,
            (false, Label::Invalid) => r.tn += 1,
        }
    }
    if r.excluded == items.len() {
        return Err(EvaluationError::EmptyAfterExclusion);
    }
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    r.precision = ratio(r.tp, r.tp + r.fp);
    r.recall = ratio(r.tp, r.tp + r.fn_);
    Ok(r)
}

/// One judged answer: the expert verdict and/or its similarity to gold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub property: TemporalProperty,
    pub de_correct: Option<bool>,
    pub ss: Option<f64>,
}

impl ReportRow {
    pub fn new(property: TemporalProperty, de_correct: Option<bool>, ss: Option<f64>) -> Self {
        Self {
            property,
            de_correct,
            ss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportLine {
    pub property: TemporalProperty,
    pub de_judged: usize,
    pub de_correct: usize,
    /// Percentage in [0, 100].
    pub de_percent: Option<f64>,
    pub ss_count: usize,
    pub ss_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    /// Always five lines, in canonical property order.
    pub lines: Vec<ReportLine>,
    /// Pooled over all judged items.
    pub total_de_percent: Option<f64>,
    /// Mean of the per-property SS means that exist.
    pub avg_ss: Option<f64>,
}

const MISSING: &str = "\u{2014}";

fn cell(v: Option<f64>, suffix: &str) -> String {
    v.map_or_else(|| MISSING.to_string(), |x| format!("{x:.2}{suffix}"))
}

impl ReportTable {
    pub fn line(&self, property: TemporalProperty) -> &ReportLine {
        &self.lines[property.index()]
    }

    /// Aligned plain-text rendering, two decimals per cell.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<14}{:>10}{:>10}", "property", "DE", "SS");
        for l in &self.lines {
            let _ = writeln!(
                out,
                "{:<14}{:>10}{:>10}",
                l.property.canonical_form(),
                cell(l.de_percent, "%"),
                cell(l.ss_mean, "")
            );
        }
        let _ = writeln!(
            out,
            "{:<14}{:>10}{:>10}",
            "total/avg",
            cell(self.total_de_percent, "%"),
            cell(self.avg_ss, "")
        );
        out
    }
}

pub fn property_report(rows: &[ReportRow]) -> ReportTable {
    let mut lines: Vec<ReportLine> = TemporalProperty::ALL
        .iter()
        .map(|&property| ReportLine {
            property,
            de_judged: 0,
            de_correct: 0,
            de_percent: None,
            ss_count: 0,
            ss_mean: None,
        })
        .collect();
    let mut ss_sums = [0.0f64; 5];
    for row in rows {
        let i = row.property.index();
        if let Some(ok) = row.de_correct {
            lines[i].de_judged += 1;
            lines[i].de_correct += usize::from(ok);
        }
        if let Some(ss) = row.ss {
            lines[i].ss_count += 1;
            ss_sums[i] += ss;
        }
    }
    for (l, sum) in lines.iter_mut().zip(ss_sums) {
        if l.de_judged > 0 {
            l.de_percent = Some(100.0 * l.de_correct as f64 / l.de_judged as f64);
        }
        if l.ss_count > 0 {
            l.ss_mean = Some(sum / l.ss_count as f64);
        }
    }
    let judged: usize = lines.iter().map(|l| l.de_judged).sum();
    let correct: usize = lines.iter().map(|l| l.de_correct).sum();
    let total_de_percent = (judged > 0).then(|| 100.0 * correct as f64 / judged as f64);
    let means: Vec<f64> = lines.iter().filter_map(|l| l.ss_mean).collect();
    let avg_ss = (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64);
    ReportTable {
        lines,
        total_de_percent,
        avg_ss,
    }
}

/// Fraction of `pairs` the semantic validator accepts at each threshold.
/// Thresholds above 1 are clamped to 1 and below 0 to 0.
pub fn acceptance_rate_sweep(
    pairs: &[(Context, String)],
    base: &ValidationConfig,
    thetas: &[f64],
) -> Result<Vec<(f64, f64)>, EvaluationError> {
    if pairs.is_empty() {
        return Err(EvaluationError::EmptyInput);
    }
    if thetas.windows(2).any(|w| w[0] > w[1]) || thetas.iter().any(|t| t.is_nan()) {
        return Err(EvaluationError::UnsortedThetas);
    }
    let store = base
        .store
        .as_deref()
        .ok_or(ValidationError::MissingStore(base.mode))?;
    // Scores do not depend on theta; compute them once.
    let scores: Vec<Option<f64>> = pairs
        .iter()
        .map(|(ctx, q)| {
            (!find_markers(q, &base.lexicon).is_empty())
                .then(|| best_phrase_similarity(&ctx.text, q, store, base.tagger.as_ref()))
        })
        .collect();
    Ok(thetas
        .iter()
        .map(|&t| {
            let t = t.clamp(0.0, 1.0);
            let accepted = scores
                .iter()
                .filter(|s| s.is_some_and(|best| best >= t))
                .count();
            (t, accepted as f64 / pairs.len() as f64)
        })
        .collect())
}

/// Read `{"item_id", "judge_id", "label"}` lines.
pub fn read_votes(path: &Path) -> Result<Vec<JudgeVote>, EvaluationError> {
    Ok(read_jsonl(path)?)
}

/// Read `{"item_id", "prediction", "gold"}` lines.
pub fn read_labeled(path: &Path) -> Result<Vec<LabeledItem>, EvaluationError> {
    Ok(read_jsonl(path)?)
}

/// A generated or gold answer keyed by item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnswerRow {
    pub item_id: String,
    pub property: TemporalProperty,
    pub answer: String,
}

/// Read answer lines. Each line needs "property" and "answer", plus either
/// "item_id" or a dataset record's "context_id" (keyed as
/// `context_id/property`).
pub fn read_answers(path: &Path) -> Result<Vec<AnswerRow>, EvaluationError> {
    let values: Vec<Value> = read_jsonl(path)?;
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let bad = |reason: &str| {
                EvaluationError::Io(PipelineError::Format {
                    path: path.to_path_buf(),
                    line: i + 1,
                    reason: reason.to_string(),
                })
            };
            let text = |name: &str| v.get(name).and_then(Value::as_str);
            let property = parse_property(text("property").ok_or_else(|| bad("missing property"))?)
                .map_err(|e| bad(&e.to_string()))?;
            let answer = text("answer")
                .ok_or_else(|| bad("missing answer"))?
                .to_string();
            let item_id = match (text("item_id"), text("context_id")) {
                (Some(id), _) => id.to_string(),
                (None, Some(ctx)) => format!("{ctx}/{}", property.canonical_form()),
                (None, None) => return Err(bad("missing item_id")),
            };
            Ok(AnswerRow {
                item_id,
                property,
                answer,
            })
        })
        .collect()
}

/// Score each answer against the gold answer with the same item id.
pub fn answer_similarity_rows(
    answers: &[AnswerRow],
    gold: &[AnswerRow],
    store: &VectorStore,
) -> Result<Vec<ReportRow>, EvaluationError> {
    if answers.is_empty() {
        return Err(EvaluationError::EmptyInput);
    }
    let mut by_id: HashMap<&str, &AnswerRow> = HashMap::new();
    for g in gold {
        if by_id.insert(g.item_id.as_str(), g).is_some() {
            return Err(EvaluationError::DuplicateItem(g.item_id.clone()));
        }
    }
    answers
        .iter()
        .map(|a| {
            let g = by_id
                .get(a.item_id.as_str())
                .ok_or_else(|| EvaluationError::MissingGold(a.item_id.clone()))?;
            let ss = semantic_similarity(&a.answer, &g.answer, store);
            Ok(ReportRow::new(a.property, None, Some(ss)))
        })
        .collect()
}
