use crate::model::{Context, TemporalProperty};
use crate::text::{analyze, extract_phrases, LexiconTagger, PhraseKind, Pos, Token};

use super::{Backend, BackendError};

/// Deterministic rule-based backend.
///
/// Questions are built from the first clause of the context: its first noun
/// phrase is the subject and the auxiliary or verb that follows drives a
/// per-property template ("When will Emma be home?"). Answers are fixed per
/// property; a non-zero seed picks among a few alternatives with a stable
/// hash of the input.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    seed: u64,
}

const ANSWERS: [(TemporalProperty, &[&str]); 5] = [
    (
        TemporalProperty::Duration,
        &["a few hours", "30 minutes", "two days"],
    ),
    (
        TemporalProperty::TypicalTime,
        &["6 PM", "in the morning", "at noon"],
    ),
    (
        TemporalProperty::Frequency,
        &["once a week", "every day", "twice a year"],
    ),
    (TemporalProperty::Stationarity, &["yes", "no"]),
    (
        TemporalProperty::EventOrder,
        &["they went home", "they had dinner", "they called a friend"],
    ),
];

/// 64-bit FNV-1a; stable across platforms and toolchains, unlike `std`'s hasher.
fn fnv1a(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in *part {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

struct Clause {
    subject: String,
    aux: String,
    predicate: String,
    /// Subject plus the clause as written, for "after ..." templates.
    finite: String,
}

fn join(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| t.surface.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_predicate_part(pos: Pos) -> bool {
    matches!(
        pos,
        Pos::Aux | Pos::Verb | Pos::Noun | Pos::ProperNoun | Pos::Det | Pos::Adj
    )
}

fn is_object_part(pos: Pos) -> bool {
    matches!(pos, Pos::Noun | Pos::ProperNoun | Pos::Det | Pos::Adj)
}

fn first_clause(text: &str) -> Clause {
    let tokens = analyze(text, LexiconTagger::shared()).unwrap_or_default();
    let end = tokens
        .iter()
        .position(|t| matches!(t.surface.as_str(), "." | "!" | "?"))
        .unwrap_or(tokens.len());
    let tokens = &tokens[..end];
    let subject = extract_phrases(tokens)
        .into_iter()
        .find(|p| p.kind == PhraseKind::NounPhrase);
    let Some(subject) = subject else {
        return Clause {
            subject: "it".into(),
            aux: "does".into(),
            predicate: "happen".into(),
            finite: "it happens".into(),
        };
    };
    let start = tokens
        .iter()
        .position(|t| t.span == subject.tokens[0].span)
        .unwrap_or(0);
    let after = start + subject.tokens.len();
    let mut subject_text = subject.text.clone();
    if subject.tokens[0].pos == Pos::Det {
        subject_text =
            subject_text.replacen(&subject.tokens[0].surface, &subject.tokens[0].lemma, 1);
    }
    // `from` is at most tokens.len(): callers pass the index after a token.
    let run = |from: usize, keep: fn(Pos) -> bool| {
        let len = tokens[from..].iter().take_while(|t| keep(t.pos)).count();
        &tokens[from..from + len]
    };
    match tokens.get(after).map(|t| t.pos) {
        Some(Pos::Aux) => {
            let predicate = run(after + 1, is_predicate_part);
            if !predicate.is_empty() {
                return Clause {
                    aux: aux_word(&tokens[after]),
                    predicate: join(predicate),
                    finite: format!(
                        "{subject_text} {} {}",
                        tokens[after].surface,
                        join(predicate)
                    ),
                    subject: subject_text,
                };
            }
        }
        Some(Pos::Verb) => {
            let verb = &tokens[after];
            let aux = if verb.surface.to_lowercase() == verb.lemma {
                "do"
            } else if verb.surface.ends_with('s') {
                "does"
            } else {
                "did"
            };
            let object = run(after + 1, is_object_part);
            let mut predicate = verb.lemma.clone();
            let mut finite = format!("{subject_text} {}", verb.surface);
            if !object.is_empty() {
                predicate = format!("{predicate} {}", join(object));
                finite = format!("{finite} {}", join(object));
            }
            return Clause {
                subject: subject_text,
                aux: aux.into(),
                predicate,
                finite,
            };
        }
        _ => {}
    }
    Clause {
        finite: format!("{subject_text} happens"),
        subject: subject_text,
        aux: "does".into(),
        predicate: "happen".into(),
    }
}

/// Auxiliary as a standalone word; clitics ("'ll") are spelled out via their lemma.
fn aux_word(t: &Token) -> String {
    if t.surface.starts_with(['\'', '\u{2019}']) {
        t.lemma.clone()
    } else {
        t.surface.to_lowercase()
    }
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

impl MockBackend {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn question_for(&self, context: &str, property: TemporalProperty) -> String {
        let c = first_clause(context);
        let (aux, subj, pred) = (&c.aux, &c.subject, &c.predicate);
        match property {
            TemporalProperty::Duration => format!("How long {aux} {subj} {pred}?"),
            TemporalProperty::TypicalTime => format!("When {aux} {subj} {pred}?"),
            TemporalProperty::Frequency => format!("How often {aux} {subj} {pred}?"),
            TemporalProperty::Stationarity => format!("{} {subj} still {pred}?", capitalize(aux)),
            TemporalProperty::EventOrder => format!("What happens after {}?", c.finite),
        }
    }

    pub fn answer_for(&self, context: &str, question: &str, property: TemporalProperty) -> String {
        let options = ANSWERS[property.index()].1;
        if self.seed == 0 {
            return options[0].to_string();
        }
        let h = fnv1a(&[
            &self.seed.to_le_bytes(),
            context.as_bytes(),
            question.as_bytes(),
            property.canonical_form().as_bytes(),
        ]);
        options[(h % options.len() as u64) as usize].to_string()
    }
}

impl Backend for MockBackend {
    fn name(&self) -> String {
        format!("mock:seed={}", self.seed)
    }

    fn generate_question(
        &self,
        context: &Context,
        property: TemporalProperty,
    ) -> Result<String, BackendError> {
        Ok(self.question_for(&context.text, property))
    }

    fn generate_answer(
        &self,
        context: &Context,
        question: &str,
        property: TemporalProperty,
    ) -> Result<String, BackendError> {
        Ok(self.answer_for(&context.text, question, property))
    }
}
