use serde::{Deserialize, Serialize};

use super::tokenize::{Pos, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhraseKind {
    NounPhrase,
    VerbPhrase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phrase {
    pub kind: PhraseKind,
    pub tokens: Vec<Token>,
    pub text: String,
}

impl Phrase {
    fn from_slice(kind: PhraseKind, tokens: &[Token]) -> Self {
        let mut text = String::new();
        for (i, t) in tokens.iter().enumerate() {
            let clitic =
                t.surface.starts_with(['\'', '\u{2019}']) || t.surface.eq_ignore_ascii_case("n't");
            if i > 0 && !clitic {
                text.push(' ');
            }
            text.push_str(&t.surface);
        }
        Phrase {
            kind,
            tokens: tokens.to_vec(),
            text,
        }
    }

    pub fn span(&self) -> (usize, usize) {
        (
            self.tokens[0].span.0,
            self.tokens[self.tokens.len() - 1].span.1,
        )
    }
}

fn is_nominal(p: Pos) -> bool {
    matches!(p, Pos::Noun | Pos::ProperNoun)
}

/// Length of a `Det? Adj* (Noun|ProperNoun)+` match starting at `i`.
fn match_noun_phrase(tags: &[Pos], i: usize) -> Option<usize> {
    let mut j = i;
    if tags.get(j) == Some(&Pos::Det) {
        j += 1;
    }
    while tags.get(j) == Some(&Pos::Adj) {
        j += 1;
    }
    let head = j;
    while tags.get(j).copied().is_some_and(is_nominal) {
        j += 1;
    }
    (j > head).then_some(j - i)
}

/// Length of an `Aux* Verb+` match starting at `i`.
fn match_verb_phrase(tags: &[Pos], i: usize) -> Option<usize> {
    let mut j = i;
    while tags.get(j) == Some(&Pos::Aux) {
        j += 1;
    }
    let head = j;
    while tags.get(j) == Some(&Pos::Verb) {
        j += 1;
    }
    (j > head).then_some(j - i)
}

fn scan(tokens: &[Token], tags: &[Pos], kind: PhraseKind, out: &mut Vec<Phrase>) {
    let matcher = match kind {
        PhraseKind::NounPhrase => match_noun_phrase,
        PhraseKind::VerbPhrase => match_verb_phrase,
    };
    let mut i = 0;
    while i < tags.len() {
        match matcher(tags, i) {
            Some(len) => {
                out.push(Phrase::from_slice(kind, &tokens[i..i + len]));
                i += len;
            }
            None => i += 1,
        }
    }
}

/// Leftmost-longest noun and verb phrase chunks over tagged tokens, ordered
/// by start position. Phrases of the same kind never overlap.
pub fn extract_phrases(tokens: &[Token]) -> Vec<Phrase> {
    let tags: Vec<Pos> = tokens.iter().map(|t| t.pos).collect();
    let mut phrases = Vec::new();
    scan(tokens, &tags, PhraseKind::NounPhrase, &mut phrases);
    scan(tokens, &tags, PhraseKind::VerbPhrase, &mut phrases);
    phrases.sort_by_key(|p| (p.span().0, p.kind == PhraseKind::VerbPhrase));
    phrases
}
