use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use super::tokenize::{Pos, Token};
use super::{data_lines, TextError};

const DEFAULT_LEXICON: &str = include_str!("../../data/tagger_lexicon.tsv");
const DEFAULT_EXCEPTIONS: &str = include_str!("../../data/lemma_exceptions.tsv");

/// Assigns `pos` and `lemma` to tokens produced by [`super::tokenize`].
pub trait Tagger: Send + Sync + fmt::Debug {
    fn tag(&self, tokens: &mut [Token]);
}

/// Closed-class word list plus suffix heuristics.
///
/// Rules, first match wins:
/// 1. no alphabetic character: `Other`
/// 2. clitic table (`'s`, `n't` are `Other`; `'re`, `'ll`, ... are `Aux`)
/// 3. capitalized and not sentence-initial: `ProperNoun`
/// 4. lexicon entry for the lowercased word
/// 5. suffix rules: `-ly` adverb, `-ing`/`-ed` verb, `-s` verb after a
///    nominal subject and noun otherwise
/// 6. word after a modal, `do` or `to`: `Verb`
/// 7. sentence-initial capitalized word: `ProperNoun`, otherwise `Noun`
#[derive(Clone, Default)]
pub struct LexiconTagger {
    tags: HashMap<String, Pos>,
    lemmas: HashMap<String, String>,
}

impl fmt::Debug for LexiconTagger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LexiconTagger")
            .field("tags", &self.tags.len())
            .field("lemmas", &self.lemmas.len())
            .finish()
    }
}

const CLITICS: [(&str, Pos); 7] = [
    ("'s", Pos::Other),
    ("n't", Pos::Other),
    ("'re", Pos::Aux),
    ("'ve", Pos::Aux),
    ("'ll", Pos::Aux),
    ("'d", Pos::Aux),
    ("'m", Pos::Aux),
];

const VERB_TRIGGERS: [&str; 15] = [
    "will", "would", "can", "could", "shall", "should", "may", "might", "must", "to", "do", "does",
    "did", "'ll", "'d",
];

const SUBJECT_PRONOUNS: [&str; 5] = ["he", "she", "it", "who", "that"];

impl LexiconTagger {
    /// Tagger backed by the lexicon and exception tables shipped with the crate.
    pub fn shared() -> &'static LexiconTagger {
        static SHARED: OnceLock<LexiconTagger> = OnceLock::new();
        SHARED.get_or_init(|| {
            LexiconTagger::from_strs(DEFAULT_LEXICON, DEFAULT_EXCEPTIONS)
                .expect("bundled tagger tables are well-formed")
        })
    }

    pub fn from_strs(lexicon: &str, exceptions: &str) -> Result<Self, TextError> {
        let mut tags = HashMap::new();
        for (line, row) in data_lines(lexicon) {
            let (word, tag) = split_row(row, line, "<lexicon>")?;
            let pos = Pos::from_tag(tag).ok_or_else(|| TextError::Format {
                path: "<lexicon>".into(),
                line,
                reason: format!("unknown tag {tag:?}"),
            })?;
            tags.insert(word.to_lowercase(), pos);
        }
        let mut lemmas = HashMap::new();
        for (line, row) in data_lines(exceptions) {
            let (word, lemma) = split_row(row, line, "<exceptions>")?;
            lemmas.insert(word.to_lowercase(), lemma.to_lowercase());
        }
        Ok(Self { tags, lemmas })
    }

    pub fn from_files(lexicon: &Path, exceptions: &Path) -> Result<Self, TextError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|source| TextError::Io {
                path: p.to_path_buf(),
                source,
            })
        };
        Self::from_strs(&read(lexicon)?, &read(exceptions)?)
    }

    fn classify(&self, tokens: &[Token], i: usize, prev: Option<Pos>) -> Pos {
        let token = &tokens[i];
        if !token.is_alphabetic() {
            return Pos::Other;
        }
        let lower = fold(&token.surface);
        if let Some(&(_, pos)) = CLITICS.iter().find(|(c, _)| *c == lower) {
            return pos;
        }
        let capitalized = token.surface.chars().next().is_some_and(char::is_uppercase);
        let initial = i == 0 || matches!(tokens[i - 1].surface.as_str(), "." | "!" | "?");
        if capitalized && !initial && lower != "i" {
            return Pos::ProperNoun;
        }
        if let Some(&pos) = self.tags.get(&lower) {
            return pos;
        }
        if let Some(pos) = suffix_rule(&lower, prev, i.checked_sub(1).map(|j| &tokens[j])) {
            return pos;
        }
        if i > 0 && VERB_TRIGGERS.contains(&fold(&tokens[i - 1].surface).as_str()) {
            return Pos::Verb;
        }
        if capitalized {
            Pos::ProperNoun
        } else {
            Pos::Noun
        }
    }
}

fn split_row<'a>(row: &'a str, line: usize, path: &str) -> Result<(&'a str, &'a str), TextError> {
    let mut parts = row.split('\t').map(str::trim).filter(|s| !s.is_empty());
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => Ok((a, b)),
        _ => Err(TextError::Format {
            path: path.into(),
            line,
            reason: "expected word<TAB>value".into(),
        }),
    }
}

fn fold(s: &str) -> String {
    s.to_lowercase().replace('\u{2019}', "'")
}

fn suffix_rule(lower: &str, prev: Option<Pos>, prev_token: Option<&Token>) -> Option<Pos> {
    let len = lower.chars().count();
    if len > 4 && lower.ends_with("ly") {
        return Some(Pos::Other);
    }
    if len > 4 && lower.ends_with("ing") {
        return Some(Pos::Verb);
    }
    if len > 3 && lower.ends_with("ed") {
        return Some(Pos::Verb);
    }
    if len > 3 && lower.ends_with('s') && !["ss", "us", "is"].iter().any(|s| lower.ends_with(s)) {
        let after_subject = matches!(prev, Some(Pos::Noun | Pos::ProperNoun))
            || prev_token.is_some_and(|t| SUBJECT_PRONOUNS.contains(&fold(&t.surface).as_str()));
        return Some(if after_subject { Pos::Verb } else { Pos::Noun });
    }
    None
}

impl Tagger for LexiconTagger {
    fn tag(&self, tokens: &mut [Token]) {
        let mut prev = None;
        for i in 0..tokens.len() {
            let pos = self.classify(tokens, i, prev);
            let lemma = lemmatize(&tokens[i].surface, pos, &self.lemmas);
            tokens[i].pos = pos;
            tokens[i].lemma = lemma;
            prev = Some(pos);
        }
    }
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Undo consonant doubling ("runn" -> "run") and restore a dropped final
/// "e" ("mak" -> "make") on a stem left by removing -ing/-ed.
fn repair_stem(stem: &str) -> String {
    let c: Vec<char> = stem.chars().collect();
    let n = c.len();
    if n >= 4 {
        let (a, b) = (c[n - 2], c[n - 1]);
        if a == b
            && !is_vowel(a)
            && !matches!(a, 'l' | 's' | 'z')
            && is_vowel(c[n - 3])
            && !is_vowel(c[n - 4])
        {
            return c[..n - 1].iter().collect();
        }
    }
    if n == 3
        && !is_vowel(c[0])
        && is_vowel(c[1])
        && !is_vowel(c[2])
        && !matches!(c[2], 'w' | 'x' | 'y')
    {
        return format!("{stem}e");
    }
    if n > 1 && matches!(c[n - 1], 'v' | 'u') {
        return format!("{stem}e");
    }
    stem.to_string()
}

fn strip_plural(w: &str) -> Option<String> {
    if w.chars().count() <= 3 {
        return None;
    }
    if let Some(stem) = w.strip_suffix("ies") {
        if stem.chars().count() >= 2 {
            return Some(format!("{stem}y"));
        }
    }
    for sfx in ["sses", "ches", "shes", "xes", "zes"] {
        if w.ends_with(sfx) {
            return Some(w[..w.len() - 2].to_string());
        }
    }
    if w.ends_with("ss") || w.ends_with("us") || w.ends_with("is") {
        return None;
    }
    w.strip_suffix('s').map(str::to_string)
}

fn verb_lemma(w: &str) -> String {
    let len = w.chars().count();
    if len > 4 {
        if let Some(stem) = w.strip_suffix("ing") {
            return repair_stem(stem);
        }
    }
    if len > 3 {
        if let Some(stem) = w.strip_suffix("ied").filter(|s| s.chars().count() >= 2) {
            return format!("{stem}y");
        }
        if let Some(stem) = w.strip_suffix("ed") {
            return repair_stem(stem);
        }
    }
    strip_plural(w).unwrap_or_else(|| w.to_string())
}

/// Rule-based lemma for a surface form given its tag. Proper nouns are
/// lowercased only.
pub fn lemmatize(surface: &str, pos: Pos, exceptions: &HashMap<String, String>) -> String {
    let lower = fold(surface);
    match pos {
        Pos::ProperNoun | Pos::Other | Pos::Det => lower,
        _ => {
            if let Some(l) = exceptions.get(&lower) {
                return l.clone();
            }
            match pos {
                Pos::Noun => strip_plural(&lower).unwrap_or(lower),
                Pos::Verb => verb_lemma(&lower),
                _ => lower,
            }
        }
    }
}
