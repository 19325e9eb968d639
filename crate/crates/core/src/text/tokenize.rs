use serde::{Deserialize, Serialize};

use super::TextError;

/// Coarse part-of-speech classes. Validators only need to tell content
/// words (nouns, proper nouns, verbs) from the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    ProperNoun,
    Verb,
    Aux,
    Det,
    Adj,
    Other,
}

impl Pos {
    pub fn from_tag(tag: &str) -> Option<Pos> {
        Some(match tag.trim().to_ascii_uppercase().as_str() {
            "NOUN" => Pos::Noun,
            "PROPN" => Pos::ProperNoun,
            "VERB" => Pos::Verb,
            "AUX" => Pos::Aux,
            "DET" => Pos::Det,
            "ADJ" => Pos::Adj,
            "OTHER" => Pos::Other,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Always lowercase.
    pub lemma: String,
    pub pos: Pos,
    /// Byte offsets `(start, end)` into the source text.
    pub span: (usize, usize),
}

impl Token {
    fn untagged(text: &str, start: usize, end: usize) -> Self {
        let surface = text[start..end].to_string();
        Token {
            lemma: surface.to_lowercase(),
            surface,
            pos: Pos::Other,
            span: (start, end),
        }
    }

    pub fn is_alphabetic(&self) -> bool {
        self.surface.chars().any(char::is_alphabetic)
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

const CLITIC_SUFFIXES: [&str; 6] = ["s", "re", "ve", "ll", "d", "m"];

/// Split a raw word span into the word proper and an optional clitic.
fn split_clitic(word: &str) -> Option<usize> {
    let folded: String = word
        .chars()
        .map(|c| {
            if is_apostrophe(c) {
                '\''
            } else {
                c.to_ascii_lowercase()
            }
        })
        .collect();
    // "n't" splits before the n; byte offsets differ from `folded` when a
    // curly apostrophe is present, so locate it in `word` directly.
    if folded.ends_with("n't") && folded.chars().count() > 3 {
        let (apos_idx, _) = word.char_indices().rev().find(|&(_, c)| is_apostrophe(c))?;
        let n_idx = word[..apos_idx].char_indices().next_back()?.0;
        return (n_idx > 0).then_some(n_idx);
    }
    let (apos_idx, apos) = word.char_indices().rev().find(|&(_, c)| is_apostrophe(c))?;
    let suffix = word[apos_idx + apos.len_utf8()..].to_ascii_lowercase();
    (apos_idx > 0 && CLITIC_SUFFIXES.contains(&suffix.as_str())).then_some(apos_idx)
}

/// Split text into word and punctuation tokens. Every returned token is
/// untagged (`Pos::Other`, lemma = lowercased surface); run a [`Tagger`]
/// afterwards.
///
/// Words are runs of alphanumeric characters joined by single internal
/// hyphens or apostrophes. Clitics (`'s`, `n't`, `'re`, `'ve`, `'ll`, `'d`,
/// `'m`) become separate tokens. Any other non-space character is a
/// one-character token.
///
/// [`Tagger`]: super::Tagger
pub fn tokenize(text: &str) -> Result<Vec<Token>, TextError> {
    if text.is_empty() {
        return Err(TextError::EmptyText);
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !c.is_alphanumeric() {
            tokens.push(Token::untagged(text, byte_at(i), byte_at(i + 1)));
            i += 1;
            continue;
        }
        let start = i;
        loop {
            while i < chars.len() && chars[i].1.is_alphanumeric() {
                i += 1;
            }
            let joiner = chars.get(i).map(|&(_, c)| c == '-' || is_apostrophe(c));
            let continues = chars.get(i + 1).map(|&(_, c)| c.is_alphanumeric());
            if joiner == Some(true) && continues == Some(true) {
                i += 1;
            } else {
                break;
            }
        }
        let (s, e) = (byte_at(start), byte_at(i));
        match split_clitic(&text[s..e]) {
            Some(cut) => {
                tokens.push(Token::untagged(text, s, s + cut));
                tokens.push(Token::untagged(text, s + cut, e));
            }
            None => tokens.push(Token::untagged(text, s, e)),
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn surfaces(text: &str) -> Vec<String> {
        tokenize(text)
            .unwrap()
            .into_iter()
            .map(|t| t.surface)
            .collect()
    }

    #[test]
    fn whitespace_words() {
        let toks = tokenize("Emma will be home soon").unwrap();
        assert_eq!(toks.len(), 5);
        assert_eq!(toks[0].span, (0, 4));
        assert_eq!(toks[4].span, (18, 22));
    }

    #[test]
    fn clitics_split() {
        assert_eq!(surfaces("she's late"), ["she", "'s", "late"]);
        assert_eq!(surfaces("don't"), ["do", "n't"]);
        assert_eq!(surfaces("they\u{2019}re"), ["they", "\u{2019}re"]);
        assert_eq!(surfaces("isn\u{2019}t"), ["is", "n\u{2019}t"]);
        assert_eq!(surfaces("O'Brien"), ["O'Brien"]);
    }

    #[test]
    fn hyphenated_words_stay_whole() {
        assert_eq!(
            surfaces("a well-known day-to-day rule"),
            ["a", "well-known", "day-to-day", "rule"]
        );
        assert_eq!(surfaces("wait - now"), ["wait", "-", "now"]);
    }

    #[test]
    fn punctuation_is_separate() {
        assert_eq!(surfaces("How often?"), ["How", "often", "?"]);
        assert_eq!(surfaces("'quoted'"), ["'", "quoted", "'"]);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(tokenize(""), Err(TextError::EmptyText)));
        assert!(tokenize("   ").unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn spans_reconstruct_text(text in "[a-zA-Z0-9 ,.?!'\u{2019}\\-é\n]{1,60}") {
            let toks = tokenize(&text).unwrap();
            let mut cursor = 0;
            for t in &toks {
                prop_assert!(t.span.0 < t.span.1 && t.span.1 <= text.len());
                prop_assert!(t.span.0 >= cursor);
                prop_assert!(text[cursor..t.span.0].chars().all(char::is_whitespace));
                prop_assert_eq!(&text[t.span.0..t.span.1], t.surface.as_str());
                cursor = t.span.1;
            }
            prop_assert!(text[cursor..].chars().all(char::is_whitespace));
            prop_assert_eq!(tokenize(&text).unwrap(), toks);
        }
    }
}
