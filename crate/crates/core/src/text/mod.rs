//! Deterministic linguistic preprocessing for the validators: tokenization,
//! coarse tagging, lemmatization, phrase chunking and temporal-marker lookup.

mod chunk;
mod markers;
mod tagger;
mod tokenize;

use std::collections::BTreeSet;
use std::path::PathBuf;

use thiserror::Error;

pub use chunk::{extract_phrases, Phrase, PhraseKind};
pub use markers::{find_markers, MarkerLexicon, CORE_MARKERS};
pub use tagger::{lemmatize, LexiconTagger, Tagger};
pub use tokenize::{tokenize, Pos, Token};

#[derive(Debug, Error)]
pub enum TextError {
    #[error("input text is empty")]
    EmptyText,
    #[error("marker lexicon is empty")]
    EmptyLexicon,
    #[error("marker lexicon is missing core markers: {0:?}")]
    MissingCoreMarkers(Vec<String>),
    #[error("{path}:{line}: {reason}")]
    Format {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Tokenize and tag in one step.
pub fn analyze(text: &str, tagger: &dyn Tagger) -> Result<Vec<Token>, TextError> {
    let mut tokens = tokenize(text)?;
    tagger.tag(&mut tokens);
    Ok(tokens)
}

/// Lemmas of noun, proper-noun and verb tokens.
pub fn content_lemmas(tokens: &[Token]) -> BTreeSet<String> {
    tokens
        .iter()
        .filter(|t| matches!(t.pos, Pos::Noun | Pos::ProperNoun | Pos::Verb))
        .map(|t| t.lemma.clone())
        .collect()
}

/// Non-empty, non-comment lines of a line-oriented data file, with their
/// 1-based line numbers. Trailing `#` comments are stripped.
pub(crate) fn data_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines().enumerate().filter_map(|(i, line)| {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        let line = line.trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lemmas(text: &str) -> BTreeSet<String> {
        content_lemmas(&analyze(text, LexiconTagger::shared()).unwrap())
    }

    #[test]
    fn content_lemmas_of_emma_context() {
        let got = lemmas("Emma will be home soon and she will let Bob know");
        for want in ["emma", "bob", "let", "know", "home"] {
            assert!(got.contains(want), "missing {want} in {got:?}");
        }
        assert!(!got.contains("will"));
        assert!(!got.contains("she"));
    }

    #[test]
    fn determiners_only_give_nothing() {
        assert!(lemmas("the the the").is_empty());
    }

    #[test]
    fn inflections_collapse_to_one_lemma() {
        let got = lemmas("running runs ran");
        assert_eq!(got, BTreeSet::from(["run".to_string()]));
    }

    #[test]
    fn data_lines_strip_comments() {
        let src = "# header\nhow often  # trailing\n\n  before\n";
        let got: Vec<_> = data_lines(src).collect();
        assert_eq!(got, vec![(2, "how often"), (4, "before")]);
    }
}
