use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use super::tokenize::tokenize;
use super::{data_lines, TextError};

const DEFAULT_MARKERS: &str = include_str!("../../data/markers.txt");

/// Markers every lexicon must contain.
pub const CORE_MARKERS: [&str; 6] = [
    "how often",
    "how long",
    "what time",
    "which year",
    "before",
    "afterward",
];

/// Set of lowercase, whitespace-normalized temporal cue phrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkerLexicon {
    entries: BTreeSet<String>,
    // first word -> (word sequence, entry), longest sequence first
    index: HashMap<String, Vec<(Vec<String>, String)>>,
}

fn words_of(s: &str) -> Vec<String> {
    tokenize(s)
        .map(|toks| toks.into_iter().map(|t| fold(&t.surface)).collect())
        .unwrap_or_default()
}

fn fold(s: &str) -> String {
    s.to_lowercase().replace('\u{2019}', "'")
}

impl MarkerLexicon {
    pub fn from_entries<I, S>(entries: I) -> Result<Self, TextError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let entries: BTreeSet<String> = entries
            .into_iter()
            .map(|e| {
                e.as_ref()
                    .split_whitespace()
                    .collect::<Vec<_>>()
                    .join(" ")
                    .to_lowercase()
            })
            .filter(|e| !e.is_empty())
            .collect();
        if entries.is_empty() {
            return Err(TextError::EmptyLexicon);
        }
        let missing: Vec<String> = CORE_MARKERS
            .iter()
            .filter(|m| !entries.contains(**m))
            .map(|m| m.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(TextError::MissingCoreMarkers(missing));
        }
        let mut index: HashMap<String, Vec<(Vec<String>, String)>> = HashMap::new();
        for entry in &entries {
            let words = words_of(entry);
            if let Some(first) = words.first() {
                index
                    .entry(first.clone())
                    .or_default()
                    .push((words, entry.clone()));
            }
        }
        for seqs in index.values_mut() {
            seqs.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.1.cmp(&b.1)));
        }
        Ok(Self { entries, index })
    }

    /// Parse the line-oriented lexicon format: one marker per line, `#`
    /// comments, lowercased on load.
    pub fn parse(src: &str) -> Result<Self, TextError> {
        Self::from_entries(data_lines(src).map(|(_, l)| l))
    }

    pub fn load(path: &Path) -> Result<Self, TextError> {
        let src = std::fs::read_to_string(path).map_err(|source| TextError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&src)
    }

    pub fn entries(&self) -> &BTreeSet<String> {
        &self.entries
    }

    pub fn contains(&self, marker: &str) -> bool {
        self.entries.contains(marker)
    }
}

impl Default for MarkerLexicon {
    /// The lexicon bundled with the crate.
    fn default() -> Self {
        Self::parse(DEFAULT_MARKERS).expect("bundled marker lexicon is well-formed")
    }
}

/// Temporal markers found in `question`, in order of position. Matching is
/// case-insensitive over whole tokens, and the longest entry wins at each
/// position.
pub fn find_markers(question: &str, lexicon: &MarkerLexicon) -> Vec<String> {
    let words = words_of(question);
    let mut found = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let hit = lexicon.index.get(&words[i]).and_then(|seqs| {
            seqs.iter()
                .find(|(seq, _)| words[i..].starts_with(seq))
                .map(|(seq, entry)| (seq.len(), entry.clone()))
        });
        match hit {
            Some((len, entry)) => {
                found.push(entry);
                i += len;
            }
            None => i += 1,
        }
    }
    found
}
