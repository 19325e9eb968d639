//! Toy corpus generator and a brute-force validator oracle.
//!
//! The oracle has its own word table (tag and lemma per word), regex
//! tokenizer, regex chunker and plain float math. It shares no code with
//! the library beyond the types needed to call it.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::Regex;

use tcomqa_core::{Context, MarkerLexicon, VectorStore};

/// Tag letters: D determiner, A adjective, N noun, V verb, X auxiliary,
/// O other.
pub const VOCAB: &[(&str, char, &str)] = &[
    ("the", 'D', "the"),
    ("a", 'D', "a"),
    ("this", 'D', "this"),
    ("every", 'D', "every"),
    ("each", 'D', "each"),
    ("tall", 'A', "tall"),
    ("happy", 'A', "happy"),
    ("busy", 'A', "busy"),
    ("small", 'A', "small"),
    ("old", 'A', "old"),
    ("late", 'A', "late"),
    ("dog", 'N', "dog"),
    ("cat", 'N', "cat"),
    ("home", 'N', "home"),
    ("year", 'N', "year"),
    ("week", 'N', "week"),
    ("day", 'N', "day"),
    ("coffee", 'N', "coffee"),
    ("tea", 'N', "tea"),
    ("night", 'N', "night"),
    ("mailman", 'N', "mailman"),
    ("bartender", 'N', "bartender"),
    ("garden", 'N', "garden"),
    ("train", 'N', "train"),
    ("book", 'N', "book"),
    ("know", 'V', "know"),
    ("let", 'V', "let"),
    ("go", 'V', "go"),
    ("went", 'V', "go"),
    ("run", 'V', "run"),
    ("ran", 'V', "run"),
    ("eat", 'V', "eat"),
    ("ate", 'V', "eat"),
    ("bark", 'V', "bark"),
    ("check", 'V', "check"),
    ("arrive", 'V', "arrive"),
    ("sleep", 'V', "sleep"),
    ("slept", 'V', "sleep"),
    ("wait", 'V', "wait"),
    ("help", 'V', "help"),
    ("finish", 'V', "finish"),
    ("left", 'V', "leave"),
    ("will", 'X', "will"),
    ("can", 'X', "can"),
    ("did", 'X', "do"),
    ("does", 'X', "do"),
    ("might", 'X', "might"),
    ("soon", 'O', "soon"),
    ("often", 'O', "often"),
    ("still", 'O', "still"),
    ("when", 'O', "when"),
    ("how", 'O', "how"),
    ("after", 'O', "after"),
    ("before", 'O', "before"),
    ("during", 'O', "during"),
    ("and", 'O', "and"),
    ("then", 'O', "then"),
    ("usually", 'O', "usually"),
    ("what", 'O', "what"),
    ("which", 'O', "which"),
    ("afterward", 'O', "afterward"),
];

/// The toy marker lexicon: the six core markers and a few extensions.
pub const TOY_MARKERS: &[&str] = &[
    "how often",
    "how long",
    "what time",
    "which year",
    "before",
    "afterward",
    "after",
    "when",
    "during",
    "still",
];

pub fn toy_lexicon() -> MarkerLexicon {
    MarkerLexicon::from_entries(TOY_MARKERS.iter().copied()).expect("toy lexicon is valid")
}

fn tag_of(word: &str) -> char {
    match word {
        // only used inside markers
        "long" => 'A',
        "time" => 'N',
        _ => VOCAB
            .iter()
            .find(|(w, ..)| *w == word)
            .map(|(_, t, _)| *t)
            .unwrap_or('N'),
    }
}

fn lemma_of(word: &str) -> String {
    VOCAB
        .iter()
        .find(|(w, ..)| *w == word)
        .map(|(_, _, l)| l.to_string())
        .unwrap_or_else(|| word.to_string())
}

/// Random lowercase word sequence with no noun directly after an auxiliary
/// (the tagger would read such a noun as a verb).
fn words(rng: &mut ChaCha8Rng, len: usize) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(len);
    while out.len() < len {
        let (w, t, _) = *VOCAB.choose(rng).unwrap();
        let after_aux = out.last().is_some_and(|p| tag_of(p) == 'X');
        if after_aux && t == 'N' {
            continue;
        }
        out.push(w.to_string());
    }
    out
}

fn fix_aux_noun(words: &mut Vec<String>, rng: &mut ChaCha8Rng) {
    let verbs: Vec<&str> = VOCAB.iter().filter(|v| v.1 == 'V').map(|v| v.0).collect();
    let mut i = 1;
    while i < words.len() {
        if tag_of(&words[i - 1]) == 'X' && tag_of(&words[i]) == 'N' {
            words.insert(i, verbs.choose(rng).unwrap().to_string());
        }
        i += 1;
    }
}

/// `n` random (context, question) pairs. About 60% of questions get a
/// marker phrase spliced in; others may still contain one by chance.
pub fn random_pairs(seed: u64, n: usize) -> Vec<(Context, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let clen = rng.random_range(3..=12);
            let ctx = format!("{}.", words(&mut rng, clen).join(" "));
            let qlen = rng.random_range(1..=7);
            let mut q = words(&mut rng, qlen);
            if rng.random_bool(0.6) {
                let marker = TOY_MARKERS.choose(&mut rng).unwrap();
                let at = rng.random_range(0..=q.len());
                for (k, w) in marker.split(' ').enumerate() {
                    q.insert(at + k, w.to_string());
                }
                fix_aux_noun(&mut q, &mut rng);
            }
            let question = format!("{}?", q.join(" "));
            (
                Context::new(format!("t{i:05}"), ctx, "toy").unwrap(),
                question,
            )
        })
        .collect()
}

/// Toy vectors: most vocabulary words get a random direction, a few are
/// left out of vocabulary, and "every"/"each" and "dog"/"cat" share
/// vectors. Returned as the text file format.
pub fn toy_vector_file(seed: u64, dim: usize) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table: Vec<(String, Vec<f64>)> = Vec::new();
    for (w, ..) in VOCAB
        .iter()
        .chain([("long", 'A', "long"), ("time", 'N', "time")].iter())
    {
        if rng.random_bool(0.15) {
            continue;
        }
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        table.push((w.to_string(), v));
    }
    let get =
        |t: &[(String, Vec<f64>)], w: &str| t.iter().find(|(x, _)| x == w).map(|(_, v)| v.clone());
    let every = get(&table, "every").unwrap_or_else(|| vec![0.5; dim]);
    let dog = get(&table, "dog").unwrap_or_else(|| vec![0.25; dim]);
    table.retain(|(w, _)| w != "each" && w != "cat");
    table.push(("each".into(), every));
    table.push(("cat".into(), dog));
    let mut out = format!("{} {dim}\n", table.len());
    for (w, v) in table {
        let nums: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        out.push_str(&format!("{w} {}\n", nums.join(" ")));
    }
    out
}

pub fn toy_store(seed: u64, dim: usize) -> VectorStore {
    VectorStore::parse(&toy_vector_file(seed, dim)).expect("toy vectors parse")
}

/// Independent re-implementation of both validators.
pub struct Oracle {
    markers: Regex,
    word: Regex,
    noun_phrase: Regex,
    verb_phrase: Regex,
    vectors: HashMap<String, Vec<f64>>,
}

impl Oracle {
    pub fn new(markers: &[&str], vector_file: &str) -> Self {
        let alternation = markers
            .iter()
            .map(|m| regex::escape(m))
            .collect::<Vec<_>>()
            .join("|");
        let mut vectors = HashMap::new();
        for line in vector_file.lines().skip(1) {
            let mut parts = line.split_whitespace();
            let w = parts.next().unwrap().to_string();
            vectors.insert(w, parts.map(|x| x.parse().unwrap()).collect());
        }
        Self {
            markers: Regex::new(&format!(r"(^|[^a-z])({alternation})([^a-z]|$)")).unwrap(),
            word: Regex::new(r"[a-z]+|[^\sa-z]").unwrap(),
            noun_phrase: Regex::new("D?A*N+").unwrap(),
            verb_phrase: Regex::new("X*V+").unwrap(),
            vectors,
        }
    }

    pub fn toy(vector_file: &str) -> Self {
        Self::new(TOY_MARKERS, vector_file)
    }

    pub fn has_marker(&self, question: &str) -> bool {
        self.markers.is_match(&question.to_lowercase())
    }

    fn tokens<'a>(&self, text: &'a str) -> Vec<&'a str> {
        self.word.find_iter(text).map(|m| m.as_str()).collect()
    }

    fn tags(tokens: &[&str]) -> String {
        tokens
            .iter()
            .map(|t| {
                if t.chars().all(|c| c.is_ascii_alphabetic()) {
                    tag_of(t)
                } else {
                    'P'
                }
            })
            .collect()
    }

    pub fn content_lemmas(&self, text: &str) -> BTreeSet<String> {
        let toks = self.tokens(text);
        toks.iter()
            .zip(Self::tags(&toks).chars())
            .filter(|(_, t)| matches!(t, 'N' | 'V'))
            .map(|(w, _)| lemma_of(w))
            .collect()
    }

    pub fn lexical(&self, context: &str, question: &str) -> bool {
        self.has_marker(question)
            && !self
                .content_lemmas(context)
                .is_disjoint(&self.content_lemmas(question))
    }

    fn phrases(&self, text: &str) -> Vec<Vec<String>> {
        let toks = self.tokens(text);
        let tags = Self::tags(&toks);
        let mut out = Vec::new();
        for re in [&self.noun_phrase, &self.verb_phrase] {
            for m in re.find_iter(&tags) {
                out.push(
                    toks[m.start()..m.end()]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                );
            }
        }
        out
    }

    fn embed(&self, words: &[String]) -> Option<Vec<f64>> {
        let known: Vec<&Vec<f64>> = words.iter().filter_map(|w| self.vectors.get(w)).collect();
        let first = known.first()?;
        let mut mean = vec![0.0; first.len()];
        for v in &known {
            for (m, x) in mean.iter_mut().zip(v.iter()) {
                *m += x;
            }
        }
        Some(mean.iter().map(|m| m / known.len() as f64).collect())
    }

    fn cos(a: &Option<Vec<f64>>, b: &Option<Vec<f64>>) -> f64 {
        let (Some(a), Some(b)) = (a, b) else {
            return 0.0;
        };
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            0.0
        } else {
            dot / (na * nb)
        }
    }

    /// Best phrase-pair similarity, or -1 when either side has no phrase.
    pub fn best_similarity(&self, context: &str, question: &str) -> f64 {
        let cp: Vec<_> = self
            .phrases(context)
            .iter()
            .map(|p| self.embed(p))
            .collect();
        let qp: Vec<_> = self
            .phrases(question)
            .iter()
            .map(|p| self.embed(p))
            .collect();
        let mut best = -1.0f64;
        for a in &cp {
            for b in &qp {
                best = best.max(Self::cos(a, b));
            }
        }
        best
    }

    pub fn semantic(&self, context: &str, question: &str, theta: f64) -> bool {
        self.has_marker(question) && self.best_similarity(context, question) >= theta
    }
}
