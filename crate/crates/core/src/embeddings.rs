//! Static word vectors, token-average text embeddings and cosine similarity.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::text::tokenize;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("vector file is empty")]
    EmptyFile,
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Lowercase token -> vector table. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorStore {
    dimension: usize,
    table: HashMap<String, Vec<f64>>,
}

impl VectorStore {
    pub fn new(dimension: usize) -> Self {
        Self {
            dimension,
            table: HashMap::new(),
        }
    }

    /// Insert a vector; the key is lowercased. A later insert of the same key
    /// replaces the earlier one.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<(), EmbeddingError> {
        if vector.len() != self.dimension {
            return Err(EmbeddingError::DimensionMismatch {
                left: self.dimension,
                right: vector.len(),
            });
        }
        self.table.insert(token.to_lowercase(), vector);
        Ok(())
    }

    pub fn from_entries<'a, I>(dimension: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (&'a str, Vec<f64>)>,
    {
        let mut store = Self::new(dimension);
        for (token, vector) in entries {
            store.insert(token, vector)?;
        }
        Ok(store)
    }

    /// Parse the plain-text "token v1 ... vd" format. An optional leading
    /// "N d" header line is skipped.
    pub fn parse(src: &str) -> Result<Self, EmbeddingError> {
        let mut store: Option<VectorStore> = None;
        for (idx, line) in src.lines().enumerate() {
            let lineno = idx + 1;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if store.is_none() && rest.len() == 1 && is_header(token, rest[0]) {
                continue;
            }
            let vector = rest
                .iter()
                .map(|f| match f.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(EmbeddingError::Format {
                        line: lineno,
                        reason: format!("non-numeric or non-finite component {f:?}"),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if vector.is_empty() {
                return Err(EmbeddingError::Format {
                    line: lineno,
                    reason: "row has no components".into(),
                });
            }
            let store = store.get_or_insert_with(|| VectorStore::new(vector.len()));
            if vector.len() != store.dimension {
                return Err(EmbeddingError::Format {
                    line: lineno,
                    reason: format!(
                        "expected {} components, found {}",
                        store.dimension,
                        vector.len()
                    ),
                });
            }
            store.table.insert(token.to_lowercase(), vector);
        }
        store.ok_or(EmbeddingError::EmptyFile)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.table.get(&token.to_lowercase()).map(Vec::as_slice)
    }
}

fn is_header(a: &str, b: &str) -> bool {
    a.parse::<u64>().is_ok() && b.parse::<u64>().is_ok()
}

pub fn load_vectors(path: &Path) -> Result<VectorStore, EmbeddingError> {
    let src = std::fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    VectorStore::parse(&src)
}

/// Mean of the vectors of in-vocabulary alphabetic tokens, or the zero
/// vector when none are known.
///
/// Tokens are summed in sorted order with their multiplicities, so the result
/// is bit-identical under any reordering of the input words.
pub fn embed_text(text: &str, store: &VectorStore) -> Vec<f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for token in tokenize(text).unwrap_or_default() {
        if token.is_alphabetic() {
            *counts.entry(token.surface.to_lowercase()).or_default() += 1;
        }
    }
    let mut sum = vec![0.0; store.dimension];
    let mut n = 0usize;
    for (token, count) in &counts {
        if let Some(v) = store.table.get(token) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += *count as f64 * x;
            }
            n += count;
        }
    }
    if n > 0 {
        for s in &mut sum {
            *s /= n as f64;
        }
    }
    sum
}

/// Cosine similarity clamped to [-1, 1]; 0 when either vector has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu: f64 = u.iter().map(|a| a * a).sum();
    let nv: f64 = v.iter().map(|b| b * b).sum();
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    // sqrt(nu * nv) rather than sqrt(nu) * sqrt(nv): identical vectors then
    // give exactly 1.
    Ok((dot / (nu * nv).sqrt()).clamp(-1.0, 1.0))
}
