use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::model::{CandidateQuestion, Context, TComQARecord};

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    /// One context per non-blank line.
    PlainLines,
    /// One JSON object per line with "id" and "context" fields.
    JsonLines,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Serialize rows as JSON lines, one per line, in the given order.
pub fn write_jsonl<T: Serialize>(rows: &[T], path: &Path) -> Result<usize, PipelineError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for row in rows {
        let line = serde_json::to_string(row).expect("rows serialize to JSON");
        writeln!(out, "{line}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))?;
    Ok(rows.len())
}

pub fn write_records(records: &[TComQARecord], path: &Path) -> Result<usize, PipelineError> {
    write_jsonl(records, path)
}

/// Read JSON lines, skipping blank lines. Errors name the 1-based line.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = serde_json::from_str(&line).map_err(|e| PipelineError::Format {
            path: path.to_path_buf(),
            line: idx + 1,
            reason: e.to_string(),
        })?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_records(path: &Path) -> Result<Vec<TComQARecord>, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut records = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let format_err = |reason: String| PipelineError::Format {
            path: path.to_path_buf(),
            line: idx + 1,
            reason,
        };
        let record: TComQARecord =
            serde_json::from_str(&line).map_err(|e| format_err(e.to_string()))?;
        record.check().map_err(|e| format_err(e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}

/// Sidecar path for rejected questions: `out.jsonl` -> `out.rejected.jsonl`.
pub fn rejects_path(output: &Path) -> PathBuf {
    let stem = match output.extension().and_then(|e| e.to_str()) {
        Some("jsonl") => output.with_extension(""),
        _ => output.to_path_buf(),
    };
    let mut name = stem
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".rejected.jsonl");
    stem.with_file_name(name)
}

pub fn write_rejects(rejects: &[CandidateQuestion], path: &Path) -> Result<usize, PipelineError> {
    write_jsonl(rejects, path)
}

/// Load contexts from a corpus file. Plain-line contexts get sequential ids
/// `L000001`, `L000002`, ... counting only non-blank lines.
pub fn ingest_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<Context>, PipelineError> {
    let file = File::open(path).map_err(io_err(path))?;
    let source = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut contexts = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let ctx = match format {
            CorpusFormat::PlainLines => {
                let id = format!("L{:06}", contexts.len() + 1);
                Context::new(id, line.trim(), source.clone())?
            }
            CorpusFormat::JsonLines => {
                let value: Value =
                    serde_json::from_str(&line).map_err(|e| PipelineError::Format {
                        path: path.to_path_buf(),
                        line: lineno,
                        reason: e.to_string(),
                    })?;
                let get = |name: &'static str| -> Result<String, PipelineError> {
                    match value.get(name) {
                        Some(Value::String(s)) => Ok(s.clone()),
                        Some(Value::Number(n)) if name == "id" => Ok(n.to_string()),
                        _ => Err(PipelineError::MissingField {
                            line: lineno,
                            field: name,
                        }),
                    }
                };
                let (id, text) = (get("id")?, get("context")?);
                Context::new(id, text, source.clone()).map_err(|e| PipelineError::Format {
                    path: path.to_path_buf(),
                    line: lineno,
                    reason: e.to_string(),
                })?
            }
        };
        contexts.push(ctx);
    }
    Ok(contexts)
}
