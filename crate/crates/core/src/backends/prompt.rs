use crate::model::TemporalProperty;

use super::BackendError;

pub const END_OF_SEQUENCE: &str = "</s>";

const PROMPT_OPEN: &str = "<s> [INST] ";
const PROMPT_CLOSE: &str = " [/INST]";

/// Instruction prompt for the decoder answer model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QAPrompt {
    pub context_text: String,
    pub question: String,
    pub property: TemporalProperty,
    pub rendered: String,
}

/// `<s> [INST] {context} {question} {property} [/INST]`, fields verbatim.
pub fn render_qa_prompt(
    context_text: &str,
    question: &str,
    property: TemporalProperty,
) -> Result<QAPrompt, BackendError> {
    if context_text.is_empty() {
        return Err(BackendError::EmptyPromptField("context"));
    }
    if question.is_empty() {
        return Err(BackendError::EmptyPromptField("question"));
    }
    let rendered = format!(
        "{PROMPT_OPEN}{context_text} {question} {}{PROMPT_CLOSE}",
        property.canonical_form()
    );
    Ok(QAPrompt {
        context_text: context_text.to_string(),
        question: question.to_string(),
        property,
        rendered,
    })
}

/// Inverse of [`render_qa_prompt`] for fields that contain no space. The
/// template separates context and question by a single space, so the split
/// is only unambiguous when the context itself has none.
pub fn parse_qa_prompt(rendered: &str) -> Option<(String, String, TemporalProperty)> {
    let body = rendered
        .strip_prefix(PROMPT_OPEN)?
        .strip_suffix(PROMPT_CLOSE)?;
    let (rest, property) = TemporalProperty::ALL.into_iter().find_map(|p| {
        body.strip_suffix(p.canonical_form())
            .and_then(|r| r.strip_suffix(' '))
            .map(|r| (r, p))
    })?;
    let (context, question) = rest.split_once(' ')?;
    Some((context.to_string(), question.to_string(), property))
}

/// Cut a raw completion at the first end-of-sequence marker and trim it.
pub fn truncate_answer(raw: &str) -> Result<String, BackendError> {
    let cut = raw.find(END_OF_SEQUENCE).map_or(raw, |i| &raw[..i]);
    let answer = cut.trim();
    if answer.is_empty() {
        return Err(BackendError::EmptyGeneration);
    }
    Ok(answer.to_string())
}
