use serde::{Deserialize, Serialize};
use thiserror::Error;

use worldforge_core::docs::{ENGINE_DOC, GRAMMAR};
use worldforge_core::dsl::{check, Diagnostic};
use worldforge_core::spec::TaskSpecification;
use worldforge_core::stats::count_tokens;

pub const DEFAULT_INSTRUCTION: &str = "Write a complete game in the WorldForge language for the task specification above. \
Include every task-critical object, action and distractor it lists, and make sure the game can be won. \
Answer with the whole program in a single fenced code block.";

/// Section headers, in the order they appear.
pub const SECTIONS: [&str; 4] =
    ["## Engine and language reference", "## Example game", "## Task specification", "## Instructions"];

pub const PREVIOUS_HEADER: &str = "## Your previous program";
pub const ERROR_HEADER: &str = "## Error to fix";
/// Prefix of the single error line in a reflection prompt.
pub const ERROR_MARKER: &str = "ERROR: ";

#[derive(Debug, Error)]
#[error("example game '{name}' does not check: {}", first(.diagnostics))]
pub struct PromptError {
    pub name: String,
    pub diagnostics: Vec<Diagnostic>,
}

fn first(d: &[Diagnostic]) -> String {
    d.first().map(|d| d.to_string()).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PromptBundle {
    pub engine_doc: String,
    pub example_name: String,
    pub example_source: String,
    pub target_spec: TaskSpecification,
    pub instruction: String,
}

impl PromptBundle {
    /// Bundle with the shipped engine reference and grammar and the default
    /// instruction. The example must parse and validate.
    pub fn new(
        example_name: impl Into<String>,
        example_source: impl Into<String>,
        target_spec: TaskSpecification,
    ) -> Result<Self, PromptError> {
        let example_name = example_name.into();
        let example_source = example_source.into();
        if let Err(diagnostics) = check(&example_source) {
            return Err(PromptError { name: example_name, diagnostics });
        }
        Ok(Self {
            engine_doc: format!("{ENGINE_DOC}\n### Grammar (EBNF)\n\n```\n{GRAMMAR}```\n"),
            example_name,
            example_source,
            target_spec,
            instruction: DEFAULT_INSTRUCTION.to_string(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Prompt {
    pub text: String,
    pub token_estimate: usize,
}

impl Prompt {
    fn new(text: String) -> Self {
        let token_estimate = count_tokens(&text);
        Self { text, token_estimate }
    }
}

fn fenced(body: &str) -> String {
    let body = body.trim_end_matches('\n');
    format!("```\n{body}\n```\n")
}

fn base_sections(bundle: &PromptBundle, instruction: &str) -> String {
    let mut out = String::new();
    out.push_str(SECTIONS[0]);
    out.push_str("\n\n");
    out.push_str(bundle.engine_doc.trim_end());
    out.push_str("\n\n");
    out.push_str(&format!("{} ({})\n\n", SECTIONS[1], bundle.example_name));
    out.push_str(&fenced(&bundle.example_source));
    out.push('\n');
    out.push_str(SECTIONS[2]);
    out.push_str("\n\n");
    out.push_str(&fenced(&bundle.target_spec.to_json()));
    out.push('\n');
    out.push_str(SECTIONS[3]);
    out.push_str("\n\n");
    out.push_str(instruction.trim_end());
    out.push('\n');
    out
}

/// The first-round prompt: engine reference, example, spec, instruction.
pub fn assemble_prompt(bundle: &PromptBundle) -> Prompt {
    Prompt::new(base_sections(bundle, &bundle.instruction))
}

/// The original prompt followed by the previous program and one error.
pub fn reflection_prompt(bundle: &PromptBundle, previous_source: &str, error: &str) -> Prompt {
    let mut text = base_sections(bundle, &bundle.instruction);
    text.push('\n');
    text.push_str(PREVIOUS_HEADER);
    text.push_str("\n\n");
    text.push_str(&fenced(previous_source));
    text.push('\n');
    text.push_str(ERROR_HEADER);
    text.push_str("\n\n");
    text.push_str(ERROR_MARKER);
    text.push_str(error.trim_end());
    text.push_str(
        "\n\nFix this error and answer with the complete corrected program in a single fenced code block, not a diff.\n",
    );
    Prompt::new(text)
}

/// Contents of the first fenced code block, or the whole trimmed response.
pub fn extract_source(response: &str) -> String {
    let mut lines = response.lines();
    while let Some(line) = lines.next() {
        if line.trim_start().starts_with("```") {
            let mut body = Vec::new();
            for inner in lines.by_ref() {
                if inner.trim_start().starts_with("```") {
                    break;
                }
                body.push(inner);
            }
            let mut s = body.join("\n");
            s.push('\n');
            return s;
        }
    }
    response.trim().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_block_wins() {
        let r = "Here you go:\n```wg\ngame \"a\" {}\n```\nand\n```\nsecond\n```";
        assert_eq!(extract_source(r), "game \"a\" {}\n");
    }

    #[test]
    fn prose_is_trimmed() {
        assert_eq!(extract_source("  game \"a\" {}\n\n"), "game \"a\" {}");
    }

    #[test]
    fn unterminated_fence_takes_the_rest() {
        assert_eq!(extract_source("```\nx\ny"), "x\ny\n");
    }
}
