//! The `.wg` game-definition language: lexer, parser, printer, semantic
//! validation, and the expression/effect interpreter used by the engine.

pub mod ast;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::GameDef;
pub use parser::{parse, parse_pattern};
pub use printer::print;
pub use validate::validate;

/// A located problem in a game source. `snippet` is the offending source line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: u32,
    pub column: u32,
    pub message: String,
    pub snippet: String,
}

impl Diagnostic {
    pub fn at(src: &str, span: ast::Span, message: impl Into<String>) -> Self {
        let line = span.line.max(1);
        Self {
            line,
            column: span.column.max(1),
            message: message.into(),
            snippet: src.lines().nth(line as usize - 1).unwrap_or("").trim_end().to_string(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)?;
        if !self.snippet.is_empty() {
            write!(f, "\n    {}", self.snippet)?;
        }
        Ok(())
    }
}

/// Parses and validates `source`, attaching source snippets to every diagnostic.
pub fn check(source: &str) -> Result<GameDef, Vec<Diagnostic>> {
    let def = parse(source)?;
    let diags: Vec<Diagnostic> = validate(&def)
        .into_iter()
        .map(|d| Diagnostic::at(source, ast::Span::new(d.line, d.column), d.message))
        .collect();
    if diags.is_empty() {
        Ok(def)
    } else {
        Err(diags)
    }
}
