//! Reference documents shipped with the crate, embedded for prompt assembly.

pub const GRAMMAR: &str = include_str!("../../../docs/grammar.ebnf");
pub const ENGINE_DOC: &str = include_str!("../../../docs/engine.md");
pub const SPEC_SCHEMA: &str = include_str!("../../../docs/spec-schema.json");
