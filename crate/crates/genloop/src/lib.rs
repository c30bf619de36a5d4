//! Generating games with a chat model: prompt assembly, an HTTP
//! chat-completions client, the validate-and-reflect loop, and a model-backed
//! alignment judge.

pub mod client;
pub mod config;
pub mod judge;
pub mod prompt;
pub mod reflect;

pub use client::{ChatModel, HttpChatModel, LlmClientError, LlmErrorKind, ScriptedModel};
pub use config::{ClientConfig, ConfigError};
pub use judge::LlmJudge;
pub use prompt::{assemble_prompt, extract_source, reflection_prompt, Prompt, PromptBundle, PromptError};
pub use reflect::{reflect_loop, reflect_many, GenerationRecord, LoopOutcome, RunStore};
