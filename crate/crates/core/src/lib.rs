//! World engine, game-definition language, task specifications, corpus
//! access, evaluation harness, and corpus statistics.

pub mod corpus;
pub mod dsl;
pub mod engine;
pub mod harness;
pub mod spec;
pub mod docs;
pub mod stats;
