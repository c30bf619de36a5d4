//! Access to the on-disk game corpus and golden solution transcripts.
//!
//! Layout: `<dir>/<name>/game.wg`, `spec.spec.json`, `solution.txt`, and an
//! optional `tags.txt` of whitespace-separated tags.

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dsl::{self, Diagnostic, GameDef};
use crate::engine::{Game, GameState, InstantiationFault, RuntimeFault};
use crate::spec::{load_spec, SpecError, TaskSpecification};

pub const GAME_FILE: &str = "game.wg";
pub const SPEC_FILE: &str = "spec.spec.json";
pub const SOLUTION_FILE: &str = "solution.txt";
pub const TAGS_FILE: &str = "tags.txt";
/// Tag marking fixtures that are expected to fail some harness check.
pub const NEGATIVE_TAG: &str = "negative";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no corpus entry named '{0}'")]
    NotFound(String),
    #[error("corpus entry '{name}' is missing {file}")]
    MissingFile { name: String, file: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("game '{name}' does not compile:\n{}", .diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid { name: String, diagnostics: Vec<Diagnostic> },
    #[error("spec of '{name}': {source}")]
    Spec { name: String, source: SpecError },
    #[error("transcript of '{name}': {message}")]
    Transcript { name: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub game_file: PathBuf,
    pub spec_file: PathBuf,
    pub transcript_file: PathBuf,
    pub tags: Vec<String>,
}

impl CorpusEntry {
    pub fn is_negative(&self) -> bool {
        self.tags.iter().any(|t| t == NEGATIVE_TAG)
    }
}

/// Expected end state from the final `EXPECT` line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Expectation {
    pub won: bool,
    pub score: i64,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EXPECT {} score={}", if self.won { "won" } else { "not-won" }, self.score)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub commands: Vec<String>,
    pub expect: Expectation,
}

/// A corpus entry with every file loaded and checked.
#[derive(Clone, Debug)]
pub struct LoadedEntry {
    pub entry: CorpusEntry,
    pub source: String,
    pub def: GameDef,
    pub spec: TaskSpecification,
    pub transcript: Transcript,
}

/// Parses a transcript: one command per line, blank lines and `#` comments
/// ignored, last meaningful line `EXPECT won|not-won score=<n>`.
pub fn parse_transcript(text: &str) -> Result<Transcript, String> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).collect();
    let Some((last, commands)) = lines.split_last() else {
        return Err("transcript is empty".into());
    };
    let rest = last.strip_prefix("EXPECT ").ok_or("final line must be an EXPECT line")?;
    let mut words = rest.split_whitespace();
    let won = match words.next() {
        Some("won") => true,
        Some("not-won") => false,
        other => return Err(format!("expected 'won' or 'not-won', found {other:?}")),
    };
    let score = words
        .next()
        .and_then(|w| w.strip_prefix("score="))
        .and_then(|n| n.parse().ok())
        .ok_or("EXPECT line needs score=<integer>")?;
    if words.next().is_some() {
        return Err("trailing text after EXPECT score".into());
    }
    if let Some(bad) = commands.iter().find(|c| c.starts_with("EXPECT")) {
        return Err(format!("EXPECT must be the last line, found \"{bad}\" earlier"));
    }
    Ok(Transcript { commands: commands.iter().map(|c| c.to_string()).collect(), expect: Expectation { won, score } })
}

fn read(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.display().to_string(), source })
}

fn entry_at(dir: &Path, name: &str) -> Result<CorpusEntry, CorpusError> {
    let root = dir.join(name);
    if !root.is_dir() {
        return Err(CorpusError::NotFound(name.to_string()));
    }
    let need = |file: &str| {
        let p = root.join(file);
        if p.is_file() {
            Ok(p)
        } else {
            Err(CorpusError::MissingFile { name: name.to_string(), file: file.to_string() })
        }
    };
    let game_file = need(GAME_FILE)?;
    let spec_file = need(SPEC_FILE)?;
    let transcript_file = need(SOLUTION_FILE)?;
    let tags_path = root.join(TAGS_FILE);
    let tags = if tags_path.is_file() {
        read(&tags_path)?.split_whitespace().map(str::to_string).collect()
    } else {
        Vec::new()
    };
    Ok(CorpusEntry { name: name.to_string(), game_file, spec_file, transcript_file, tags })
}

/// Every subdirectory of `dir` that holds a game file, sorted by name.
pub fn list_corpus(dir: impl AsRef<Path>) -> Result<Vec<CorpusEntry>, CorpusError> {
    let dir = dir.as_ref();
    let rd = std::fs::read_dir(dir).map_err(|source| CorpusError::Io { path: dir.display().to_string(), source })?;
    let mut names = Vec::new();
    for item in rd {
        let item = item.map_err(|source| CorpusError::Io { path: dir.display().to_string(), source })?;
        if item.path().join(GAME_FILE).is_file() {
            names.push(item.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    names.iter().map(|n| entry_at(dir, n)).collect()
}

pub fn load_entry(dir: impl AsRef<Path>, name: &str) -> Result<LoadedEntry, CorpusError> {
    let entry = entry_at(dir.as_ref(), name)?;
    load(entry)
}

pub fn load(entry: CorpusEntry) -> Result<LoadedEntry, CorpusError> {
    let name = entry.name.clone();
    let source = read(&entry.game_file)?;
    let def = dsl::check(&source).map_err(|diagnostics| CorpusError::Invalid { name: name.clone(), diagnostics })?;
    let spec = load_spec(&entry.spec_file).map_err(|source| CorpusError::Spec { name: name.clone(), source })?;
    let transcript = parse_transcript(&read(&entry.transcript_file)?)
        .map_err(|message| CorpusError::Transcript { name: name.clone(), message })?;
    Ok(LoadedEntry { entry, source, def, spec, transcript })
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Init(#[from] InstantiationFault),
    #[error(transparent)]
    Runtime(#[from] RuntimeFault),
}

/// Outcome of replaying a transcript.
#[derive(Clone, Debug)]
pub struct Replay {
    pub observations: Vec<String>,
    /// Commands that were not among the grounded actions at their step.
    pub ungrounded: Vec<(usize, String)>,
    pub final_state: GameState,
    pub expect: Expectation,
}

impl Replay {
    pub fn satisfied(&self) -> bool {
        self.ungrounded.is_empty()
            && self.final_state.game_won == self.expect.won
            && self.final_state.score == self.expect.score
    }
}

pub fn replay(game: &Game, transcript: &Transcript, seed: u64) -> Result<Replay, ReplayError> {
    let mut state = game.instantiate(seed)?;
    let mut observations = Vec::new();
    let mut ungrounded = Vec::new();
    for (i, cmd) in transcript.commands.iter().enumerate() {
        let grounded = game.enumerate_valid_actions(&state)?;
        if !grounded.contains(&crate::engine::normalize_command(cmd)) {
            ungrounded.push((i, cmd.clone()));
        }
        let (obs, next) = game.step(&state, cmd)?;
        observations.push(obs);
        state = next;
    }
    Ok(Replay { observations, ungrounded, final_state: state, expect: transcript.expect })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcript_parsing() {
        let t = parse_transcript("open box\n\n# note\ntake key\nEXPECT won score=3\n").unwrap();
        assert_eq!(t.commands, ["open box", "take key"]);
        assert_eq!(t.expect, Expectation { won: true, score: 3 });
        let t = parse_transcript("wait\nEXPECT not-won score=0").unwrap();
        assert!(!t.expect.won);
        assert!(parse_transcript("wait\n").is_err());
        assert!(parse_transcript("EXPECT won score=x").is_err());
        assert!(parse_transcript("EXPECT won score=1\nwait\nEXPECT won score=1").is_err());
    }
}
