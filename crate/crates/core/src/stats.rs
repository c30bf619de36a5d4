//! Per-game size statistics and the context-window packing calculator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LoadedEntry;
use crate::engine::{Game, InstantiationFault, RuntimeFault};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("per-game tokens must be positive")]
    NonPositivePerGame,
    #[error("prelude of {prelude} tokens exceeds the {context}-token context")]
    PreludeTooLarge { context: u64, prelude: u64 },
    #[error(transparent)]
    Instantiate(#[from] InstantiationFault),
    #[error(transparent)]
    Runtime(#[from] RuntimeFault),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LineCounts {
    pub code: usize,
    pub comment: usize,
    pub blank: usize,
    pub total: usize,
}

/// Classifies each line as blank, a `#` comment, or code.
pub fn line_counts(text: &str) -> LineCounts {
    let mut c = LineCounts::default();
    for line in text.lines() {
        let t = line.trim();
        c.total += 1;
        if t.is_empty() {
            c.blank += 1;
        } else if t.starts_with('#') {
            c.comment += 1;
        } else {
            c.code += 1;
        }
    }
    c
}

/// Approximate token count: each run of letters, digits, and underscores is
/// one token, and so is every other non-whitespace character.
pub fn count_tokens(text: &str) -> usize {
    let mut count = 0;
    let mut in_word = false;
    for ch in text.chars() {
        if ch.is_alphanumeric() || ch == '_' {
            if !in_word {
                count += 1;
                in_word = true;
            }
        } else {
            in_word = false;
            if !ch.is_whitespace() {
                count += 1;
            }
        }
    }
    count
}

/// How many examples of `per_game` tokens fit after a prelude.
pub fn context_fit(context: u64, prelude: u64, per_game: u64) -> Result<u64, StatsError> {
    if per_game == 0 {
        return Err(StatsError::NonPositivePerGame);
    }
    if prelude > context {
        return Err(StatsError::PreludeTooLarge { context, prelude });
    }
    Ok((context - prelude) / per_game)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameStats {
    pub name: String,
    pub lines_of_code: usize,
    pub comment_lines: usize,
    pub total_lines: usize,
    pub tokens: usize,
    /// Distinct verbs: the ten built-ins plus any the game adds.
    pub action_verbs: usize,
    /// Grounded actions at the initial state.
    pub valid_actions: usize,
    pub object_classes: usize,
    /// Objects at the initial state, excluding the room and the agent.
    pub object_instances: usize,
    pub expert_path_length: usize,
}

pub fn compute_stats(entry: &LoadedEntry) -> Result<GameStats, StatsError> {
    let lines = line_counts(&entry.source);
    let game = Game::new(entry.def.clone());
    let state = game.instantiate(0)?;
    let mut verbs: Vec<&str> = game.registry().iter().map(|a| a.verb.as_str()).collect();
    verbs.sort_unstable();
    verbs.dedup();
    Ok(GameStats {
        name: entry.entry.name.clone(),
        lines_of_code: lines.code,
        comment_lines: lines.comment,
        total_lines: lines.total,
        tokens: count_tokens(&entry.source),
        action_verbs: verbs.len(),
        valid_actions: game.enumerate_valid_actions(&state)?.len(),
        object_classes: entry.def.classes.len(),
        object_instances: state.objects.len() - 2,
        expert_path_length: entry.transcript.commands.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusStats {
    pub games: Vec<GameStats>,
    pub mean: MeanStats,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MeanStats {
    pub lines_of_code: f64,
    pub comment_lines: f64,
    pub tokens: f64,
    pub action_verbs: f64,
    pub valid_actions: f64,
    pub object_classes: f64,
    pub object_instances: f64,
    pub expert_path_length: f64,
}

pub fn summarize(games: Vec<GameStats>) -> CorpusStats {
    let n = games.len().max(1) as f64;
    let avg = |f: fn(&GameStats) -> usize| games.iter().map(f).sum::<usize>() as f64 / n;
    let mean = MeanStats {
        lines_of_code: avg(|g| g.lines_of_code),
        comment_lines: avg(|g| g.comment_lines),
        tokens: avg(|g| g.tokens),
        action_verbs: avg(|g| g.action_verbs),
        valid_actions: avg(|g| g.valid_actions),
        object_classes: avg(|g| g.object_classes),
        object_instances: avg(|g| g.object_instances),
        expert_path_length: avg(|g| g.expert_path_length),
    };
    CorpusStats { games, mean }
}

/// Aligned plain-text table with one row per game and a mean row.
pub fn render_table(stats: &CorpusStats) -> String {
    let header = ["game", "loc", "comments", "tokens", "verbs", "valid", "classes", "objects", "path"];
    let mut rows: Vec<Vec<String>> = stats
        .games
        .iter()
        .map(|g| {
            vec![
                g.name.clone(),
                g.lines_of_code.to_string(),
                g.comment_lines.to_string(),
                g.tokens.to_string(),
                g.action_verbs.to_string(),
                g.valid_actions.to_string(),
                g.object_classes.to_string(),
                g.object_instances.to_string(),
                g.expert_path_length.to_string(),
            ]
        })
        .collect();
    let m = &stats.mean;
    rows.push(
        [
            "mean".to_string(),
            format!("{:.2}", m.lines_of_code),
            format!("{:.2}", m.comment_lines),
            format!("{:.2}", m.tokens),
            format!("{:.2}", m.action_verbs),
            format!("{:.2}", m.valid_actions),
            format!("{:.2}", m.object_classes),
            format!("{:.2}", m.object_instances),
            format!("{:.2}", m.expert_path_length),
        ]
        .to_vec(),
    );
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .enumerate()
            .map(|(c, s)| if c == 0 { format!("{s:<w$}", w = widths[c]) } else { format!("{s:>w$}", w = widths[c]) })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    for r in &rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out.push_str("valid = grounded actions at the initial state\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_counting() {
        let text = "a\n# c1\n\nb\n  # c2\nc\n\n# c3\nd\ne\n";
        let c = line_counts(text);
        assert_eq!((c.code, c.comment, c.blank, c.total), (5, 3, 2, 10));
    }

    #[test]
    fn tokens() {
        assert_eq!(count_tokens(""), 0);
        assert_eq!(count_tokens("set w.temperature = w.temperature + 25"), 10);
        assert_eq!(count_tokens("dish_soap"), 1);
    }

    #[test]
    fn context_fit_domain() {
        assert_eq!(context_fit(100, 0, 0), Err(StatsError::NonPositivePerGame));
        assert!(matches!(context_fit(10, 11, 1), Err(StatsError::PreludeTooLarge { .. })));
        assert_eq!(context_fit(10, 10, 3), Ok(0));
    }
}
