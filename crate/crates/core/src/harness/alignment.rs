//! Physical-reality alignment: a judge rates sampled state transitions.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Game, GameState, InstantiationFault};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlignmentOptions {
    pub trajectories: usize,
    pub depth: usize,
    pub seed: u64,
}

impl Default for AlignmentOptions {
    fn default() -> Self {
        Self { trajectories: 100, depth: 3, seed: 42 }
    }
}

/// One observed transition. The states are available to programmatic judges;
/// text judges see only the descriptions, action, and observation.
#[derive(Clone, Copy, Debug)]
pub struct Transition<'a> {
    pub before: &'a str,
    pub action: &'a str,
    pub observation: &'a str,
    pub after: &'a str,
    pub before_state: &'a GameState,
    pub after_state: &'a GameState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Judgement {
    pub aligned: bool,
    pub justification: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("judge error: {0}")]
pub struct JudgeError(pub String);

/// Decides whether a transition is consistent with everyday physics.
/// Implementations may be called from several threads at once.
pub trait Judge: Send + Sync {
    fn judge(&self, transition: &Transition<'_>) -> Result<Judgement, JudgeError>;
}

/// Fixed-verdict judges for offline runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MockJudge {
    Aligned,
    Misaligned,
}

impl Judge for MockJudge {
    fn judge(&self, _: &Transition<'_>) -> Result<Judgement, JudgeError> {
        Ok(match self {
            MockJudge::Aligned => Judgement { aligned: true, justification: "mock judge: always aligned".into() },
            MockJudge::Misaligned => Judgement { aligned: false, justification: "mock judge: always misaligned".into() },
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AlignmentReport {
    pub unique_transitions: usize,
    pub judged_transitions: usize,
    pub aligned_count: usize,
    pub score: f64,
    pub histogram_bin: usize,
    pub justifications: Vec<String>,
    pub judge_errors: Vec<String>,
}

/// Histogram bin in 0..=9 for a score in [0, 1]; 1.0 falls in the last bin.
pub fn histogram_bin(score: f64) -> usize {
    ((score * 10.0).floor().max(0.0) as usize).min(9)
}

/// Collected `(before, action, after)` transition, deduplicated on the text.
pub struct Sampled {
    pub before: String,
    pub action: String,
    pub observation: String,
    pub after: String,
    pub before_state: GameState,
    pub after_state: GameState,
}

/// Unique transitions seen along seeded uniform random trajectories. A
/// trajectory stops early at game over or on a fault.
pub fn sample_transitions(game: &Game, opts: &AlignmentOptions) -> Result<Vec<Sampled>, InstantiationFault> {
    let initial = game.instantiate(opts.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for _ in 0..opts.trajectories {
        let mut state = initial.clone();
        for _ in 0..opts.depth {
            if state.game_over {
                break;
            }
            let Ok(actions) = game.valid_actions(&state) else { break };
            if actions.is_empty() {
                break;
            }
            let action = &actions[rng.gen_range(0..actions.len())];
            let Ok(before) = game.describe(&state) else { break };
            let Ok((observation, next)) = game.execute(&state, action) else { break };
            let Ok(after) = game.describe(&next) else { break };
            if seen.insert((before.clone(), action.text.clone(), after.clone())) {
                out.push(Sampled {
                    before,
                    action: action.text.clone(),
                    observation,
                    after,
                    before_state: state.clone(),
                    after_state: next.clone(),
                });
            }
            state = next;
        }
    }
    Ok(out)
}

/// Judges every transition once. Judge errors are listed but excluded from
/// the score; with nothing judged the score is 0.
pub fn judge_transitions(transitions: &[Sampled], judge: &dyn Judge) -> AlignmentReport {
    let mut aligned_count = 0;
    let mut judged = 0;
    let mut justifications = Vec::new();
    let mut judge_errors = Vec::new();
    for t in transitions {
        let view = Transition {
            before: &t.before,
            action: &t.action,
            observation: &t.observation,
            after: &t.after,
            before_state: &t.before_state,
            after_state: &t.after_state,
        };
        match judge.judge(&view) {
            Ok(j) => {
                judged += 1;
                if j.aligned {
                    aligned_count += 1;
                }
                let tag = if j.aligned { "aligned" } else { "misaligned" };
                justifications.push(format!("{}: {tag}: {}", t.action, j.justification));
            }
            Err(e) => judge_errors.push(format!("{}: {}", t.action, e)),
        }
    }
    let score = if judged == 0 { 0.0 } else { aligned_count as f64 / judged as f64 };
    AlignmentReport {
        unique_transitions: transitions.len(),
        judged_transitions: judged,
        aligned_count,
        score,
        histogram_bin: histogram_bin(score),
        justifications,
        judge_errors,
    }
}

pub fn sample_alignment(game: &Game, judge: &dyn Judge, opts: &AlignmentOptions) -> Result<AlignmentReport, InstantiationFault> {
    Ok(judge_transitions(&sample_transitions(game, opts)?, judge))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins() {
        assert_eq!(histogram_bin(0.0), 0);
        assert_eq!(histogram_bin(0.09), 0);
        assert_eq!(histogram_bin(0.1), 1);
        assert_eq!(histogram_bin(0.75), 7);
        assert_eq!(histogram_bin(1.0), 9);
    }

    struct Failing;
    impl Judge for Failing {
        fn judge(&self, _: &Transition<'_>) -> Result<Judgement, JudgeError> {
            Err(JudgeError("offline".into()))
        }
    }

    #[test]
    fn judge_errors_are_excluded() {
        let game = Game::new(crate::dsl::check("game \"g\" { task \"t\" room r win false score 1 }").unwrap());
        let r = sample_alignment(&game, &Failing, &AlignmentOptions::default()).unwrap();
        assert_eq!(r.judged_transitions, 0);
        assert_eq!(r.score, 0.0);
        assert_eq!(r.judge_errors.len(), r.unique_transitions);
    }
}
