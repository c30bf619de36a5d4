//! Technical validity: does the game load, enumerate its actions, and run
//! every short action sequence without an internal fault.

use std::collections::HashSet;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::{state_key, state_rng};
use crate::dsl::{check, GameDef};
use crate::engine::{Builtin, Game, GameState, GroundedAction};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidityOptions {
    pub depth: usize,
    pub branch_cap: usize,
    pub seed: u64,
}

impl Default for ValidityOptions {
    fn default() -> Self {
        Self { depth: 3, branch_cap: 100, seed: 42 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultPhase {
    Parse,
    Semantic,
    Instantiate,
    Describe,
    Enumerate,
    Step,
}

/// One detected error and the action sequence that triggers it (empty for
/// load-time errors).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FaultRecord {
    pub phase: FaultPhase,
    pub message: String,
    pub actions: Vec<String>,
}

impl std::fmt::Display for FaultRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.actions.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{} (after actions: {})", self.message, self.actions.join(", "))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidityReport {
    pub init_ok: bool,
    pub valid_actions_ok: bool,
    pub runnable_ok: bool,
    /// Ordered: load-time errors by source position, then runtime faults in
    /// breadth-first trajectory order.
    pub faults: Vec<FaultRecord>,
    pub states_explored: usize,
}

impl ValidityReport {
    fn failed(faults: Vec<FaultRecord>) -> Self {
        Self { init_ok: false, valid_actions_ok: false, runnable_ok: false, faults, states_explored: 0 }
    }

    /// The error a reflection round feeds back, if any.
    pub fn first_error(&self) -> Option<&FaultRecord> {
        self.faults.first()
    }
}

/// Parses, validates, instantiates, and explores `source`.
pub fn check_validity(source: &str, opts: &ValidityOptions) -> ValidityReport {
    match check(source) {
        Ok(def) => check_def(def, opts),
        Err(diags) => {
            let phase = if crate::dsl::parse(source).is_ok() { FaultPhase::Semantic } else { FaultPhase::Parse };
            ValidityReport::failed(
                diags
                    .into_iter()
                    .map(|d| FaultRecord { phase, message: d.to_string(), actions: Vec::new() })
                    .collect(),
            )
        }
    }
}

/// As [`check_validity`] for an already validated definition.
pub fn check_def(def: GameDef, opts: &ValidityOptions) -> ValidityReport {
    let game = Game::new(def);
    let load = |phase, message: String| FaultRecord { phase, message, actions: Vec::new() };
    let state = match game.instantiate(opts.seed) {
        Ok(s) => s,
        Err(e) => return ValidityReport::failed(vec![load(FaultPhase::Instantiate, e.to_string())]),
    };
    if let Err(e) = game.describe(&state) {
        return ValidityReport::failed(vec![load(FaultPhase::Describe, e.to_string())]);
    }
    let initial = match game.valid_actions(&state) {
        Ok(a) => a,
        Err(e) => {
            let mut r = ValidityReport::failed(vec![load(FaultPhase::Enumerate, e.to_string())]);
            r.init_ok = true;
            return r;
        }
    };
    let valid_actions_ok = !initial.is_empty() && covers_builtins(&game, &initial);
    let (faults, states_explored) = explore(&game, state, opts);
    ValidityReport { init_ok: true, valid_actions_ok, runnable_ok: faults.is_empty(), faults, states_explored }
}

/// True when each of the ten built-in verbs has at least one grounding.
fn covers_builtins(game: &Game, actions: &[GroundedAction]) -> bool {
    let registry = game.registry();
    Builtin::ALL.iter().enumerate().all(|(i, b)| {
        debug_assert_eq!(registry[i].handler, crate::engine::Handler::Builtin(*b));
        actions.iter().any(|a| a.entry == i)
    })
}

/// Breadth-first over action sequences of length up to `opts.depth`. A state
/// first reached at depth d has the most remaining depth it will ever get,
/// so repeated states are skipped without losing faults.
fn explore(game: &Game, initial: GameState, opts: &ValidityOptions) -> (Vec<FaultRecord>, usize) {
    let mut faults: Vec<FaultRecord> = Vec::new();
    let mut seen_faults: HashSet<(FaultPhase, String)> = HashSet::new();
    let mut record = |faults: &mut Vec<FaultRecord>, phase, action: String, message: String, actions: Vec<String>| {
        if seen_faults.insert((phase, format!("{action}\u{0}{message}"))) {
            faults.push(FaultRecord { phase, message, actions });
        }
    };
    let mut visited = HashSet::from([state_key(&initial)]);
    let mut frontier = vec![(initial, Vec::<String>::new())];
    let mut explored = 0;
    for _ in 0..opts.depth {
        let mut next_frontier = Vec::new();
        for (state, path) in frontier {
            if state.game_over {
                continue;
            }
            explored += 1;
            let key = state_key(&state);
            let actions = match game.valid_actions(&state) {
                Ok(a) => a,
                Err(e) => {
                    record(&mut faults, FaultPhase::Enumerate, e.action.clone(), e.to_string(), path.clone());
                    continue;
                }
            };
            for action in capped(actions, opts, &key) {
                let mut seq = path.clone();
                seq.push(action.text.clone());
                match game.execute(&state, &action) {
                    Ok((_, next)) => {
                        if let Err(e) = game.describe(&next) {
                            record(&mut faults, FaultPhase::Describe, action.text.clone(), e.to_string(), seq);
                            continue;
                        }
                        if visited.insert(state_key(&next)) {
                            next_frontier.push((next, seq));
                        }
                    }
                    Err(e) => record(&mut faults, FaultPhase::Step, e.action.clone(), e.to_string(), seq),
                }
            }
        }
        frontier = next_frontier;
    }
    (faults, explored)
}

/// All actions when within the cap, else a seeded uniform sample of `branch_cap`
/// of them kept in enumeration order.
fn capped(actions: Vec<GroundedAction>, opts: &ValidityOptions, key: &[u8; 32]) -> Vec<GroundedAction> {
    if actions.len() <= opts.branch_cap {
        return actions;
    }
    let mut rng = state_rng(opts.seed, key);
    let mut picked = sample(&mut rng, actions.len(), opts.branch_cap).into_vec();
    picked.sort_unstable();
    picked.into_iter().map(|i| actions[i].clone()).collect()
}
