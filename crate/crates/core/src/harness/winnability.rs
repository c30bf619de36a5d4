//! Winnability by bounded breadth-first search over world states.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::state_key;
use super::validity::{FaultPhase, FaultRecord};
use crate::engine::{Game, GameState, InstantiationFault};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    pub max_depth: usize,
    pub node_budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { max_depth: 20, node_budget: 200_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Winnable,
    /// The reachable state space was exhausted without a win.
    Unwinnable,
    /// A limit was hit before the space was exhausted.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WinnabilityResult {
    pub winnable: bool,
    pub verdict: Verdict,
    pub plan: Vec<String>,
    /// Whether replaying `plan` from a fresh state reaches a win.
    pub plan_verified: bool,
    pub nodes_expanded: usize,
    /// Node budget or depth limit cut the search short.
    pub budget_exhausted: bool,
    /// Faults met during expansion; their branches were pruned.
    pub faults: Vec<FaultRecord>,
}

struct Node {
    /// Dropped once the node is expanded.
    state: Option<GameState>,
    parent: Option<usize>,
    action: String,
    depth: usize,
}

fn plan_to(nodes: &[Node], mut i: usize) -> Vec<String> {
    let mut plan = Vec::new();
    while let Some(p) = nodes[i].parent {
        plan.push(nodes[i].action.clone());
        i = p;
    }
    plan.reverse();
    plan
}

/// Shortest winning plan within the limits, expanding actions in enumeration order.
pub fn search_winnable(game: &Game, opts: &SearchOptions, seed: u64) -> Result<WinnabilityResult, InstantiationFault> {
    let initial = game.instantiate(seed)?;
    let mut result = WinnabilityResult {
        winnable: false,
        verdict: Verdict::Unwinnable,
        plan: Vec::new(),
        plan_verified: false,
        nodes_expanded: 0,
        budget_exhausted: false,
        faults: Vec::new(),
    };
    if initial.game_won {
        result.winnable = true;
        result.verdict = Verdict::Winnable;
        result.plan_verified = true;
        return Ok(result);
    }
    let mut seen_faults = HashSet::new();
    let mut visited = HashSet::from([state_key(&initial)]);
    let mut nodes = vec![Node { state: Some(initial), parent: None, action: String::new(), depth: 0 }];
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let state = nodes[i].state.take().expect("queued nodes hold their state");
        if state.game_over {
            continue;
        }
        if nodes[i].depth >= opts.max_depth {
            result.budget_exhausted = true;
            continue;
        }
        if result.nodes_expanded >= opts.node_budget {
            result.budget_exhausted = true;
            break;
        }
        result.nodes_expanded += 1;
        let actions = match game.valid_actions(&state) {
            Ok(a) => a,
            Err(e) => {
                if seen_faults.insert(e.to_string()) {
                    let actions = plan_to(&nodes, i);
                    result.faults.push(FaultRecord { phase: FaultPhase::Enumerate, message: e.to_string(), actions });
                }
                continue;
            }
        };
        for action in actions {
            match game.execute(&state, &action) {
                Ok((_, next)) => {
                    if !visited.insert(state_key(&next)) {
                        continue;
                    }
                    let won = next.game_won;
                    nodes.push(Node { state: Some(next), parent: Some(i), action: action.text, depth: nodes[i].depth + 1 });
                    let j = nodes.len() - 1;
                    if won {
                        result.winnable = true;
                        result.verdict = Verdict::Winnable;
                        result.plan = plan_to(&nodes, j);
                        result.plan_verified = replays_to_win(game, &result.plan, seed);
                        return Ok(result);
                    }
                    queue.push_back(j);
                }
                Err(e) => {
                    if seen_faults.insert(e.to_string()) {
                        let mut actions = plan_to(&nodes, i);
                        actions.push(action.text);
                        result.faults.push(FaultRecord { phase: FaultPhase::Step, message: e.to_string(), actions });
                    }
                }
            }
        }
    }
    if result.budget_exhausted {
        result.verdict = Verdict::Inconclusive;
    }
    Ok(result)
}

/// Replays `plan` from a fresh instantiation.
pub fn replays_to_win(game: &Game, plan: &[String], seed: u64) -> bool {
    let Ok(mut state) = game.instantiate(seed) else { return false };
    for cmd in plan {
        match game.step(&state, cmd) {
            Ok((_, next)) => state = next,
            Err(_) => return false,
        }
    }
    state.game_won
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::check;

    fn game(body: &str) -> Game {
        Game::new(check(&format!("game \"g\" {{\n task \"t\"\n room kitchen\n {body}\n}}")).unwrap())
    }

    #[test]
    fn already_won_needs_no_plan() {
        let r = search_winnable(&game("win true score 1"), &SearchOptions::default(), 0).unwrap();
        assert!(r.winnable && r.plan.is_empty() && r.plan_verified);
    }

    #[test]
    fn finite_space_without_win_is_unwinnable() {
        let r = search_winnable(&game("win false score 1"), &SearchOptions::default(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Unwinnable);
        assert!(!r.budget_exhausted);
    }

    #[test]
    fn counter_beyond_depth_is_inconclusive() {
        let g = game("object c : GameObject in kitchen { n = 0 }\n every turn { set c.n = c.n + 1 }\n win c.n >= 50 score 1");
        let r = search_winnable(&g, &SearchOptions { max_depth: 5, node_budget: 1000 }, 0).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(r.budget_exhausted && !r.winnable);
    }

    #[test]
    fn node_budget_is_respected() {
        let g = game("object c : GameObject in kitchen { n = 0 }\n every turn { set c.n = c.n + 1 }\n win c.n >= 50 score 1");
        let r = search_winnable(&g, &SearchOptions { max_depth: 100, node_budget: 10 }, 0).unwrap();
        assert_eq!(r.nodes_expanded, 10);
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
