//! The world engine: entity tree, built-in actions with table dispatch,
//! per-turn tick rules, scoring, and the step loop.

mod builtin;
mod classes;
pub mod describe;
pub mod object;
pub mod state;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::dsl::ast::{GameDef, Pattern, AGENT_NAME, WORLD_CLASS};
use crate::dsl::eval::{apply_effects, eval_condition, Bindings};
use crate::dsl::parser::parse_pattern;

pub use builtin::Builtin;
pub use classes::ClassTable;
pub use object::{GameObject, ObjectId, PropertyValue, SubstanceState};
pub use state::{canonical_serialize, deserialize, GameState, SerializeMode};

use builtin::Outcome;

/// Observation for input that matches no grounded action.
pub const UNKNOWN_COMMAND: &str = "I don't understand that.";
/// Observation for any matched action once the game has ended.
pub const GAME_OVER: &str = "The game is over.";

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("cannot instantiate '{object}': {reason}")]
pub struct InstantiationFault {
    pub object: String,
    pub reason: String,
}

/// An internal error raised while executing an action, tick rule, or
/// win/lose check. This is the fault class the validity harness looks for.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("runtime fault during '{action}': {reason}")]
pub struct RuntimeFault {
    pub action: String,
    pub reason: String,
}

/// Lowercases, trims, and collapses inner whitespace.
pub fn normalize_command(input: &str) -> String {
    input.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Handler {
    Builtin(Builtin),
    /// Index into the game's action declarations.
    Script(usize),
}

#[derive(Clone, Debug)]
pub struct ActionEntry {
    pub verb: String,
    pub pattern: Pattern,
    pub handler: Handler,
}

/// One concrete command with its slot bindings.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundedAction {
    pub text: String,
    /// Index into [`Game::registry`].
    pub entry: usize,
    pub bindings: Bindings,
}

/// A compiled game: its definition, class table, and action registry.
#[derive(Clone, Debug)]
pub struct Game {
    def: GameDef,
    classes: ClassTable,
    registry: Vec<ActionEntry>,
}

impl fmt::Display for Handler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Handler::Builtin(b) => write!(f, "builtin:{b:?}"),
            Handler::Script(i) => write!(f, "action#{i}"),
        }
    }
}

impl Game {
    /// Builds the runtime for `def`. The definition should already have passed
    /// semantic validation; problems that remain surface as instantiation or
    /// runtime faults.
    pub fn new(def: GameDef) -> Self {
        let classes = ClassTable::new(&def);
        let mut registry: Vec<ActionEntry> = Builtin::ALL
            .iter()
            .map(|b| {
                let pattern = parse_pattern(b.pattern()).expect("built-in patterns are well formed");
                ActionEntry { verb: pattern.verb(), pattern, handler: Handler::Builtin(*b) }
            })
            .collect();
        for (i, action) in def.actions.iter().enumerate() {
            registry.push(ActionEntry {
                verb: action.pattern.verb(),
                pattern: action.pattern.clone(),
                handler: Handler::Script(i),
            });
        }
        Self { def, classes, registry }
    }

    pub fn def(&self) -> &GameDef {
        &self.def
    }

    pub fn classes(&self) -> &ClassTable {
        &self.classes
    }

    pub fn registry(&self) -> &[ActionEntry] {
        &self.registry
    }

    /// Live objects whose class is `class` or a subclass, in id order.
    pub fn class_extent(&self, state: &GameState, class: &str) -> Vec<ObjectId> {
        state
            .objects
            .values()
            .filter(|o| self.classes.is_a(&o.class_name, class))
            .map(|o| o.id)
            .collect()
    }

    pub fn instantiate(&self, seed: u64) -> Result<GameState, InstantiationFault> {
        let fault = |object: &str, reason: String| InstantiationFault { object: object.to_string(), reason };
        let room = self.def.room().ok_or_else(|| fault(&self.def.name, "no room declared".into()))?;
        let mut objects = BTreeMap::new();
        let mut make = |id: u32, name: &str, class: &str, props: &[crate::dsl::ast::PropAssign]| {
            let mut properties = self.classes.default_props(class).map_err(|e| fault(name, e))?;
            for p in props {
                let v = object::coerce_reserved(&p.key, PropertyValue::from(&p.value)).map_err(|e| fault(name, e))?;
                properties.insert(p.key.clone(), v);
            }
            let id = ObjectId(id);
            objects.insert(
                id,
                GameObject {
                    id,
                    name: name.to_string(),
                    class_name: class.to_string(),
                    properties,
                    parent: None,
                    children: Vec::new(),
                },
            );
            Ok::<_, InstantiationFault>(id)
        };
        let world_id = make(1, &room.name, WORLD_CLASS, &room.props)?;
        let agent_id = make(2, AGENT_NAME, "Agent", &[])?;
        let mut placed = Vec::new();
        let mut next = 3;
        for decl in self.def.objects.iter().filter(|o| o.container.is_some()) {
            if decl.name == room.name || decl.name == AGENT_NAME || placed.iter().any(|(n, _, _)| *n == decl.name) {
                return Err(fault(&decl.name, "duplicate object name".into()));
            }
            if !self.classes.contains(&decl.class) || decl.class == WORLD_CLASS {
                return Err(fault(&decl.name, format!("unknown class '{}'", decl.class)));
            }
            let id = make(next, &decl.name, &decl.class, &decl.props)?;
            next += 1;
            placed.push((decl.name.as_str(), id, decl.container.as_deref().unwrap_or_default()));
        }
        let mut state = GameState {
            objects,
            world_id,
            agent_id,
            score: 0,
            max_score: self.def.wins.iter().map(|w| w.points).sum(),
            game_over: false,
            game_won: false,
            num_steps: 0,
            rng_seed: seed,
            task_description: self.def.task_text().to_string(),
            next_id: next,
            achieved: vec![false; self.def.wins.len()],
            bonus: 0,
        };
        state.move_object(agent_id, world_id).map_err(|e| fault(AGENT_NAME, e))?;
        for (name, id, container) in &placed {
            let dest = if *container == room.name {
                Some(world_id)
            } else if *container == AGENT_NAME {
                Some(agent_id)
            } else {
                placed.iter().find(|(n, _, _)| n == container).map(|(_, id, _)| *id)
            };
            let dest = dest.ok_or_else(|| fault(name, format!("unknown container '{container}'")))?;
            if !state.objects[&dest].flag("isContainer") {
                return Err(fault(name, format!("'{container}' is not a container")));
            }
            state.move_object(*id, dest).map_err(|e| fault(name, e))?;
        }
        let mut sink = Vec::new();
        self.settle(&mut state, &mut sink).map_err(|e| fault("win/lose conditions", e))?;
        Ok(state)
    }

    /// Objects the agent can currently refer to, in id order. Contents of
    /// closed openable containers are hidden; the inventory is always visible.
    pub fn visible_objects(&self, state: &GameState) -> Vec<ObjectId> {
        let mut out = Vec::new();
        let mut stack = vec![state.world_id];
        let mut seen = HashSet::new();
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                continue;
            }
            let Some(obj) = state.get(id) else { continue };
            for child in &obj.children {
                let Some(c) = state.get(*child) else { continue };
                if *child != state.agent_id {
                    out.push(*child);
                }
                if !(c.flag("isOpenable") && !c.flag("isOpen")) {
                    stack.push(*child);
                }
            }
        }
        out.sort();
        out
    }

    /// Every grounded command, in registry order then object id order.
    /// Preconditions are not consulted.
    pub fn valid_actions(&self, state: &GameState) -> Result<Vec<GroundedAction>, RuntimeFault> {
        let visible = self.visible_objects(state);
        let mut names = BTreeMap::new();
        for id in &visible {
            let obj = &state.objects[id];
            let name = obj
                .display_name()
                .map_err(|reason| RuntimeFault { action: "<enumerate actions>".into(), reason })?;
            names.insert(*id, name);
        }
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for (entry_idx, entry) in self.registry.iter().enumerate() {
            let slots: Vec<(&str, &str)> = entry.pattern.slots().collect();
            let candidates: Vec<Vec<ObjectId>> = slots
                .iter()
                .map(|(_, class)| {
                    visible
                        .iter()
                        .copied()
                        .filter(|id| self.classes.is_a(&state.objects[id].class_name, class))
                        .collect()
                })
                .collect();
            let mut chosen = Vec::with_capacity(slots.len());
            self.ground(entry_idx, entry, &slots, &candidates, &names, &mut chosen, &mut seen, &mut out);
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn ground(
        &self,
        entry_idx: usize,
        entry: &ActionEntry,
        slots: &[(&str, &str)],
        candidates: &[Vec<ObjectId>],
        names: &BTreeMap<ObjectId, String>,
        chosen: &mut Vec<ObjectId>,
        seen: &mut HashSet<String>,
        out: &mut Vec<GroundedAction>,
    ) {
        if chosen.len() == slots.len() {
            let mut text = String::new();
            let mut slot = 0;
            for part in &entry.pattern.parts {
                match part {
                    crate::dsl::ast::PatternPart::Text(t) => text.push_str(t),
                    crate::dsl::ast::PatternPart::Slot { .. } => {
                        text.push_str(&names[&chosen[slot]]);
                        slot += 1;
                    }
                }
            }
            let text = normalize_command(&text);
            if seen.insert(text.clone()) {
                let bindings = slots.iter().zip(chosen.iter()).map(|((n, _), id)| (n.to_string(), *id)).collect();
                out.push(GroundedAction { text, entry: entry_idx, bindings });
            }
            return;
        }
        for id in &candidates[chosen.len()] {
            if chosen.contains(id) {
                continue;
            }
            chosen.push(*id);
            self.ground(entry_idx, entry, slots, candidates, names, chosen, seen, out);
            chosen.pop();
        }
    }

    /// Grounded command strings for `state`.
    pub fn enumerate_valid_actions(&self, state: &GameState) -> Result<Vec<String>, RuntimeFault> {
        Ok(self.valid_actions(state)?.into_iter().map(|a| a.text).collect())
    }

    /// Room description as seen by the agent.
    pub fn describe(&self, state: &GameState) -> Result<String, RuntimeFault> {
        describe::describe_room(state).map_err(|reason| RuntimeFault { action: "<describe>".into(), reason })
    }

    /// Parses free text against the grounded actions and executes the match.
    pub fn step(&self, state: &GameState, input: &str) -> Result<(String, GameState), RuntimeFault> {
        let cmd = normalize_command(input);
        let actions = self.valid_actions(state)?;
        match actions.iter().find(|a| a.text == cmd) {
            Some(action) => self.execute(state, action),
            None => Ok((UNKNOWN_COMMAND.to_string(), state.clone())),
        }
    }

    /// Executes an already grounded action.
    pub fn execute(&self, state: &GameState, action: &GroundedAction) -> Result<(String, GameState), RuntimeFault> {
        let mut next = state.clone();
        let obs = self.execute_in_place(&mut next, action)?;
        Ok((obs, next))
    }

    fn execute_in_place(&self, state: &mut GameState, action: &GroundedAction) -> Result<String, RuntimeFault> {
        if state.game_over {
            return Ok(GAME_OVER.to_string());
        }
        let fault = |reason: String| RuntimeFault { action: action.text.clone(), reason };
        state.num_steps += 1;
        let entry = &self.registry[action.entry];
        let mut messages = Vec::new();
        match entry.handler {
            Handler::Builtin(b) => {
                let args: Vec<ObjectId> = action.bindings.iter().map(|(_, id)| *id).collect();
                match b.run(state, &args).map_err(fault)? {
                    Outcome::Done(msg) => messages.push(msg),
                    Outcome::Failed(msg) => return Ok(msg),
                }
            }
            Handler::Script(i) => {
                let decl = &self.def.actions[i];
                let mut scope = action.bindings.clone();
                if let Some(req) = &decl.requires {
                    if !eval_condition(self, state, req, &mut scope).map_err(fault)? {
                        return Ok(decl.failure.clone().unwrap_or_else(|| "You can't do that.".to_string()));
                    }
                }
                apply_effects(self, state, &decl.effects, &mut scope, &mut messages).map_err(fault)?;
                if messages.is_empty() {
                    messages.push("Done.".to_string());
                }
            }
        }
        self.tick_messages(state, &mut messages).map_err(fault)?;
        self.settle(state, &mut messages).map_err(fault)?;
        Ok(messages.join("\n"))
    }

    /// Runs one world tick outside of an action.
    pub fn tick(&self, state: &mut GameState) -> Result<Vec<String>, RuntimeFault> {
        let mut messages = Vec::new();
        self.tick_messages(state, &mut messages)
            .map_err(|reason| RuntimeFault { action: "<tick>".into(), reason })?;
        Ok(messages)
    }

    /// Fires tick rules in declaration order, then rechecks every substance phase.
    fn tick_messages(&self, state: &mut GameState, messages: &mut Vec<String>) -> Result<(), String> {
        for rule in &self.def.tick_rules {
            match &rule.binder {
                Some(binder) => {
                    for id in self.class_extent(state, &binder.class) {
                        if !state.objects.contains_key(&id) {
                            continue;
                        }
                        let mut scope = vec![(binder.var.clone(), id)];
                        let fire = match &rule.condition {
                            Some(c) => eval_condition(self, state, c, &mut scope)?,
                            None => true,
                        };
                        if fire {
                            apply_effects(self, state, &rule.effects, &mut scope, messages)?;
                        }
                    }
                }
                None => {
                    let mut scope = Vec::new();
                    let fire = match &rule.condition {
                        Some(c) => eval_condition(self, state, c, &mut scope)?,
                        None => true,
                    };
                    if fire {
                        apply_effects(self, state, &rule.effects, &mut scope, messages)?;
                    }
                }
            }
        }
        for obj in state.objects.values() {
            if obj.is_substance() {
                obj.display_name()?;
            }
        }
        Ok(())
    }

    /// Latches newly satisfied win conditions, recomputes the score, and
    /// decides whether the game has ended.
    fn settle(&self, state: &mut GameState, messages: &mut Vec<String>) -> Result<(), String> {
        if state.game_over {
            return Ok(());
        }
        for (i, win) in self.def.wins.iter().enumerate() {
            if !state.achieved[i] && eval_condition(self, state, &win.expr, &mut Vec::new())? {
                state.achieved[i] = true;
            }
        }
        let earned: i64 = self.def.wins.iter().zip(&state.achieved).filter(|(_, a)| **a).map(|(w, _)| w.points).sum();
        state.score = (state.bonus + earned).min(state.max_score);
        if !state.achieved.is_empty() && state.achieved.iter().all(|a| *a) {
            state.game_won = true;
            state.game_over = true;
            messages.push(format!("You have won! Final score: {}/{}.", state.score, state.max_score));
            return Ok(());
        }
        for lose in &self.def.loses {
            if eval_condition(self, state, &lose.expr, &mut Vec::new())? {
                state.game_over = true;
                messages.push(format!("You have lost. Final score: {}/{}.", state.score, state.max_score));
                break;
            }
        }
        Ok(())
    }
}
