use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::object::{GameObject, ObjectId, PropertyValue};

/// Complete mutable state of one running game.
#[derive(Clone, Debug, PartialEq)]
pub struct GameState {
    pub objects: BTreeMap<ObjectId, GameObject>,
    pub world_id: ObjectId,
    pub agent_id: ObjectId,
    pub score: i64,
    pub max_score: i64,
    pub game_over: bool,
    pub game_won: bool,
    pub num_steps: u64,
    pub rng_seed: u64,
    pub task_description: String,
    /// Next id handed out by `create`.
    pub next_id: u32,
    /// One latch per win condition, set the first time the condition holds.
    pub achieved: Vec<bool>,
    /// Points from `addscore` effects.
    pub bonus: i64,
}

impl GameState {
    pub fn get(&self, id: ObjectId) -> Option<&GameObject> {
        self.objects.get(&id)
    }

    pub fn get_mut(&mut self, id: ObjectId) -> Option<&mut GameObject> {
        self.objects.get_mut(&id)
    }

    /// First live object with the given declared name, in id order.
    pub fn find_by_name(&self, name: &str) -> Option<ObjectId> {
        self.objects.values().find(|o| o.name == name).map(|o| o.id)
    }

    pub fn world(&self) -> &GameObject {
        &self.objects[&self.world_id]
    }

    pub fn agent(&self) -> &GameObject {
        &self.objects[&self.agent_id]
    }

    /// True when `inner` sits somewhere below `outer`.
    pub fn is_inside(&self, inner: ObjectId, outer: ObjectId) -> bool {
        let mut cur = self.get(inner).and_then(|o| o.parent);
        let mut guard = 0;
        while let Some(id) = cur {
            if id == outer {
                return true;
            }
            guard += 1;
            if guard > self.objects.len() {
                return false;
            }
            cur = self.get(id).and_then(|o| o.parent);
        }
        false
    }

    /// Re-parents `id` under `dest`, appending it to the destination's children.
    pub fn move_object(&mut self, id: ObjectId, dest: ObjectId) -> Result<(), String> {
        if id == dest || self.is_inside(dest, id) {
            return Err("move would create a containment cycle".into());
        }
        if id == self.world_id {
            return Err("the world cannot be moved".into());
        }
        let old = self.get(id).ok_or("object does not exist")?.parent;
        if self.get(dest).is_none() {
            return Err("destination does not exist".into());
        }
        if let Some(old) = old {
            if let Some(p) = self.get_mut(old) {
                p.children.retain(|c| *c != id);
            }
        }
        self.get_mut(dest).expect("checked").children.push(id);
        self.get_mut(id).expect("checked").parent = Some(dest);
        Ok(())
    }

    /// Removes `id` and everything inside it.
    pub fn destroy(&mut self, id: ObjectId) -> Result<(), String> {
        if id == self.world_id || id == self.agent_id || self.is_inside(self.agent_id, id) {
            return Err("cannot destroy the world or the agent".into());
        }
        let obj = self.objects.get(&id).ok_or("object does not exist")?;
        if let Some(parent) = obj.parent {
            if let Some(p) = self.get_mut(parent) {
                p.children.retain(|c| *c != id);
            }
        }
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            if let Some(o) = self.objects.remove(&cur) {
                stack.extend(o.children);
            }
        }
        Ok(())
    }

    /// Walks the containment tree from the world and checks that every object
    /// is reached exactly once with consistent parent links.
    pub fn check_tree(&self) -> Result<(), String> {
        let mut seen = HashSet::new();
        let mut stack = vec![self.world_id];
        if self.world().parent.is_some() {
            return Err("world has a parent".into());
        }
        while let Some(id) = stack.pop() {
            if !seen.insert(id) {
                return Err(format!("object {id} reached twice"));
            }
            let obj = self.get(id).ok_or_else(|| format!("dangling child {id}"))?;
            for child in &obj.children {
                let c = self.get(*child).ok_or_else(|| format!("dangling child {child}"))?;
                if c.parent != Some(id) {
                    return Err(format!("object {child} has inconsistent parent link"));
                }
                stack.push(*child);
            }
        }
        if seen.len() != self.objects.len() {
            return Err("some objects are detached from the world".into());
        }
        if !self.is_inside(self.agent_id, self.world_id) {
            return Err("agent is not inside the world".into());
        }
        Ok(())
    }
}

/// Controls which fields [`canonical_serialize`] emits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SerializeMode {
    /// Everything; round-trips through [`deserialize`].
    Full,
    /// Omits `numSteps` so states reached by different-length paths compare equal.
    Search,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct StateRepr {
    world_id: ObjectId,
    agent_id: ObjectId,
    score: i64,
    max_score: i64,
    game_over: bool,
    game_won: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    num_steps: Option<u64>,
    rng_seed: u64,
    task_description: String,
    next_id: u32,
    achieved: Vec<bool>,
    bonus: i64,
    objects: Vec<ObjectRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ObjectRepr {
    id: ObjectId,
    name: String,
    class_name: String,
    parent: Option<ObjectId>,
    children: Vec<ObjectId>,
    properties: BTreeMap<String, PropertyValue>,
}

/// Deterministic JSON encoding: objects by id, properties by key, containment
/// as explicit parent and child lists.
pub fn canonical_serialize(state: &GameState, mode: SerializeMode) -> Vec<u8> {
    let repr = StateRepr {
        world_id: state.world_id,
        agent_id: state.agent_id,
        score: state.score,
        max_score: state.max_score,
        game_over: state.game_over,
        game_won: state.game_won,
        num_steps: match mode {
            SerializeMode::Full => Some(state.num_steps),
            SerializeMode::Search => None,
        },
        rng_seed: state.rng_seed,
        task_description: state.task_description.clone(),
        next_id: state.next_id,
        achieved: state.achieved.clone(),
        bonus: state.bonus,
        objects: state
            .objects
            .values()
            .map(|o| ObjectRepr {
                id: o.id,
                name: o.name.clone(),
                class_name: o.class_name.clone(),
                parent: o.parent,
                children: o.children.clone(),
                properties: o.properties.clone(),
            })
            .collect(),
    };
    serde_json::to_vec(&repr).expect("state serialization cannot fail")
}

/// Inverse of [`canonical_serialize`]. Search-mode bytes decode with `numSteps = 0`.
pub fn deserialize(bytes: &[u8]) -> Result<GameState, serde_json::Error> {
    let repr: StateRepr = serde_json::from_slice(bytes)?;
    let objects = repr
        .objects
        .into_iter()
        .map(|o| {
            (
                o.id,
                GameObject {
                    id: o.id,
                    name: o.name,
                    class_name: o.class_name,
                    properties: o.properties,
                    parent: o.parent,
                    children: o.children,
                },
            )
        })
        .collect();
    Ok(GameState {
        objects,
        world_id: repr.world_id,
        agent_id: repr.agent_id,
        score: repr.score,
        max_score: repr.max_score,
        game_over: repr.game_over,
        game_won: repr.game_won,
        num_steps: repr.num_steps.unwrap_or(0),
        rng_seed: repr.rng_seed,
        task_description: repr.task_description,
        next_id: repr.next_id,
        achieved: repr.achieved,
        bonus: repr.bonus,
    })
}
