//! The ten engine-provided actions and their default messages.

use super::describe::{describe_object, list_phrase};
use super::object::ObjectId;
use super::GameState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Builtin {
    LookAround,
    LookAt,
    Inventory,
    Take,
    Put,
    Open,
    Close,
    TurnOn,
    TurnOff,
    Wait,
}

/// Result of running an action body.
pub(crate) enum Outcome {
    Done(String),
    /// Precondition failed; the world is untouched.
    Failed(String),
}

impl Builtin {
    pub const ALL: [Builtin; 10] = [
        Builtin::LookAround,
        Builtin::LookAt,
        Builtin::Inventory,
        Builtin::Take,
        Builtin::Put,
        Builtin::Open,
        Builtin::Close,
        Builtin::TurnOn,
        Builtin::TurnOff,
        Builtin::Wait,
    ];

    pub fn pattern(self) -> &'static str {
        match self {
            Builtin::LookAround => "look around",
            Builtin::LookAt => "look at {x:GameObject}",
            Builtin::Inventory => "inventory",
            Builtin::Take => "take {x:GameObject}",
            Builtin::Put => "put {x:GameObject} in {y:Container}",
            Builtin::Open => "open {x:Container}",
            Builtin::Close => "close {x:Container}",
            Builtin::TurnOn => "turn on {x:Device}",
            Builtin::TurnOff => "turn off {x:Device}",
            Builtin::Wait => "wait",
        }
    }

    pub(crate) fn run(self, state: &mut GameState, args: &[ObjectId]) -> Result<Outcome, String> {
        let name = |state: &GameState, id: ObjectId| -> Result<String, String> {
            state.get(id).ok_or_else(|| format!("object {id} was destroyed"))?.display_name()
        };
        let flag = |state: &GameState, id: ObjectId, key: &str| state.get(id).is_some_and(|o| o.flag(key));
        Ok(match self {
            Builtin::LookAround => Outcome::Done(super::describe::describe_room(state)?),
            Builtin::LookAt => Outcome::Done(format!("You see {}.", describe_object(state, args[0])?)),
            Builtin::Inventory => {
                let held = state.agent().children.clone();
                if held.is_empty() {
                    Outcome::Done("You are not carrying anything.".into())
                } else {
                    let items = held.iter().map(|id| describe_object(state, *id)).collect::<Result<Vec<_>, _>>()?;
                    Outcome::Done(format!("You are carrying {}.", list_phrase(&items)))
                }
            }
            Builtin::Take => {
                let x = args[0];
                let n = name(state, x)?;
                if state.get(x).and_then(|o| o.parent) == Some(state.agent_id) {
                    Outcome::Failed(format!("You already have the {n}."))
                } else if !flag(state, x, "isMoveable") {
                    Outcome::Failed(format!("The {n} cannot be picked up."))
                } else {
                    state.move_object(x, state.agent_id)?;
                    Outcome::Done(format!("You take the {n}."))
                }
            }
            Builtin::Put => {
                let (x, y) = (args[0], args[1]);
                let (nx, ny) = (name(state, x)?, name(state, y)?);
                if state.get(x).and_then(|o| o.parent) != Some(state.agent_id) {
                    Outcome::Failed(format!("You are not holding the {nx}."))
                } else if !flag(state, y, "isContainer") {
                    Outcome::Failed(format!("You cannot put things in the {ny}."))
                } else if flag(state, y, "isOpenable") && !flag(state, y, "isOpen") {
                    Outcome::Failed(format!("The {ny} is closed."))
                } else if state.is_inside(y, x) {
                    Outcome::Failed(format!("You cannot put the {nx} inside itself."))
                } else {
                    state.move_object(x, y)?;
                    Outcome::Done(format!("You put the {nx} in the {ny}."))
                }
            }
            Builtin::Open | Builtin::Close => {
                let x = args[0];
                let n = name(state, x)?;
                let opening = self == Builtin::Open;
                if !flag(state, x, "isOpenable") {
                    let verb = if opening { "opened" } else { "closed" };
                    Outcome::Failed(format!("The {n} cannot be {verb}."))
                } else if flag(state, x, "isOpen") == opening {
                    let adj = if opening { "open" } else { "closed" };
                    Outcome::Failed(format!("The {n} is already {adj}."))
                } else {
                    set_flag(state, x, "isOpen", opening)?;
                    let adj = if opening { "open" } else { "closed" };
                    Outcome::Done(format!("The {n} is now {adj}."))
                }
            }
            Builtin::TurnOn | Builtin::TurnOff => {
                let x = args[0];
                let n = name(state, x)?;
                let on = self == Builtin::TurnOn;
                let adj = if on { "on" } else { "off" };
                if !flag(state, x, "isActivatable") {
                    Outcome::Failed(format!("The {n} cannot be turned {adj}."))
                } else if flag(state, x, "isOn") == on {
                    Outcome::Failed(format!("The {n} is already {adj}."))
                } else {
                    set_flag(state, x, "isOn", on)?;
                    Outcome::Done(format!("The {n} is now {adj}."))
                }
            }
            Builtin::Wait => Outcome::Done("You wait.".into()),
        })
    }
}

fn set_flag(state: &mut GameState, id: ObjectId, key: &str, value: bool) -> Result<(), String> {
    let obj = state.get_mut(id).ok_or_else(|| format!("object {id} was destroyed"))?;
    obj.properties.insert(key.to_string(), super::PropertyValue::Bool(value));
    Ok(())
}
