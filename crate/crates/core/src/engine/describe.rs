use super::object::ObjectId;
use super::GameState;

/// Room description: room name, then every object in child order, with open
/// containers listing their contents recursively.
pub fn describe_room(state: &GameState) -> Result<String, String> {
    let room = state.world();
    let items = room
        .children
        .iter()
        .filter(|id| **id != state.agent_id)
        .map(|id| describe_object(state, *id))
        .collect::<Result<Vec<_>, _>>()?;
    let head = format!("You are in the {}.", room.display_name()?);
    Ok(if items.is_empty() {
        format!("{head} There is nothing here.")
    } else {
        format!("{head} You see {}.", list_phrase(&items))
    })
}

/// Noun phrase for one object, e.g. `a stove (on, containing a pot (containing some water))`.
pub fn describe_object(state: &GameState, id: ObjectId) -> Result<String, String> {
    let obj = state.get(id).ok_or_else(|| format!("object {id} was destroyed"))?;
    let name = obj.display_name()?;
    let article = if obj.is_substance() {
        "some"
    } else if name.starts_with(['a', 'e', 'i', 'o', 'u']) {
        "an"
    } else {
        "a"
    };
    let mut quals = Vec::new();
    if obj.flag("isActivatable") {
        quals.push(if obj.flag("isOn") { "on" } else { "off" }.to_string());
    }
    let closed = obj.flag("isOpenable") && !obj.flag("isOpen");
    if obj.flag("isOpenable") {
        quals.push(if closed { "closed" } else { "open" }.to_string());
    }
    if obj.flag("isContainer") && !closed && !obj.children.is_empty() {
        let inner = obj
            .children
            .iter()
            .map(|c| describe_object(state, *c))
            .collect::<Result<Vec<_>, _>>()?;
        quals.push(format!("containing {}", list_phrase(&inner)));
    }
    Ok(if quals.is_empty() {
        format!("{article} {name}")
    } else {
        format!("{article} {name} ({})", quals.join(", "))
    })
}

/// `a`, `a and b`, `a, b and c`.
pub fn list_phrase(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}
