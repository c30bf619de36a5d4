//! Specification compliance by normalized name matching.

use serde::{Deserialize, Serialize};

use crate::dsl::ast::{Effect, EffectKind, GameDef};
use crate::engine::Builtin;
use crate::spec::{normalize_name, TaskSpecification};

/// `matched` of `total` spec entries found in the game.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub matched: usize,
    pub total: usize,
}

impl Tally {
    pub fn ratio(self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }

    pub fn complete(self) -> bool {
        self.matched == self.total
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntryVerdict {
    pub entry: String,
    pub matched: bool,
    /// The game name or verb that satisfied the entry.
    pub matched_by: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ComplianceReport {
    pub objects: Tally,
    pub actions: Tally,
    pub distractors: Tally,
    pub object_verdicts: Vec<EntryVerdict>,
    pub action_verdicts: Vec<EntryVerdict>,
    pub distractor_verdicts: Vec<EntryVerdict>,
}

/// Class names, object names (room included), and names introduced by `create`.
pub fn game_names(def: &GameDef) -> Vec<String> {
    let mut names: Vec<String> = def.classes.iter().map(|c| c.name.clone()).collect();
    names.extend(def.objects.iter().map(|o| o.name.clone()));
    names.extend(def.created_names().into_iter().map(|(n, _)| n.to_string()));
    names
}

/// Built-in verbs followed by the verbs of the game's own actions.
pub fn game_verbs(def: &GameDef) -> Vec<String> {
    let mut verbs: Vec<String> = Builtin::ALL
        .iter()
        .map(|b| crate::dsl::parse_pattern(b.pattern()).expect("built-in pattern").verb())
        .collect();
    verbs.extend(def.actions.iter().map(|a| a.pattern.verb()));
    verbs
}

fn grade(entries: &[String], pool: &[String]) -> (Tally, Vec<EntryVerdict>) {
    let normalized: Vec<(String, &String)> = pool.iter().map(|p| (normalize_name(p), p)).collect();
    let verdicts: Vec<EntryVerdict> = entries
        .iter()
        .map(|entry| {
            let key = normalize_name(entry);
            let hit = normalized.iter().find(|(n, _)| *n == key).map(|(_, p)| (*p).clone());
            EntryVerdict { entry: entry.clone(), matched: hit.is_some(), matched_by: hit }
        })
        .collect();
    let tally = Tally { matched: verdicts.iter().filter(|v| v.matched).count(), total: entries.len() };
    (tally, verdicts)
}

pub fn check_compliance(def: &GameDef, spec: &TaskSpecification) -> ComplianceReport {
    let names = game_names(def);
    let verbs = game_verbs(def);
    let mut either = names.clone();
    either.extend(verbs.iter().cloned());
    let (objects, object_verdicts) = grade(&spec.task_critical_objects, &names);
    let (actions, action_verdicts) = grade(&spec.actions, &verbs);
    let (distractors, distractor_verdicts) = grade(&spec.distractors, &either);
    ComplianceReport { objects, actions, distractors, object_verdicts, action_verdicts, distractor_verdicts }
}

/// Mutation helper: drops every class, object, and `create` effect whose name
/// normalizes to the same form as `name`.
pub fn remove_named(def: &GameDef, name: &str) -> GameDef {
    let key = normalize_name(name);
    let keep = |n: &str| normalize_name(n) != key;
    let strip = |effects: &[Effect]| -> Vec<Effect> {
        effects
            .iter()
            .filter(|e| !matches!(&e.kind, EffectKind::Create { name, .. } if !keep(name)))
            .cloned()
            .collect()
    };
    let mut out = def.clone();
    out.classes.retain(|c| keep(&c.name));
    out.objects.retain(|o| keep(&o.name));
    for a in &mut out.actions {
        a.effects = strip(&a.effects);
    }
    for r in &mut out.tick_rules {
        r.effects = strip(&r.effects);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn spec(objects: &[&str], distractors: &[&str]) -> TaskSpecification {
        TaskSpecification {
            task_description: "t".into(),
            task_critical_objects: objects.iter().map(|s| s.to_string()).collect(),
            actions: vec!["open".into(), "scrub".into()],
            distractors: distractors.iter().map(|s| s.to_string()).collect(),
            solution_sketch: vec!["x".into()],
        }
    }

    #[test]
    fn matching_uses_normalized_names() {
        let def = parse(
            "game \"g\" { task \"t\" room kitchen class Dishes : GameObject object dish_soap : GameObject in kitchen action \"scrub {d:Dishes}\" { say \"ok\" } win true score 1 }",
        )
        .unwrap();
        let r = check_compliance(&def, &spec(&["dishes", "Dish Soap", "sponge"], &[]));
        assert_eq!(r.objects, Tally { matched: 2, total: 3 });
        assert_eq!(r.actions, Tally { matched: 2, total: 2 });
        assert_eq!(r.distractors, Tally { matched: 0, total: 0 });
        assert!(!r.object_verdicts[2].matched);
        assert_eq!(r.object_verdicts[0].matched_by.as_deref(), Some("Dishes"));

        let mutated = remove_named(&def, "dish soap");
        let r = check_compliance(&mutated, &spec(&["dishes", "Dish Soap", "sponge"], &[]));
        assert_eq!(r.objects.matched, 1);
    }
}
