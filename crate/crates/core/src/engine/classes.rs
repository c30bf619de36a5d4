use std::collections::BTreeMap;

use crate::dsl::ast::{GameDef, WORLD_CLASS};

use super::object::{coerce_reserved, PropertyValue};

#[derive(Clone, Debug)]
struct ClassInfo {
    bases: Vec<String>,
    props: Vec<(String, PropertyValue)>,
}

/// Engine base classes plus every class a game declares.
#[derive(Clone, Debug)]
pub struct ClassTable {
    classes: BTreeMap<String, ClassInfo>,
}

fn b(key: &str, v: bool) -> (String, PropertyValue) {
    (key.to_string(), PropertyValue::Bool(v))
}

impl ClassTable {
    pub fn new(def: &GameDef) -> Self {
        let mut classes = BTreeMap::new();
        let mut base = |name: &str, bases: &[&str], props: Vec<(String, PropertyValue)>| {
            classes.insert(
                name.to_string(),
                ClassInfo { bases: bases.iter().map(|s| s.to_string()).collect(), props },
            );
        };
        base(
            "GameObject",
            &[],
            vec![
                b("isContainer", false),
                b("isMoveable", true),
                b("isOpenable", false),
                b("isOpen", false),
                b("isActivatable", false),
                b("isOn", false),
                b("isRoom", false),
            ],
        );
        base("Container", &["GameObject"], vec![b("isContainer", true), b("isOpen", true)]);
        base("Device", &["GameObject"], vec![b("isActivatable", true), b("isMoveable", false)]);
        base("Substance", &["GameObject"], vec![b("isMoveable", false)]);
        base("Agent", &["GameObject"], vec![b("isContainer", true), b("isOpen", true), b("isMoveable", false)]);
        base(WORLD_CLASS, &["Container"], vec![b("isRoom", true), b("isMoveable", false)]);
        for class in &def.classes {
            // Base classes cannot be redefined; validation reports the clash.
            if classes.contains_key(&class.name) {
                continue;
            }
            classes.insert(
                class.name.clone(),
                ClassInfo {
                    bases: class.bases.clone(),
                    props: class.props.iter().map(|p| (p.key.clone(), PropertyValue::from(&p.value))).collect(),
                },
            );
        }
        Self { classes }
    }

    pub fn contains(&self, class: &str) -> bool {
        self.classes.contains_key(class)
    }

    /// True when `class` is `target` or inherits from it.
    pub fn is_a(&self, class: &str, target: &str) -> bool {
        let mut stack = vec![class];
        let mut seen = Vec::new();
        while let Some(c) = stack.pop() {
            if c == target {
                return true;
            }
            if seen.contains(&c) {
                continue;
            }
            seen.push(c);
            if let Some(info) = self.classes.get(c) {
                stack.extend(info.bases.iter().map(String::as_str));
            }
        }
        false
    }

    /// Property defaults for a new instance. Ancestors are applied once each,
    /// in depth-first order with bases left to right, so a shared ancestor
    /// never overrides a more specific base.
    pub fn default_props(&self, class: &str) -> Result<BTreeMap<String, PropertyValue>, String> {
        let mut order = Vec::new();
        self.linearize(class, &mut order, &mut Vec::new())?;
        let mut out = BTreeMap::new();
        for c in order {
            for (k, v) in &self.classes[c].props {
                out.insert(k.clone(), coerce_reserved(k, v.clone())?);
            }
        }
        Ok(out)
    }

    fn linearize<'a>(&'a self, class: &'a str, order: &mut Vec<&'a str>, path: &mut Vec<&'a str>) -> Result<(), String> {
        if path.contains(&class) {
            return Err(format!("class '{class}' inherits from itself"));
        }
        if order.contains(&class) {
            return Ok(());
        }
        let info = self.classes.get(class).ok_or_else(|| format!("unknown class '{class}'"))?;
        path.push(class);
        for base in &info.bases {
            self.linearize(base, order, path)?;
        }
        path.pop();
        order.push(class);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn shared_ancestor_applies_once() {
        let def = parse("game \"g\" { task \"t\" room r class Stove : Device, Container win true score 1 }").unwrap();
        let table = ClassTable::new(&def);
        let props = table.default_props("Stove").unwrap();
        assert_eq!(props["isActivatable"], PropertyValue::Bool(true));
        assert_eq!(props["isContainer"], PropertyValue::Bool(true));
        assert_eq!(props["isMoveable"], PropertyValue::Bool(false));
        assert!(table.is_a("Stove", "Device") && table.is_a("Stove", "GameObject"));
    }

    #[test]
    fn cycles_are_errors() {
        let def = parse("game \"g\" { task \"t\" room r class A : B class B : A win true score 1 }").unwrap();
        let err = ClassTable::new(&def).default_props("A").unwrap_err();
        assert!(err.contains("inherits from itself"));
    }
}
