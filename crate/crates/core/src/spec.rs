//! Task specifications: the contract a game is checked against.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const FIELDS: [&str; 5] = ["taskDescription", "taskCriticalObjects", "actions", "distractors", "solutionSketch"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TaskSpecification {
    pub task_description: String,
    pub task_critical_objects: Vec<String>,
    pub actions: Vec<String>,
    pub distractors: Vec<String>,
    pub solution_sketch: Vec<String>,
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("cannot read spec {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid spec field '{field}': {message}")]
    Format { field: String, message: String },
}

impl SpecError {
    fn format(field: &str, message: impl Into<String>) -> Self {
        SpecError::Format { field: field.to_string(), message: message.into() }
    }

    /// Offending field for format errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            SpecError::Format { field, .. } => Some(field),
            SpecError::Io { .. } => None,
        }
    }
}

/// Lowercases, collapses runs of non-alphanumerics to one space, and strips
/// trailing `s` from words while they are longer than three characters.
pub fn normalize_name(text: &str) -> String {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| {
            let mut w = w;
            while w.chars().count() > 3 && w.ends_with('s') {
                w = &w[..w.len() - 1];
            }
            w
        })
        .collect::<Vec<_>>()
        .join(" ")
}

impl TaskSpecification {
    /// Parses and checks a spec from JSON text.
    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| SpecError::format("<document>", format!("not valid JSON: {e}")))?;
        let Value::Object(map) = value else {
            return Err(SpecError::format("<document>", "expected a JSON object"));
        };
        if let Some(unknown) = map.keys().find(|k| !FIELDS.contains(&k.as_str())) {
            return Err(SpecError::format(unknown, "unknown field"));
        }
        let text_field = |field: &str| match map.get(field) {
            None => Err(SpecError::format(field, "missing")),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(_) => Err(SpecError::format(field, "expected a string")),
        };
        let list_field = |field: &str| match map.get(field) {
            None => Err(SpecError::format(field, "missing")),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| v.as_str().map(str::to_string).ok_or_else(|| SpecError::format(field, "expected strings")))
                .collect::<Result<Vec<_>, _>>(),
            Some(_) => Err(SpecError::format(field, "expected an array of strings")),
        };
        let spec = TaskSpecification {
            task_description: text_field("taskDescription")?,
            task_critical_objects: list_field("taskCriticalObjects")?,
            actions: list_field("actions")?,
            distractors: list_field("distractors")?,
            solution_sketch: list_field("solutionSketch")?,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serialization cannot fail");
        s.push('\n');
        s
    }

    /// Checks the non-emptiness and uniqueness rules.
    pub fn check(&self) -> Result<(), SpecError> {
        if self.task_description.trim().is_empty() {
            return Err(SpecError::format("taskDescription", "must not be empty"));
        }
        if self.task_critical_objects.is_empty() {
            return Err(SpecError::format("taskCriticalObjects", "must not be empty"));
        }
        if self.solution_sketch.is_empty() {
            return Err(SpecError::format("solutionSketch", "must not be empty"));
        }
        let lists = [
            ("taskCriticalObjects", &self.task_critical_objects),
            ("actions", &self.actions),
            ("distractors", &self.distractors),
            ("solutionSketch", &self.solution_sketch),
        ];
        for (field, list) in lists {
            let mut seen = std::collections::HashSet::new();
            for entry in list {
                let n = normalize_name(entry);
                if n.is_empty() {
                    return Err(SpecError::format(field, format!("entry \"{entry}\" is blank")));
                }
                if !seen.insert(n) {
                    return Err(SpecError::format(field, format!("duplicate entry \"{entry}\"")));
                }
            }
        }
        Ok(())
    }
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<TaskSpecification, SpecError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io { path: path.display().to_string(), source })?;
    TaskSpecification::from_json(&text)
}

pub fn save_spec(spec: &TaskSpecification, path: impl AsRef<Path>) -> Result<(), SpecError> {
    let path = path.as_ref();
    std::fs::write(path, spec.to_json()).map_err(|source| SpecError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_name("Dish_Soap"), "dish soap");
        assert_eq!(normalize_name("dishes"), "dishe");
        assert_eq!(normalize_name("Dishes "), "dishe");
        assert_eq!(normalize_name("GAS stove!"), "gas stove");
        assert_eq!(normalize_name("  --  "), "");
    }

    #[test]
    fn missing_field_is_named() {
        let err = TaskSpecification::from_json(
            r#"{"taskCriticalObjects":["a"],"actions":[],"distractors":[],"solutionSketch":["x"]}"#,
        )
        .unwrap_err();
        assert_eq!(err.field(), Some("taskDescription"));
    }

    #[test]
    fn unknown_field_is_rejected() {
        let err = TaskSpecification::from_json(
            r#"{"taskDescription":"t","taskCriticalObjects":["a"],"actions":[],"distractors":[],"solutionSketch":["x"],"extra":1}"#,
        )
        .unwrap_err();
        assert_eq!(err.field(), Some("extra"));
    }

    #[test]
    fn duplicates_after_normalization_are_rejected() {
        let err = TaskSpecification::from_json(
            r#"{"taskDescription":"t","taskCriticalObjects":["Dishes","dishes "],"actions":[],"distractors":[],"solutionSketch":["x"]}"#,
        )
        .unwrap_err();
        assert_eq!(err.field(), Some("taskCriticalObjects"));
    }
}
