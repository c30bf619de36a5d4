use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dsl::ast::Literal;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PropertyValue {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
}

impl PropertyValue {
    pub fn type_name(&self) -> &'static str {
        match self {
            PropertyValue::Bool(_) => "boolean",
            PropertyValue::Int(_) => "integer",
            PropertyValue::Real(_) => "real",
            PropertyValue::Text(_) => "text",
        }
    }

    pub fn as_real(&self) -> Option<f64> {
        match self {
            PropertyValue::Int(n) => Some(*n as f64),
            PropertyValue::Real(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<&Literal> for PropertyValue {
    fn from(lit: &Literal) -> Self {
        match lit {
            Literal::Bool(b) => PropertyValue::Bool(*b),
            Literal::Int(n) => PropertyValue::Int(*n),
            Literal::Real(x) => PropertyValue::Real(*x),
            Literal::Text(s) => PropertyValue::Text(s.clone()),
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Bool(b) => write!(f, "{b}"),
            PropertyValue::Int(n) => write!(f, "{n}"),
            PropertyValue::Real(x) => write!(f, "{x}"),
            PropertyValue::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReservedKind {
    Bool,
    Real,
    Text,
}

/// Engine-reserved property keys and the variant each must hold.
pub const RESERVED_KEYS: [(&str, ReservedKind); 13] = [
    ("isContainer", ReservedKind::Bool),
    ("isMoveable", ReservedKind::Bool),
    ("isOpenable", ReservedKind::Bool),
    ("isOpen", ReservedKind::Bool),
    ("isActivatable", ReservedKind::Bool),
    ("isOn", ReservedKind::Bool),
    ("isRoom", ReservedKind::Bool),
    ("temperature", ReservedKind::Real),
    ("meltingPoint", ReservedKind::Real),
    ("boilingPoint", ReservedKind::Real),
    ("solidName", ReservedKind::Text),
    ("liquidName", ReservedKind::Text),
    ("gasName", ReservedKind::Text),
];

/// Keys that make an object a substance.
pub const SUBSTANCE_KEYS: [&str; 5] = ["meltingPoint", "boilingPoint", "solidName", "liquidName", "gasName"];

pub fn reserved_kind(key: &str) -> Option<ReservedKind> {
    RESERVED_KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

/// Checks a value against the reserved-key table, widening integers to reals
/// where the key is real-valued. Unreserved keys pass through unchanged.
pub fn coerce_reserved(key: &str, value: PropertyValue) -> Result<PropertyValue, String> {
    let Some(kind) = reserved_kind(key) else { return Ok(value) };
    match (kind, value) {
        (ReservedKind::Bool, v @ PropertyValue::Bool(_)) => Ok(v),
        (ReservedKind::Real, PropertyValue::Int(n)) => Ok(PropertyValue::Real(n as f64)),
        (ReservedKind::Real, v @ PropertyValue::Real(_)) => Ok(v),
        (ReservedKind::Text, v @ PropertyValue::Text(_)) => Ok(v),
        (kind, v) => {
            let want = match kind {
                ReservedKind::Bool => "boolean",
                ReservedKind::Real => "real",
                ReservedKind::Text => "text",
            };
            Err(format!("property '{key}' must be {want}, got {}", v.type_name()))
        }
    }
}

/// Phase of a substance, derived from its temperature and thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SubstanceState {
    Solid,
    Liquid,
    Gas,
}

impl SubstanceState {
    pub fn classify(temperature: f64, melting_point: f64, boiling_point: f64) -> Self {
        if temperature < melting_point {
            SubstanceState::Solid
        } else if temperature < boiling_point {
            SubstanceState::Liquid
        } else {
            SubstanceState::Gas
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubstanceState::Solid => "solid",
            SubstanceState::Liquid => "liquid",
            SubstanceState::Gas => "gas",
        }
    }

    pub fn name_key(self) -> &'static str {
        match self {
            SubstanceState::Solid => "solidName",
            SubstanceState::Liquid => "liquidName",
            SubstanceState::Gas => "gasName",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameObject {
    pub id: ObjectId,
    /// Declared identifier, used for references from game code.
    pub name: String,
    pub class_name: String,
    pub properties: BTreeMap<String, PropertyValue>,
    pub parent: Option<ObjectId>,
    pub children: Vec<ObjectId>,
}

impl GameObject {
    pub fn prop(&self, key: &str) -> Option<&PropertyValue> {
        self.properties.get(key)
    }

    pub fn flag(&self, key: &str) -> bool {
        matches!(self.properties.get(key), Some(PropertyValue::Bool(true)))
    }

    fn real(&self, key: &str) -> Result<f64, String> {
        self.prop(key)
            .and_then(PropertyValue::as_real)
            .ok_or_else(|| format!("substance '{}' has no numeric '{key}'", self.name))
    }

    /// True for objects carrying every substance key.
    pub fn is_substance(&self) -> bool {
        SUBSTANCE_KEYS.iter().all(|k| self.properties.contains_key(*k))
    }

    pub fn substance_state(&self) -> Result<SubstanceState, String> {
        let t = self.real("temperature")?;
        let mp = self.real("meltingPoint")?;
        let bp = self.real("boilingPoint")?;
        if mp >= bp {
            return Err(format!("substance '{}' has meltingPoint {mp} not below boilingPoint {bp}", self.name));
        }
        Ok(SubstanceState::classify(t, mp, bp))
    }

    /// Name shown to the player: the phase name for substances, otherwise the
    /// declared identifier with underscores as spaces.
    pub fn display_name(&self) -> Result<String, String> {
        if self.is_substance() {
            let key = self.substance_state()?.name_key();
            match self.prop(key) {
                Some(PropertyValue::Text(s)) => Ok(s.clone()),
                _ => Err(format!("substance '{}' has no text '{key}'", self.name)),
            }
        } else {
            Ok(self.name.replace('_', " "))
        }
    }
}
