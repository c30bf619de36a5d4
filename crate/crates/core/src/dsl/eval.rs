//! Expression evaluation and effect application against a live [`GameState`].

use crate::dsl::ast::*;
use crate::engine::object::{coerce_reserved, GameObject, ObjectId, PropertyValue};
use crate::engine::{Game, GameState};

/// Variable bindings from action slots, tick binders, quantifiers, and `create`.
pub type Bindings = Vec<(String, ObjectId)>;

/// Runtime value; object references only exist inside expressions.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
    Obj(ObjectId),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Bool(_) => "boolean",
            Value::Int(_) => "integer",
            Value::Real(_) => "real",
            Value::Text(_) => "text",
            Value::Obj(_) => "object",
        }
    }

    fn into_property(self) -> Result<PropertyValue, String> {
        Ok(match self {
            Value::Bool(b) => PropertyValue::Bool(b),
            Value::Int(n) => PropertyValue::Int(n),
            Value::Real(x) => PropertyValue::Real(x),
            Value::Text(s) => PropertyValue::Text(s),
            Value::Obj(_) => return Err("an object reference cannot be stored in a property".into()),
        })
    }
}

impl From<&PropertyValue> for Value {
    fn from(p: &PropertyValue) -> Self {
        match p {
            PropertyValue::Bool(b) => Value::Bool(*b),
            PropertyValue::Int(n) => Value::Int(*n),
            PropertyValue::Real(x) => Value::Real(*x),
            PropertyValue::Text(s) => Value::Text(s.clone()),
        }
    }
}

/// Evaluates `expr` without touching the state. Object-valued results are an error.
pub fn eval_expr(game: &Game, state: &GameState, expr: &Expr, bindings: &Bindings) -> Result<PropertyValue, String> {
    let mut scope = bindings.clone();
    eval(game, state, expr, &mut scope)?.into_property()
}

pub(crate) fn eval_condition(game: &Game, state: &GameState, expr: &Expr, scope: &mut Bindings) -> Result<bool, String> {
    match eval(game, state, expr, scope)? {
        Value::Bool(b) => Ok(b),
        other => Err(format!("condition evaluated to {} instead of boolean", other.type_name())),
    }
}

pub(crate) fn resolve(state: &GameState, name: &str, scope: &Bindings) -> Result<ObjectId, String> {
    if let Some((_, id)) = scope.iter().rev().find(|(n, _)| n == name) {
        return if state.objects.contains_key(id) {
            Ok(*id)
        } else {
            Err(format!("object '{name}' was destroyed"))
        };
    }
    state.find_by_name(name).ok_or_else(|| format!("object '{name}' does not exist"))
}

fn object<'s>(state: &'s GameState, id: ObjectId) -> Result<&'s GameObject, String> {
    state.get(id).ok_or_else(|| format!("object {id} was destroyed"))
}

fn read_property(obj: &GameObject, property: &str) -> Result<Value, String> {
    match property {
        "name" => obj.display_name().map(Value::Text),
        "state" => obj.substance_state().map(|s| Value::Text(s.as_str().to_string())),
        _ => obj
            .prop(property)
            .map(Value::from)
            .ok_or_else(|| format!("object '{}' has no property '{property}'", obj.name)),
    }
}

fn eval(game: &Game, state: &GameState, expr: &Expr, scope: &mut Bindings) -> Result<Value, String> {
    match &expr.kind {
        ExprKind::Literal(lit) => Ok(Value::from(&PropertyValue::from(lit))),
        ExprKind::Ident(name) => resolve(state, name, scope).map(Value::Obj),
        ExprKind::Prop { object: name, property } => {
            let id = resolve(state, name, scope)?;
            read_property(object(state, id)?, property)
        }
        ExprKind::In { inner, outer } => {
            let a = resolve(state, inner, scope)?;
            let b = resolve(state, outer, scope)?;
            Ok(Value::Bool(state.is_inside(a, b)))
        }
        ExprKind::Quant { quantifier, var, class, body } => {
            let extent = game.class_extent(state, class);
            let want = *quantifier == Quantifier::Exists;
            for id in extent {
                scope.push((var.clone(), id));
                let r = eval_condition(game, state, body, scope);
                scope.pop();
                if r? == want {
                    return Ok(Value::Bool(want));
                }
            }
            Ok(Value::Bool(!want))
        }
        ExprKind::Not(inner) => match eval(game, state, inner, scope)? {
            Value::Bool(b) => Ok(Value::Bool(!b)),
            v => Err(format!("'not' applied to {}", v.type_name())),
        },
        ExprKind::Neg(inner) => match eval(game, state, inner, scope)? {
            Value::Int(n) => n.checked_neg().map(Value::Int).ok_or_else(|| "integer overflow".to_string()),
            Value::Real(x) => Ok(Value::Real(-x)),
            v => Err(format!("unary '-' applied to {}", v.type_name())),
        },
        ExprKind::Binary { op, lhs, rhs } => {
            let l = eval(game, state, lhs, scope)?;
            match op {
                BinOp::And | BinOp::Or => {
                    let Value::Bool(lb) = l else {
                        return Err(format!("'{}' applied to {}", op.symbol(), l.type_name()));
                    };
                    if (*op == BinOp::And && !lb) || (*op == BinOp::Or && lb) {
                        return Ok(Value::Bool(lb));
                    }
                    match eval(game, state, rhs, scope)? {
                        Value::Bool(rb) => Ok(Value::Bool(rb)),
                        v => Err(format!("'{}' applied to {}", op.symbol(), v.type_name())),
                    }
                }
                _ => {
                    let r = eval(game, state, rhs, scope)?;
                    binary(*op, l, r)
                }
            }
        }
    }
}

fn binary(op: BinOp, l: Value, r: Value) -> Result<Value, String> {
    use Value::*;
    let mismatch = |l: &Value, r: &Value| format!("'{}' cannot combine {} and {}", op.symbol(), l.type_name(), r.type_name());
    match op {
        BinOp::Eq | BinOp::Ne => {
            let eq = match (&l, &r) {
                (Int(a), Int(b)) => a == b,
                (Int(_) | Real(_), Int(_) | Real(_)) => as_f64(&l) == as_f64(&r),
                (Bool(a), Bool(b)) => a == b,
                (Text(a), Text(b)) => a == b,
                (Obj(a), Obj(b)) => a == b,
                _ => return Err(mismatch(&l, &r)),
            };
            Ok(Bool(if op == BinOp::Eq { eq } else { !eq }))
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let ord = match (&l, &r) {
                (Int(a), Int(b)) => a.partial_cmp(b),
                (Int(_) | Real(_), Int(_) | Real(_)) => as_f64(&l).partial_cmp(&as_f64(&r)),
                (Text(a), Text(b)) => a.partial_cmp(b),
                _ => return Err(mismatch(&l, &r)),
            }
            .ok_or("comparison with NaN")?;
            use std::cmp::Ordering::*;
            Ok(Bool(match op {
                BinOp::Lt => ord == Less,
                BinOp::Le => ord != Greater,
                BinOp::Gt => ord == Greater,
                _ => ord != Less,
            }))
        }
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => match (&l, &r) {
            (Int(a), Int(b)) => {
                let v = match op {
                    BinOp::Add => a.checked_add(*b),
                    BinOp::Sub => a.checked_sub(*b),
                    BinOp::Mul => a.checked_mul(*b),
                    _ if *b == 0 => return Err("division by zero".into()),
                    _ => a.checked_div(*b),
                };
                v.map(Int).ok_or_else(|| "integer overflow".into())
            }
            (Int(_) | Real(_), Int(_) | Real(_)) => {
                let (a, b) = (as_f64(&l), as_f64(&r));
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    _ if b == 0.0 => return Err("division by zero".into()),
                    _ => a / b,
                };
                Ok(Real(v))
            }
            _ => Err(mismatch(&l, &r)),
        },
        BinOp::And | BinOp::Or => unreachable!("handled with short-circuit"),
    }
}

fn as_f64(v: &Value) -> f64 {
    match v {
        Value::Int(n) => *n as f64,
        Value::Real(x) => *x,
        _ => f64::NAN,
    }
}

/// Applies `effects` in order. `say` output is appended to `messages`.
pub(crate) fn apply_effects(
    game: &Game,
    state: &mut GameState,
    effects: &[Effect],
    scope: &mut Bindings,
    messages: &mut Vec<String>,
) -> Result<(), String> {
    for effect in effects {
        match &effect.kind {
            EffectKind::Set { object: name, property, value } => {
                let id = resolve(state, name, scope)?;
                if matches!(property.as_str(), "name" | "state") {
                    return Err(format!("property '{property}' is derived and cannot be set"));
                }
                let v = eval(game, state, value, scope)?.into_property()?;
                let v = coerce_reserved(property, v)?;
                let obj = state.get_mut(id).ok_or_else(|| format!("object '{name}' was destroyed"))?;
                obj.properties.insert(property.clone(), v);
            }
            EffectKind::Move { object: name, dest } => {
                let id = resolve(state, name, scope)?;
                let dest_id = resolve(state, dest, scope)?;
                if !object(state, dest_id)?.flag("isContainer") {
                    return Err(format!("'{dest}' is not a container"));
                }
                state.move_object(id, dest_id).map_err(|e| format!("cannot move '{name}' to '{dest}': {e}"))?;
            }
            EffectKind::Create { name, class, container } => {
                let parent = resolve(state, container, scope)?;
                if !object(state, parent)?.flag("isContainer") {
                    return Err(format!("'{container}' is not a container"));
                }
                let properties = game.classes().default_props(class)?;
                let id = ObjectId(state.next_id);
                state.next_id += 1;
                state.objects.insert(
                    id,
                    GameObject {
                        id,
                        name: name.clone(),
                        class_name: class.clone(),
                        properties,
                        parent: Some(parent),
                        children: Vec::new(),
                    },
                );
                state.get_mut(parent).expect("resolved").children.push(id);
                scope.push((name.clone(), id));
            }
            EffectKind::Destroy { object: name } => {
                let id = resolve(state, name, scope)?;
                state.destroy(id).map_err(|e| format!("cannot destroy '{name}': {e}"))?;
            }
            EffectKind::AddScore(n) => {
                state.bonus = state.bonus.checked_add(*n).ok_or("score overflow")?;
            }
            EffectKind::Say(text) => messages.push(interpolate(state, text, scope)),
        }
    }
    Ok(())
}

/// Replaces `{name}` with the display name of the referenced object; unknown
/// references are left as written.
fn interpolate(state: &GameState, text: &str, scope: &Bindings) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        match after.find('}') {
            Some(end) => {
                let name = &after[..end];
                let shown = resolve(state, name, scope)
                    .ok()
                    .and_then(|id| state.get(id))
                    .and_then(|o| o.display_name().ok());
                match shown {
                    Some(s) => out.push_str(&s),
                    None => {
                        out.push('{');
                        out.push_str(name);
                        out.push('}');
                    }
                }
                rest = &after[end + 1..];
            }
            None => {
                out.push_str(&rest[start..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}
