//! Semantic checks run after parsing: names, classes, property types, and
//! action patterns.

use std::collections::{BTreeMap, HashSet};

use super::ast::*;
use super::Diagnostic;
use crate::engine::object::{reserved_kind, ReservedKind, SUBSTANCE_KEYS};
use crate::engine::{Builtin, ClassTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Bool,
    Num,
    Text,
    Obj,
    /// Unknown after an earlier error; never reported again.
    Any,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Bool => "boolean",
            Ty::Num => "number",
            Ty::Text => "text",
            Ty::Obj => "object",
            Ty::Any => "any",
        }
    }

    fn of_literal(lit: &Literal) -> Ty {
        match lit {
            Literal::Bool(_) => Ty::Bool,
            Literal::Int(_) | Literal::Real(_) => Ty::Num,
            Literal::Text(_) => Ty::Text,
        }
    }

    fn compatible(self, other: Ty) -> bool {
        self == Ty::Any || other == Ty::Any || self == other
    }
}

fn reserved_ty(key: &str) -> Option<Ty> {
    reserved_kind(key).map(|k| match k {
        ReservedKind::Bool => Ty::Bool,
        ReservedKind::Real => Ty::Num,
        ReservedKind::Text => Ty::Text,
    })
}

struct Checker<'a> {
    def: &'a GameDef,
    classes: ClassTable,
    globals: HashSet<&'a str>,
    props: BTreeMap<String, Ty>,
    diags: Vec<Diagnostic>,
}

/// Returns one diagnostic per violated rule, sorted by position. Diagnostics
/// carry no snippet; [`super::check`] adds them from the source.
pub fn validate(def: &GameDef) -> Vec<Diagnostic> {
    let mut c = Checker {
        def,
        classes: ClassTable::new(def),
        globals: HashSet::new(),
        props: BTreeMap::new(),
        diags: Vec::new(),
    };
    c.structure();
    c.class_decls();
    c.object_decls();
    c.collect_props();
    c.patterns();
    c.bodies();
    let mut diags = c.diags;
    diags.sort_by_key(|d| (d.line, d.column));
    diags
}

impl<'a> Checker<'a> {
    fn report(&mut self, span: Span, message: impl Into<String>) {
        self.diags.push(Diagnostic::at("", span, message));
    }

    fn class_known(&self, class: &str) -> bool {
        class != WORLD_CLASS && self.classes.contains(class)
    }

    fn need_class(&mut self, class: &str, span: Span) {
        if !self.class_known(class) {
            self.report(span, format!("unknown class '{class}'"));
        }
    }

    fn structure(&mut self) {
        let def = self.def;
        match def.tasks.as_slice() {
            [] => self.report(def.span, "missing task declaration"),
            [_, rest @ ..] => {
                for t in rest {
                    self.report(t.span, "duplicate task declaration; a game has exactly one task");
                }
            }
        }
        let rooms: Vec<&ObjectDecl> = def.objects.iter().filter(|o| o.container.is_none()).collect();
        match rooms.as_slice() {
            [] => self.report(def.span, "missing room declaration"),
            [_, rest @ ..] => {
                for r in rest {
                    self.report(r.span, "duplicate room declaration; a game has exactly one room");
                }
            }
        }
        if def.wins.is_empty() {
            self.report(def.span, "a game needs at least one win condition");
        }
        for w in &def.wins {
            if w.points < 0 {
                self.report(w.span, "win condition score must not be negative");
            }
        }
    }

    fn class_decls(&mut self) {
        let def = self.def;
        let mut seen = HashSet::new();
        for class in &def.classes {
            if BASE_CLASSES.contains(&class.name.as_str()) || class.name == WORLD_CLASS {
                self.report(class.span, format!("class '{}' redefines an engine base class", class.name));
                continue;
            }
            if !seen.insert(class.name.as_str()) {
                self.report(class.span, format!("duplicate class '{}'", class.name));
                continue;
            }
            for base in &class.bases {
                self.need_class(base, class.span);
            }
            if class.bases.iter().all(|b| self.class_known(b)) {
                if let Err(e) = self.classes.default_props(&class.name) {
                    self.report(class.span, e);
                    continue;
                }
            }
            self.literal_types(&class.props);
            if self.classes.is_a(&class.name, "Substance") {
                self.substance_props(&class.name, class.span);
            }
        }
    }

    fn substance_props(&mut self, class: &str, span: Span) {
        let Ok(props) = self.classes.default_props(class) else { return };
        let missing: Vec<&str> = SUBSTANCE_KEYS.iter().copied().filter(|k| !props.contains_key(*k)).collect();
        if !missing.is_empty() {
            self.report(span, format!("substance class '{class}' must declare {}", missing.join(", ")));
            return;
        }
        let melt = props["meltingPoint"].as_real();
        let boil = props["boilingPoint"].as_real();
        if let (Some(m), Some(b)) = (melt, boil) {
            if m >= b {
                self.report(span, format!("substance class '{class}' needs meltingPoint below boilingPoint"));
            }
        }
    }

    fn literal_types(&mut self, props: &[PropAssign]) {
        for p in props {
            if let Some(want) = reserved_ty(&p.key) {
                let got = Ty::of_literal(&p.value);
                if got != want {
                    self.report(
                        p.span,
                        format!("type mismatch: property '{}' is {} but was given {}", p.key, want.name(), got.name()),
                    );
                }
            }
            if matches!(p.key.as_str(), "name" | "state") {
                self.report(p.span, format!("property '{}' is derived and cannot be assigned", p.key));
            }
        }
    }

    fn object_decls(&mut self) {
        let def = self.def;
        let mut seen: HashSet<&str> = HashSet::from([AGENT_NAME]);
        for obj in &def.objects {
            if !seen.insert(obj.name.as_str()) {
                self.report(obj.span, format!("duplicate object name '{}'", obj.name));
            }
            if obj.container.is_some() {
                self.need_class(&obj.class, obj.span);
            }
            self.literal_types(&obj.props);
        }
        self.globals = seen;
        for (name, _) in def.created_names() {
            self.globals.insert(name);
        }
    }

    /// Records one type per user property; the first declaration fixes it.
    fn collect_props(&mut self) {
        let def = self.def;
        let assigns = def.classes.iter().flat_map(|c| c.props.iter()).chain(def.objects.iter().flat_map(|o| o.props.iter()));
        for p in assigns {
            let ty = reserved_ty(&p.key).unwrap_or_else(|| Ty::of_literal(&p.value));
            match self.props.get(&p.key) {
                None => {
                    self.props.insert(p.key.clone(), ty);
                }
                Some(prev) if !prev.compatible(ty) => {
                    let msg = format!("type mismatch: property '{}' is {} elsewhere but {} here", p.key, prev.name(), ty.name());
                    self.report(p.span, msg);
                }
                Some(_) => {}
            }
        }
        for (key, _) in crate::engine::object::RESERVED_KEYS {
            self.props.entry(key.to_string()).or_insert_with(|| reserved_ty(key).unwrap_or(Ty::Any));
        }
        // `set` may introduce properties; their type is whatever is assigned first.
        let effects: Vec<&Effect> = def
            .actions
            .iter()
            .flat_map(|a| a.effects.iter())
            .chain(def.tick_rules.iter().flat_map(|r| r.effects.iter()))
            .collect();
        for e in effects {
            if let EffectKind::Set { property, value, .. } = &e.kind {
                if !self.props.contains_key(property) {
                    let ty = match &value.kind {
                        ExprKind::Literal(l) => Ty::of_literal(l),
                        _ => Ty::Any,
                    };
                    self.props.insert(property.clone(), ty);
                }
            }
        }
    }

    fn patterns(&mut self) {
        let def = self.def;
        let mut seen: BTreeMap<String, String> = BTreeMap::new();
        for b in Builtin::ALL {
            let p = crate::dsl::parse_pattern(b.pattern()).expect("built-in pattern");
            seen.insert(p.skeleton(), format!("built-in action \"{}\"", b.pattern()));
        }
        for action in &def.actions {
            let skeleton = action.pattern.skeleton();
            if let Some(prev) = seen.get(&skeleton) {
                let msg = format!("duplicate pattern \"{}\" clashes with {prev}", action.pattern);
                self.report(action.span, msg);
            } else {
                seen.insert(skeleton, format!("action \"{}\"", action.pattern));
            }
            let mut slots = HashSet::new();
            for (name, class) in action.pattern.slots() {
                if !slots.insert(name) {
                    self.report(action.span, format!("duplicate slot '{name}' in pattern"));
                }
                self.need_class(class, action.span);
            }
        }
    }

    fn bodies(&mut self) {
        let def = self.def;
        for action in &def.actions {
            let mut scope: Vec<String> = action.pattern.slots().map(|(n, _)| n.to_string()).collect();
            if let Some(req) = &action.requires {
                self.condition(req, &mut scope, "requires");
            }
            self.effects(&action.effects, &mut scope);
        }
        for rule in &def.tick_rules {
            let mut scope = Vec::new();
            if let Some(b) = &rule.binder {
                self.need_class(&b.class, rule.span);
                scope.push(b.var.clone());
            }
            if let Some(cond) = &rule.condition {
                self.condition(cond, &mut scope, "when");
            }
            self.effects(&rule.effects, &mut scope);
        }
        for w in &def.wins {
            self.condition(&w.expr, &mut Vec::new(), "win");
        }
        for l in &def.loses {
            self.condition(&l.expr, &mut Vec::new(), "lose");
        }
    }

    fn condition(&mut self, expr: &Expr, scope: &mut Vec<String>, what: &str) {
        let ty = self.expr(expr, scope);
        if !ty.compatible(Ty::Bool) {
            self.report(expr.span, format!("type mismatch: {what} condition must be boolean, found {}", ty.name()));
        }
    }

    fn bound(&mut self, name: &str, scope: &[String], span: Span) -> bool {
        if scope.iter().any(|s| s == name) || self.globals.contains(name) {
            true
        } else {
            self.report(span, format!("unbound identifier '{name}'"));
            false
        }
    }

    fn effects(&mut self, effects: &[Effect], scope: &mut Vec<String>) {
        for e in effects {
            match &e.kind {
                EffectKind::Set { object, property, value } => {
                    self.bound(object, scope, e.span);
                    if matches!(property.as_str(), "name" | "state") {
                        self.report(e.span, format!("property '{property}' is derived and cannot be set"));
                    }
                    let got = self.expr(value, scope);
                    let want = self.props.get(property).copied().unwrap_or(Ty::Any);
                    if got == Ty::Obj || !want.compatible(got) {
                        let msg = format!("type mismatch: property '{property}' is {} but was given {}", want.name(), got.name());
                        self.report(value.span, msg);
                    }
                }
                EffectKind::Move { object, dest } => {
                    self.bound(object, scope, e.span);
                    self.bound(dest, scope, e.span);
                }
                EffectKind::Create { name, class, container } => {
                    self.need_class(class, e.span);
                    if class == "Substance" || self.classes.is_a(class, "Agent") {
                        self.report(e.span, format!("cannot create an instance of '{class}'"));
                    }
                    self.bound(container, scope, e.span);
                    scope.push(name.clone());
                }
                EffectKind::Destroy { object } => {
                    self.bound(object, scope, e.span);
                    if object == AGENT_NAME || Some(object.as_str()) == self.def.room().map(|r| r.name.as_str()) {
                        self.report(e.span, format!("'{object}' cannot be destroyed"));
                    }
                }
                EffectKind::AddScore(_) | EffectKind::Say(_) => {}
            }
        }
    }

    fn expr(&mut self, expr: &Expr, scope: &mut Vec<String>) -> Ty {
        match &expr.kind {
            ExprKind::Literal(l) => Ty::of_literal(l),
            ExprKind::Ident(name) => {
                if self.bound(name, scope, expr.span) {
                    Ty::Obj
                } else {
                    Ty::Any
                }
            }
            ExprKind::Prop { object, property } => {
                self.bound(object, scope, expr.span);
                match property.as_str() {
                    "name" | "state" => Ty::Text,
                    p => match self.props.get(p) {
                        Some(t) => *t,
                        None => {
                            self.report(expr.span, format!("unknown property '{p}'"));
                            Ty::Any
                        }
                    },
                }
            }
            ExprKind::In { inner, outer } => {
                self.bound(inner, scope, expr.span);
                self.bound(outer, scope, expr.span);
                Ty::Bool
            }
            ExprKind::Quant { var, class, body, .. } => {
                self.need_class(class, expr.span);
                scope.push(var.clone());
                let ty = self.expr(body, scope);
                scope.pop();
                if !ty.compatible(Ty::Bool) {
                    self.report(body.span, format!("type mismatch: quantifier body must be boolean, found {}", ty.name()));
                }
                Ty::Bool
            }
            ExprKind::Not(inner) => {
                let ty = self.expr(inner, scope);
                if !ty.compatible(Ty::Bool) {
                    self.report(expr.span, format!("type mismatch: 'not' needs a boolean, found {}", ty.name()));
                }
                Ty::Bool
            }
            ExprKind::Neg(inner) => {
                let ty = self.expr(inner, scope);
                if !ty.compatible(Ty::Num) {
                    self.report(expr.span, format!("type mismatch: '-' needs a number, found {}", ty.name()));
                }
                Ty::Num
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let (l, r) = (self.expr(lhs, scope), self.expr(rhs, scope));
                let sym = op.symbol();
                let mismatch = |l: Ty, r: Ty| format!("type mismatch: '{sym}' cannot combine {} and {}", l.name(), r.name());
                match op {
                    BinOp::And | BinOp::Or => {
                        if !l.compatible(Ty::Bool) || !r.compatible(Ty::Bool) {
                            self.report(expr.span, mismatch(l, r));
                        }
                        Ty::Bool
                    }
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        if !l.compatible(Ty::Num) || !r.compatible(Ty::Num) {
                            self.report(expr.span, mismatch(l, r));
                        }
                        Ty::Num
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if !l.compatible(r) {
                            self.report(expr.span, mismatch(l, r));
                        }
                        Ty::Bool
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        let ordered = |t: Ty| matches!(t, Ty::Num | Ty::Text | Ty::Any);
                        if !l.compatible(r) || !ordered(l) || !ordered(r) {
                            self.report(expr.span, mismatch(l, r));
                        }
                        Ty::Bool
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::dsl::check;

    fn messages(src: &str) -> Vec<String> {
        match check(src) {
            Ok(_) => Vec::new(),
            Err(d) => d.into_iter().map(|d| d.message).collect(),
        }
    }

    #[test]
    fn unknown_class_is_reported_once() {
        let src = "game \"g\" {\n task \"t\"\n room kitchen\n object pot : Pan in kitchen\n win true score 1\n}";
        let m = messages(src);
        assert_eq!(m, vec!["unknown class 'Pan'".to_string()]);
    }

    #[test]
    fn duplicate_pattern() {
        let src = "game \"g\" {\n task \"t\"\n room kitchen\n action \"stir\" { say \"a\" }\n action \"stir\" { say \"b\" }\n win true score 1\n}";
        let m = messages(src);
        assert_eq!(m.len(), 1);
        assert!(m[0].starts_with("duplicate pattern"), "{m:?}");
    }

    #[test]
    fn pattern_clashing_with_builtin() {
        let src = "game \"g\" {\n task \"t\"\n room kitchen\n class Jar : Container\n action \"open {j:Jar}\" { say \"a\" }\n win true score 1\n}";
        assert!(messages(src)[0].starts_with("duplicate pattern"));
    }

    #[test]
    fn type_mismatch_in_condition() {
        let src = "game \"g\" {\n task \"t\"\n room kitchen { temperature = 20 }\n win kitchen.temperature + true score 1\n}";
        let m = messages(src);
        assert!(m.iter().any(|m| m.starts_with("type mismatch")), "{m:?}");
    }

    #[test]
    fn structural_requirements() {
        let src = "game \"g\" {\n room kitchen\n}";
        let m = messages(src);
        assert!(m.contains(&"missing task declaration".to_string()));
        assert!(m.contains(&"a game needs at least one win condition".to_string()));
    }

    #[test]
    fn substance_keys_required() {
        let src = "game \"g\" {\n task \"t\"\n room kitchen\n class Goo : Substance { temperature = 1.0 }\n win true score 1\n}";
        let m = messages(src);
        assert!(m[0].contains("must declare"), "{m:?}");
    }

    #[test]
    fn unbound_and_unknown_property() {
        let src = "game \"g\" {\n task \"t\"\n room kitchen\n win ghost.isOpen and kitchen.colour == \"red\" score 1\n}";
        let m = messages(src);
        assert!(m.contains(&"unbound identifier 'ghost'".to_string()), "{m:?}");
        assert!(m.contains(&"unknown property 'colour'".to_string()), "{m:?}");
    }
}
