//! Canonical source rendering. `parse(print(def)) == def` for every parsed `def`.

use std::fmt::Write;

use super::ast::*;

pub fn print(def: &GameDef) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "game {} {{", quote(&def.name));
    for task in &def.tasks {
        let _ = writeln!(out, "  task {}", quote(&task.text));
    }
    for obj in def.objects.iter().filter(|o| o.container.is_none()) {
        let _ = writeln!(out, "  room {}{}", obj.name, props(&obj.props));
    }
    if !def.classes.is_empty() {
        out.push('\n');
    }
    for class in &def.classes {
        let _ = writeln!(out, "  class {} : {}{}", class.name, class.bases.join(", "), props(&class.props));
    }
    let placed: Vec<_> = def.objects.iter().filter(|o| o.container.is_some()).collect();
    if !placed.is_empty() {
        out.push('\n');
    }
    for obj in placed {
        let container = obj.container.as_deref().unwrap_or_default();
        let _ = writeln!(out, "  object {} : {} in {}{}", obj.name, obj.class, container, props(&obj.props));
    }
    for action in &def.actions {
        out.push('\n');
        let _ = write!(out, "  action {}", quote(&action.pattern.to_string()));
        if let Some(req) = &action.requires {
            let _ = write!(out, "\n    requires {}", expr(req));
            if let Some(msg) = &action.failure {
                let _ = write!(out, "\n    else {}", quote(msg));
            }
        }
        out.push(' ');
        effects(&mut out, &action.effects);
    }
    for rule in &def.tick_rules {
        out.push('\n');
        out.push_str("  every turn");
        if let Some(b) = &rule.binder {
            let _ = write!(out, " for {} : {}", b.var, b.class);
        }
        if let Some(cond) = &rule.condition {
            let _ = write!(out, " when {}", expr(cond));
        }
        out.push(' ');
        effects(&mut out, &rule.effects);
    }
    if !def.wins.is_empty() || !def.loses.is_empty() {
        out.push('\n');
    }
    for win in &def.wins {
        let _ = writeln!(out, "  win {} score {}", expr(&win.expr), win.points);
    }
    for lose in &def.loses {
        let _ = writeln!(out, "  lose {}", expr(&lose.expr));
    }
    out.push_str("}\n");
    out
}

fn effects(out: &mut String, effects: &[Effect]) {
    out.push_str("{\n");
    for e in effects {
        out.push_str("    ");
        match &e.kind {
            EffectKind::Set { object, property, value } => {
                let _ = write!(out, "set {object}.{property} = {}", expr(value));
            }
            EffectKind::Move { object, dest } => {
                let _ = write!(out, "move {object} to {dest}");
            }
            EffectKind::Create { name, class, container } => {
                let _ = write!(out, "create {name} : {class} in {container}");
            }
            EffectKind::Destroy { object } => {
                let _ = write!(out, "destroy {object}");
            }
            EffectKind::AddScore(n) => {
                let _ = write!(out, "addscore {n}");
            }
            EffectKind::Say(text) => {
                let _ = write!(out, "say {}", quote(text));
            }
        }
        out.push('\n');
    }
    out.push_str("  }\n");
}

fn props(props: &[PropAssign]) -> String {
    if props.is_empty() {
        return String::new();
    }
    let body: Vec<String> = props.iter().map(|p| format!("{} = {}", p.key, literal(&p.value))).collect();
    format!(" {{ {} }}", body.join(", "))
}

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn literal(lit: &Literal) -> String {
    match lit {
        Literal::Bool(b) => b.to_string(),
        Literal::Int(n) => n.to_string(),
        Literal::Real(x) => format_real(*x),
        Literal::Text(s) => quote(s),
    }
}

/// Always renders with a fractional part or exponent so the lexer reads it back as real.
pub fn format_real(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || !x.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Literal(lit) => literal(lit),
        ExprKind::Ident(name) => name.clone(),
        ExprKind::Prop { object, property } => format!("{object}.{property}"),
        ExprKind::In { inner, outer } => format!("in({inner}, {outer})"),
        ExprKind::Quant { quantifier, var, class, body } => {
            let q = match quantifier {
                Quantifier::Exists => "exists",
                Quantifier::Forall => "forall",
            };
            format!("{q} {var} : {class} ({})", expr(body))
        }
        ExprKind::Not(inner) => {
            let needs = matches!(&inner.kind, ExprKind::Binary { op, .. } if op.precedence() < NOT_PRECEDENCE);
            format!("not {}", wrap(inner, needs))
        }
        ExprKind::Neg(inner) => {
            let needs = matches!(inner.kind, ExprKind::Binary { .. } | ExprKind::Not(_));
            format!("-{}", wrap(inner, needs))
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let child_prec = |c: &Expr| match &c.kind {
                ExprKind::Binary { op, .. } => Some(op.precedence()),
                ExprKind::Not(_) => Some(NOT_PRECEDENCE),
                _ => None,
            };
            let left_needs = child_prec(lhs).is_some_and(|p| p < prec || (p == prec && op.is_comparison()));
            let right_needs = child_prec(rhs).is_some_and(|p| p <= prec);
            format!("{} {} {}", wrap(lhs, left_needs), op.symbol(), wrap(rhs, right_needs))
        }
    }
}

fn wrap(e: &Expr, parens: bool) -> String {
    if parens {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}
