//! Syntax tree for `.wg` game definitions.
//!
//! Every node carries a [`Span`] for diagnostics. Spans compare equal
//! unconditionally so that two trees parsed from differently formatted
//! sources are `==` when they describe the same game.

use std::fmt;

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Engine base classes every game may extend.
pub const BASE_CLASSES: [&str; 5] = ["GameObject", "Container", "Device", "Substance", "Agent"];

/// Class of the single room object, which is also the world root.
pub const WORLD_CLASS: &str = "World";

/// Name of the implicit player object.
pub const AGENT_NAME: &str = "agent";

#[derive(Clone, Debug, PartialEq)]
pub struct GameDef {
    pub name: String,
    pub tasks: Vec<TaskDecl>,
    pub classes: Vec<ClassDecl>,
    /// Includes the room declaration (the only object without a container).
    pub objects: Vec<ObjectDecl>,
    pub actions: Vec<ActionDecl>,
    pub tick_rules: Vec<TickRule>,
    pub wins: Vec<WinCondition>,
    pub loses: Vec<LoseCondition>,
    pub span: Span,
}

impl GameDef {
    /// Text of the first task declaration, or empty.
    pub fn task_text(&self) -> &str {
        self.tasks.first().map(|t| t.text.as_str()).unwrap_or("")
    }

    pub fn room(&self) -> Option<&ObjectDecl> {
        self.objects.iter().find(|o| o.container.is_none())
    }

    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    /// Names introduced by `create` effects anywhere in the game.
    pub fn created_names(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        let effects = self
            .actions
            .iter()
            .flat_map(|a| a.effects.iter())
            .chain(self.tick_rules.iter().flat_map(|r| r.effects.iter()));
        for e in effects {
            if let EffectKind::Create { name, class, .. } = &e.kind {
                out.push((name.as_str(), class.as_str()));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskDecl {
    pub text: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Literal {
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropAssign {
    pub key: String,
    pub value: Literal,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub bases: Vec<String>,
    pub props: Vec<PropAssign>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectDecl {
    pub name: String,
    pub class: String,
    /// `None` only for the room.
    pub container: Option<String>,
    pub props: Vec<PropAssign>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PatternPart {
    Text(String),
    Slot { name: String, class: String },
}

/// An action pattern such as `put {x:GameObject} in {y:Container}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    pub parts: Vec<PatternPart>,
}

impl Pattern {
    pub fn slots(&self) -> impl Iterator<Item = (&str, &str)> {
        self.parts.iter().filter_map(|p| match p {
            PatternPart::Slot { name, class } => Some((name.as_str(), class.as_str())),
            PatternPart::Text(_) => None,
        })
    }

    pub fn slot_count(&self) -> usize {
        self.slots().count()
    }

    /// Literal text before the first slot, or the whole pattern when slotless.
    pub fn verb(&self) -> String {
        let mut verb = String::new();
        for part in &self.parts {
            match part {
                PatternPart::Text(t) => verb.push_str(t),
                PatternPart::Slot { .. } => break,
            }
        }
        crate::engine::normalize_command(&verb)
    }

    /// Literal skeleton with slots replaced by `{}`; two patterns with equal
    /// skeletons can ground to the same command.
    pub fn skeleton(&self) -> String {
        let mut s = String::new();
        for part in &self.parts {
            match part {
                PatternPart::Text(t) => s.push_str(t),
                PatternPart::Slot { .. } => s.push_str(" {} "),
            }
        }
        crate::engine::normalize_command(&s)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for part in &self.parts {
            match part {
                PatternPart::Text(t) => f.write_str(t)?,
                PatternPart::Slot { name, class } => write!(f, "{{{name}:{class}}}")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionDecl {
    pub pattern: Pattern,
    pub requires: Option<Expr>,
    /// Observation when `requires` is false.
    pub failure: Option<String>,
    pub effects: Vec<Effect>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binder {
    pub var: String,
    pub class: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TickRule {
    pub binder: Option<Binder>,
    pub condition: Option<Expr>,
    pub effects: Vec<Effect>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WinCondition {
    pub expr: Expr,
    pub points: i64,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoseCondition {
    pub expr: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Effect {
    pub kind: EffectKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EffectKind {
    Set { object: String, property: String, value: Expr },
    Move { object: String, dest: String },
    Create { name: String, class: String, container: String },
    Destroy { object: String },
    AddScore(i64),
    Say(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

/// Precedence of prefix `not`, between `and` and the comparisons.
pub const NOT_PRECEDENCE: u8 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Literal(Literal),
    Ident(String),
    Prop { object: String, property: String },
    /// Transitive containment test `in(a, b)`.
    In { inner: String, outer: String },
    Quant { quantifier: Quantifier, var: String, class: String, body: Box<Expr> },
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Self { kind, span }
    }
}
