use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::Diagnostic;

const ITEM_KEYWORDS: [&str; 8] = ["task", "room", "class", "object", "action", "every", "win", "lose"];

/// Words that cannot name objects, classes, or variables.
pub const RESERVED_WORDS: [&str; 24] = [
    "game", "task", "room", "class", "object", "action", "every", "turn", "for", "when", "win", "lose",
    "score", "requires", "else", "set", "move", "to", "create", "destroy", "addscore", "say", "in", "exists",
];

pub(crate) fn is_reserved(word: &str) -> bool {
    RESERVED_WORDS.contains(&word) || matches!(word, "forall" | "not" | "and" | "or" | "true" | "false")
}

/// Parses a complete game definition. Diagnostics come back sorted by position.
pub fn parse(source: &str) -> Result<GameDef, Vec<Diagnostic>> {
    let tokens = tokenize(source)?;
    let mut p = Parser { src: source, tokens, pos: 0, diags: Vec::new() };
    let def = p.game();
    if p.diags.is_empty() {
        match def {
            Some(def) => Ok(def),
            None => Err(vec![Diagnostic::at(source, Span::new(1, 1), "empty game definition")]),
        }
    } else {
        let mut diags = p.diags;
        diags.sort_by_key(|d| (d.line, d.column));
        diags.dedup_by(|a, b| a.line == b.line && a.column == b.column && a.message == b.message);
        Err(diags)
    }
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, span: Span, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::at(self.src, span, msg)
    }

    fn unexpected(&self, expected: &str) -> Diagnostic {
        self.error(self.span(), format!("expected {expected}, found {}", self.peek().describe()))
    }

    fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    fn eat_word(&mut self, word: &str) -> bool {
        if self.is_word(word) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, word: &str) -> PResult<Span> {
        if self.is_word(word) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("'{word}'")))
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) if !is_reserved(&name) => {
                self.bump();
                Ok(name)
            }
            Tok::Ident(name) => Err(self.error(self.span(), format!("'{name}' is a reserved word and cannot be used as {what}"))),
            _ => Err(self.unexpected(what)),
        }
    }

    fn string(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(if negative { -n } else { n })
            }
            _ => Err(self.unexpected("an integer")),
        }
    }

    fn at_line_start(&self) -> bool {
        self.pos == 0 || self.tokens[self.pos - 1].span.line < self.tokens[self.pos].span.line
    }

    /// Skips to the next item keyword that starts a line.
    fn synchronize(&mut self) {
        if *self.peek() != Tok::Eof {
            self.bump();
        }
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::Ident(w) if ITEM_KEYWORDS.contains(&w.as_str()) && self.at_line_start() => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn game(&mut self) -> Option<GameDef> {
        let span = self.span();
        let header = (|| {
            self.expect_word("game")?;
            let name = self.string("a game name string")?;
            let open = self.expect(Tok::LBrace)?;
            Ok::<_, Diagnostic>((name, open))
        })();
        let (name, open) = match header {
            Ok(h) => h,
            Err(d) => {
                self.diags.push(d);
                return None;
            }
        };
        let mut def = GameDef {
            name,
            tasks: Vec::new(),
            classes: Vec::new(),
            objects: Vec::new(),
            actions: Vec::new(),
            tick_rules: Vec::new(),
            wins: Vec::new(),
            loses: Vec::new(),
            span,
        };
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Eof => {
                    if self.diags.is_empty() {
                        let d = self.error(open, "unclosed '{': the game block opened here is never closed");
                        self.diags.push(d);
                    }
                    return Some(def);
                }
                _ => {}
            }
            if let Err(d) = self.item(&mut def) {
                self.diags.push(d);
                self.synchronize();
            }
        }
        if *self.peek() != Tok::Eof && self.diags.is_empty() {
            let d = self.error(self.span(), format!("unexpected {} after the end of the game block", self.peek().describe()));
            self.diags.push(d);
        }
        Some(def)
    }

    fn item(&mut self, def: &mut GameDef) -> PResult<()> {
        let span = self.span();
        let word = match self.peek() {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.unexpected("a declaration (task, room, class, object, action, every, win, lose)")),
        };
        match word.as_str() {
            "task" => {
                self.bump();
                let text = self.string("a task description string")?;
                def.tasks.push(TaskDecl { text, span });
            }
            "room" => {
                self.bump();
                let name = self.ident("a room name")?;
                let props = self.opt_props()?;
                def.objects.push(ObjectDecl { name, class: WORLD_CLASS.to_string(), container: None, props, span });
            }
            "class" => {
                self.bump();
                let name = self.ident("a class name")?;
                self.expect(Tok::Colon)?;
                let mut bases = vec![self.ident("a base class name")?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    bases.push(self.ident("a base class name")?);
                }
                let props = self.opt_props()?;
                def.classes.push(ClassDecl { name, bases, props, span });
            }
            "object" => {
                self.bump();
                let name = self.ident("an object name")?;
                self.expect(Tok::Colon)?;
                let class = self.ident("a class name")?;
                self.expect_word("in")?;
                let container = self.ident("a container name")?;
                let props = self.opt_props()?;
                def.objects.push(ObjectDecl { name, class, container: Some(container), props, span });
            }
            "action" => {
                self.bump();
                let pat_span = self.span();
                let raw = self.string("an action pattern string")?;
                let pattern = parse_pattern(&raw).map_err(|m| self.error(pat_span, m))?;
                let mut requires = None;
                let mut failure = None;
                if self.eat_word("requires") {
                    requires = Some(self.expr()?);
                    if self.eat_word("else") {
                        failure = Some(self.string("a failure message string")?);
                    }
                }
                let effects = self.effect_block()?;
                def.actions.push(ActionDecl { pattern, requires, failure, effects, span });
            }
            "every" => {
                self.bump();
                self.expect_word("turn")?;
                let binder = if self.eat_word("for") {
                    let var = self.ident("a variable name")?;
                    self.expect(Tok::Colon)?;
                    let class = self.ident("a class name")?;
                    Some(Binder { var, class })
                } else {
                    None
                };
                let condition = if self.eat_word("when") { Some(self.expr()?) } else { None };
                let effects = self.effect_block()?;
                def.tick_rules.push(TickRule { binder, condition, effects, span });
            }
            "win" => {
                self.bump();
                let expr = self.expr()?;
                self.expect_word("score")?;
                let points = self.int()?;
                def.wins.push(WinCondition { expr, points, span });
            }
            "lose" => {
                self.bump();
                let expr = self.expr()?;
                def.loses.push(LoseCondition { expr, span });
            }
            _ => return Err(self.unexpected("a declaration (task, room, class, object, action, every, win, lose)")),
        }
        Ok(())
    }

    fn opt_props(&mut self) -> PResult<Vec<PropAssign>> {
        if *self.peek() != Tok::LBrace {
            return Ok(Vec::new());
        }
        let open = self.bump().span;
        let mut props = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(props);
                }
                Tok::Eof => return Err(self.error(open, "unclosed '{': property block opened here is never closed")),
                Tok::Comma => {
                    self.bump();
                }
                Tok::Ident(_) => {
                    let span = self.span();
                    let key = self.ident("a property name")?;
                    self.expect(Tok::Assign)?;
                    let value = self.literal()?;
                    props.push(PropAssign { key, value, span });
                }
                _ => return Err(self.unexpected(&format!("a property assignment or '}}' closing the block opened at line {}", open.line))),
            }
        }
    }

    fn literal(&mut self) -> PResult<Literal> {
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let lit = match self.peek().clone() {
            Tok::Int(n) => Literal::Int(if negative { -n } else { n }),
            Tok::Real(x) => Literal::Real(if negative { -x } else { x }),
            Tok::Str(s) if !negative => Literal::Text(s),
            Tok::Ident(w) if !negative && w == "true" => Literal::Bool(true),
            Tok::Ident(w) if !negative && w == "false" => Literal::Bool(false),
            _ => return Err(self.unexpected("a literal value (number, string, true, false)")),
        };
        self.bump();
        Ok(lit)
    }

    fn effect_block(&mut self) -> PResult<Vec<Effect>> {
        let open = self.expect(Tok::LBrace)?;
        let mut effects = Vec::new();
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    return Ok(effects);
                }
                Tok::Eof => return Err(self.error(open, "unclosed '{': effect block opened here is never closed")),
                _ => effects.push(self.effect(open)?),
            }
        }
    }

    fn effect(&mut self, open: Span) -> PResult<Effect> {
        let span = self.span();
        let word = match self.peek() {
            Tok::Ident(w) => w.clone(),
            _ => return Err(self.unexpected(&format!("an effect or '}}' closing the block opened at line {}", open.line))),
        };
        let kind = match word.as_str() {
            "set" => {
                self.bump();
                let object = self.ident("an object name")?;
                self.expect(Tok::Dot)?;
                let property = self.ident("a property name")?;
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                EffectKind::Set { object, property, value }
            }
            "move" => {
                self.bump();
                let object = self.ident("an object name")?;
                self.expect_word("to")?;
                let dest = self.ident("a container name")?;
                EffectKind::Move { object, dest }
            }
            "create" => {
                self.bump();
                let name = self.ident("an object name")?;
                self.expect(Tok::Colon)?;
                let class = self.ident("a class name")?;
                self.expect_word("in")?;
                let container = self.ident("a container name")?;
                EffectKind::Create { name, class, container }
            }
            "destroy" => {
                self.bump();
                EffectKind::Destroy { object: self.ident("an object name")? }
            }
            "addscore" => {
                self.bump();
                EffectKind::AddScore(self.int()?)
            }
            "say" => {
                self.bump();
                EffectKind::Say(self.string("a message string")?)
            }
            _ => {
                return Err(self.error(
                    span,
                    format!(
                        "expected an effect (set, move, create, destroy, addscore, say) or '}}' closing the block opened at line {}, found '{word}'",
                        open.line
                    ),
                ))
            }
        };
        Ok(Effect { kind, span })
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.is_word("or") {
            let span = self.bump().span;
            let rhs = self.and_expr()?;
            lhs = Expr::new(ExprKind::Binary { op: BinOp::Or, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.is_word("and") {
            let span = self.bump().span;
            let rhs = self.not_expr()?;
            lhs = Expr::new(ExprKind::Binary { op: BinOp::And, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span);
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.is_word("not") {
            let span = self.bump().span;
            let inner = self.not_expr()?;
            return Ok(Expr::new(ExprKind::Not(Box::new(inner)), span));
        }
        self.cmp_expr()
    }

    fn cmp_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::EqEq => BinOp::Eq,
            Tok::NotEq => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return None,
        })
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.sum_expr()?;
        let Some(op) = self.cmp_op() else { return Ok(lhs) };
        let span = self.bump().span;
        let rhs = self.sum_expr()?;
        if self.cmp_op().is_some() {
            return Err(self.error(self.span(), "comparisons cannot be chained; combine them with 'and'"));
        }
        Ok(Expr::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span))
    }

    fn sum_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.prod_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.prod_expr()?;
            lhs = Expr::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span);
        }
    }

    fn prod_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.bump().span;
            let rhs = self.unary_expr()?;
            lhs = Expr::new(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span);
        }
    }

    fn unary_expr(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            let span = self.bump().span;
            let inner = self.unary_expr()?;
            // Negative numeric literals fold so printing and re-parsing agree.
            return Ok(match inner.kind {
                ExprKind::Literal(Literal::Int(n)) => Expr::new(ExprKind::Literal(Literal::Int(-n)), span),
                ExprKind::Literal(Literal::Real(x)) => Expr::new(ExprKind::Literal(Literal::Real(-x)), span),
                _ => Expr::new(ExprKind::Neg(Box::new(inner)), span),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                ExprKind::Literal(Literal::Int(n))
            }
            Tok::Real(x) => {
                self.bump();
                ExprKind::Literal(Literal::Real(x))
            }
            Tok::Str(s) => {
                self.bump();
                ExprKind::Literal(Literal::Text(s))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen)?;
                return Ok(inner);
            }
            Tok::Ident(w) => match w.as_str() {
                "true" | "false" => {
                    self.bump();
                    ExprKind::Literal(Literal::Bool(w == "true"))
                }
                "in" if *self.peek_at(1) == Tok::LParen => {
                    self.bump();
                    self.bump();
                    let inner = self.ident("an object name")?;
                    self.expect(Tok::Comma)?;
                    let outer = self.ident("an object name")?;
                    self.expect(Tok::RParen)?;
                    ExprKind::In { inner, outer }
                }
                "exists" | "forall" => {
                    self.bump();
                    let quantifier = if w == "exists" { Quantifier::Exists } else { Quantifier::Forall };
                    let var = self.ident("a variable name")?;
                    self.expect(Tok::Colon)?;
                    let class = self.ident("a class name")?;
                    self.expect(Tok::LParen)?;
                    let body = self.expr()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::Quant { quantifier, var, class, body: Box::new(body) }
                }
                _ => {
                    let object = self.ident("an expression")?;
                    if *self.peek() == Tok::Dot {
                        self.bump();
                        let property = self.ident("a property name")?;
                        ExprKind::Prop { object, property }
                    } else {
                        ExprKind::Ident(object)
                    }
                }
            },
            _ => return Err(self.unexpected("an expression")),
        };
        Ok(Expr::new(kind, span))
    }
}

/// Splits `take {x:Thing} from {y:Box}` into literal and slot parts.
pub fn parse_pattern(raw: &str) -> Result<Pattern, String> {
    let mut parts = Vec::new();
    let mut text = String::new();
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                let mut slot = String::new();
                let mut closed = false;
                for c in chars.by_ref() {
                    if c == '}' {
                        closed = true;
                        break;
                    }
                    slot.push(c);
                }
                if !closed {
                    return Err(format!("unclosed slot in pattern \"{raw}\""));
                }
                let Some((name, class)) = slot.split_once(':') else {
                    return Err(format!("slot '{{{slot}}}' must have the form {{name:Class}}"));
                };
                let (name, class) = (name.trim(), class.trim());
                let valid = |s: &str| {
                    !s.is_empty()
                        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                        && !s.starts_with(|c: char| c.is_ascii_digit())
                };
                if !valid(name) || !valid(class) {
                    return Err(format!("slot '{{{slot}}}' must have the form {{name:Class}}"));
                }
                if !text.is_empty() {
                    parts.push(PatternPart::Text(std::mem::take(&mut text)));
                }
                parts.push(PatternPart::Slot { name: name.to_string(), class: class.to_string() });
            }
            '}' => return Err(format!("unmatched '}}' in pattern \"{raw}\"")),
            c => text.push(c),
        }
    }
    if !text.is_empty() {
        parts.push(PatternPart::Text(text));
    }
    if parts.iter().all(|p| matches!(p, PatternPart::Text(t) if t.trim().is_empty())) {
        return Err("action pattern is empty".to_string());
    }
    Ok(Pattern { parts })
}
