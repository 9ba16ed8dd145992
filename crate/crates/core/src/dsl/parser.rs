use std::collections::{BTreeSet, HashMap};

use super::lexer::{Pos, Tok, Token};
use super::{Diagnostic, DiagnosticKind};
use crate::expr::{BinOp, Expr};
use crate::model::{is_valid_identifier, Range, RangeError, Signature, VarDecl, VarId};
use crate::normality::Rank;
use crate::semantics::BoolFormula;

/// Largest number of values a single range may list or span.
pub const MAX_RANGE_VALUES: u64 = 4096;
/// Deepest nesting accepted in expressions and formulas.
pub const MAX_DEPTH: usize = 256;

pub(crate) struct Parser {
    toks: Vec<Token>,
    at: usize,
    depth: usize,
    /// Semantic problems found so far; parsing continues past them.
    pub(crate) semantic: Vec<Diagnostic>,
}

type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct ParsedDecl {
    pub decl: VarDecl,
    pub pos: Pos,
}

pub(crate) struct ParsedEquation {
    pub target: Option<VarId>,
    pub body: Expr,
    pub pos: Pos,
}

pub(crate) struct ParsedRanking {
    pub rules: Vec<(Vec<(VarId, i64)>, Rank)>,
    pub default: Rank,
}

pub(crate) struct ParsedModel {
    pub name: String,
    pub exogenous: Vec<ParsedDecl>,
    pub endogenous: Vec<ParsedDecl>,
    pub equations: Vec<ParsedEquation>,
    pub ranking: Option<ParsedRanking>,
}

pub(crate) fn syntax(pos: Pos, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        kind: DiagnosticKind::Syntax,
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

pub(crate) fn semantic(pos: Pos, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        kind: DiagnosticKind::Semantic,
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn comparison(op: BinOp) -> bool {
    matches!(op, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
}

impl Parser {
    pub(crate) fn new(toks: Vec<Token>) -> Self {
        Parser {
            toks,
            at: 0,
            depth: 0,
            semantic: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.at + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub(crate) fn here(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        syntax(self.here(), format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Pos> {
        if *self.peek() == tok {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> PResult<Pos> {
        if self.is_keyword(kw) {
            Ok(self.bump().pos)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.bump().pos;
                Ok((s, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected("end of input"))
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Semi | Tok::Comma) {
            self.bump();
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(syntax(self.here(), format!("nesting deeper than {MAX_DEPTH} levels")));
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    /// Optionally signed integer literal.
    pub(crate) fn integer(&mut self) -> PResult<i64> {
        let negative = self.eat(&Tok::Minus);
        let pos = self.here();
        let Tok::Int(n) = *self.peek() else {
            return Err(self.unexpected("an integer"));
        };
        self.bump();
        signed(n, negative).ok_or_else(|| syntax(pos, "integer literal out of range"))
    }

    // ---- model documents ----

    pub(crate) fn model(&mut self) -> PResult<ParsedModel> {
        self.keyword("model")?;
        let (name, name_pos) = self.ident("a model name")?;
        if !is_valid_identifier(&name) {
            self.semantic
                .push(semantic(name_pos, format!("`{name}` is not a valid model name")));
        }
        self.expect(Tok::LBrace)?;
        let mut scope: HashMap<String, (VarId, Pos)> = HashMap::new();
        let mut next_id = 0;
        self.keyword("exogenous")?;
        let exogenous = self.decl_block(&mut scope, &mut next_id)?;
        self.keyword("endogenous")?;
        let endogenous = self.decl_block(&mut scope, &mut next_id)?;
        let resolve: HashMap<String, VarId> = scope.iter().map(|(k, (v, _))| (k.clone(), *v)).collect();

        self.keyword("equations")?;
        self.expect(Tok::LBrace)?;
        let mut equations = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let (target_name, pos) = self.ident("an equation target or `}`")?;
            self.expect(Tok::Eq)?;
            let body = self.expr(&resolve)?;
            let target = resolve.get(&target_name).copied();
            if target.is_none() {
                self.semantic.push(semantic(
                    pos,
                    format!("equation for undeclared variable `{target_name}`"),
                ));
            }
            equations.push(ParsedEquation { target, body, pos });
            self.skip_separators();
        }
        self.expect(Tok::RBrace)?;

        let ranking = if self.is_keyword("ranking") {
            Some(self.ranking(&resolve, &exogenous, &endogenous)?)
        } else {
            None
        };
        self.expect(Tok::RBrace)?;
        self.expect_eof()?;
        Ok(ParsedModel {
            name,
            exogenous,
            endogenous,
            equations,
            ranking,
        })
    }

    fn decl_block(
        &mut self,
        scope: &mut HashMap<String, (VarId, Pos)>,
        next_id: &mut usize,
    ) -> PResult<Vec<ParsedDecl>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !matches!(self.peek(), Tok::RBrace | Tok::Eof) {
            let (name, pos) = self.ident("a variable name or `}`")?;
            self.expect(Tok::Colon)?;
            let range = self.range()?;
            if !is_valid_identifier(&name) {
                self.semantic.push(semantic(
                    pos,
                    format!("`{name}` is reserved or not a valid identifier"),
                ));
            }
            match scope.get(&name) {
                Some((_, first)) => self.semantic.push(semantic(
                    pos,
                    format!(
                        "duplicate identifier `{name}` (first declared at {}:{})",
                        first.line, first.column
                    ),
                )),
                None => {
                    scope.insert(name.clone(), (VarId::new(*next_id), pos));
                }
            }
            *next_id += 1;
            out.push(ParsedDecl {
                decl: VarDecl { name, range },
                pos,
            });
            self.skip_separators();
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    fn range(&mut self) -> PResult<Range> {
        let pos = self.expect(Tok::LBrace)?;
        let first = self.integer()?;
        let mut values = vec![first];
        if self.eat(&Tok::DotDot) {
            let last = self.integer()?;
            self.expect(Tok::RBrace)?;
            let span = (last as i128) - (first as i128) + 1;
            if span <= 0 {
                self.semantic.push(semantic(pos, format!("empty range {{{first}..{last}}}")));
                return Ok(Range::binary());
            }
            if span > MAX_RANGE_VALUES as i128 {
                self.semantic.push(semantic(
                    pos,
                    format!("range has {span} values, more than the limit of {MAX_RANGE_VALUES}"),
                ));
                return Ok(Range::binary());
            }
            return Ok(Range::interval(first, last).expect("nonempty interval"));
        }
        while self.eat(&Tok::Comma) {
            values.push(self.integer()?);
            if values.len() as u64 > MAX_RANGE_VALUES {
                return Err(syntax(
                    pos,
                    format!("range lists more than {MAX_RANGE_VALUES} values"),
                ));
            }
        }
        self.expect(Tok::RBrace)?;
        match Range::new(values) {
            Ok(r) => Ok(r),
            Err(RangeError::Duplicate(x)) => {
                self.semantic
                    .push(semantic(pos, format!("value {x} listed twice in range")));
                Ok(Range::binary())
            }
            Err(RangeError::Empty) => unreachable!("at least one value was read"),
        }
    }

    fn ranking(
        &mut self,
        resolve: &HashMap<String, VarId>,
        exogenous: &[ParsedDecl],
        endogenous: &[ParsedDecl],
    ) -> PResult<ParsedRanking> {
        self.keyword("ranking")?;
        self.expect(Tok::LBrace)?;
        let range_of = |v: VarId| {
            let i = v.index();
            if i < exogenous.len() {
                &exogenous[i].decl.range
            } else {
                &endogenous[i - exogenous.len()].decl.range
            }
        };
        let mut rules = Vec::new();
        while self.is_keyword("rule") {
            self.bump();
            let mut pattern = Vec::new();
            let mut seen = BTreeSet::new();
            loop {
                let (name, pos) = self.ident("a variable name")?;
                self.expect(Tok::Eq)?;
                let value = self.integer()?;
                match resolve.get(&name) {
                    None => self
                        .semantic
                        .push(semantic(pos, format!("unknown variable `{name}` in ranking rule"))),
                    Some(&v) => {
                        if !range_of(v).contains(value) {
                            self.semantic.push(semantic(
                                pos,
                                format!("value {value} is outside the range of `{name}`"),
                            ));
                        } else if !seen.insert(v) {
                            self.semantic.push(semantic(
                                pos,
                                format!("`{name}` appears twice in one ranking rule"),
                            ));
                        } else {
                            pattern.push((v, value));
                        }
                    }
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::FatArrow)?;
            let rank = self.rank()?;
            rules.push((pattern, rank));
            self.skip_separators();
        }
        self.keyword("default")
            .map_err(|_| self.unexpected("`rule` or `default`"))?;
        self.expect(Tok::FatArrow)?;
        let default = self.rank()?;
        self.skip_separators();
        self.expect(Tok::RBrace)?;
        Ok(ParsedRanking { rules, default })
    }

    fn rank(&mut self) -> PResult<Rank> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(Rank::Finite(n))
            }
            Tok::Ident(ref s) if s == "inf" => {
                self.bump();
                Ok(Rank::Infinite)
            }
            _ => Err(self.unexpected("a rank (natural number or `inf`)")),
        }
    }

    // ---- expressions ----

    pub(crate) fn expr(&mut self, scope: &HashMap<String, VarId>) -> PResult<Expr> {
        self.binary(scope, 0)
    }

    fn binary_op(&mut self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Pipe => BinOp::Or,
            Tok::Amp => BinOp::And,
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt | Tok::Arrow => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            _ => return None,
        })
    }

    /// Consumes the operator token. Inside expressions `<-` is `<` followed
    /// by a minus sign, so the token is split rather than consumed.
    fn consume_op(&mut self) {
        if *self.peek() == Tok::Arrow {
            let t = &mut self.toks[self.at];
            t.tok = Tok::Minus;
            t.pos.column += 1;
        } else {
            self.bump();
        }
    }

    fn binary(&mut self, scope: &HashMap<String, VarId>, min_prec: u8) -> PResult<Expr> {
        self.enter()?;
        let mut lhs = self.unary(scope)?;
        let mut compared = false;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence().expect("infix operator");
            if prec < min_prec {
                break;
            }
            if comparison(op) && compared {
                return Err(syntax(
                    self.here(),
                    "comparisons do not chain; add parentheses",
                ));
            }
            self.consume_op();
            let rhs = self.binary(scope, prec + 1)?;
            compared = comparison(op);
            lhs = Expr::binary(op, lhs, rhs);
        }
        self.leave();
        Ok(lhs)
    }

    fn unary(&mut self, scope: &HashMap<String, VarId>) -> PResult<Expr> {
        self.enter()?;
        let e = match self.peek() {
            Tok::Bang => {
                self.bump();
                Expr::not(self.unary(scope)?)
            }
            Tok::Minus => {
                if let Tok::Int(n) = *self.peek_at(1) {
                    let pos = self.bump().pos;
                    self.bump();
                    Expr::constant(signed(n, true).ok_or_else(|| syntax(pos, "integer literal out of range"))?)
                } else {
                    self.bump();
                    Expr::sub(Expr::constant(0), self.unary(scope)?)
                }
            }
            _ => self.primary(scope)?,
        };
        self.leave();
        Ok(e)
    }

    fn primary(&mut self, scope: &HashMap<String, VarId>) -> PResult<Expr> {
        let pos = self.here();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::constant(signed(n, false).ok_or_else(|| syntax(pos, "integer literal out of range"))?))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(scope)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => Ok(Expr::constant(1)),
                    "false" => Ok(Expr::constant(0)),
                    "max" | "min" => {
                        let op = if name == "max" { BinOp::Max } else { BinOp::Min };
                        self.expect(Tok::LParen)?;
                        let mut acc = self.expr(scope)?;
                        while self.eat(&Tok::Comma) {
                            let next = self.expr(scope)?;
                            acc = Expr::binary(op, acc, next);
                        }
                        self.expect(Tok::RParen)?;
                        Ok(acc)
                    }
                    "if" => {
                        self.expect(Tok::LParen)?;
                        let c = self.expr(scope)?;
                        self.expect(Tok::Comma)?;
                        let t = self.expr(scope)?;
                        self.expect(Tok::Comma)?;
                        let e = self.expr(scope)?;
                        self.expect(Tok::RParen)?;
                        Ok(Expr::if_then_else(c, t, e))
                    }
                    _ => match scope.get(&name) {
                        Some(&v) => Ok(Expr::var(v)),
                        None => {
                            self.semantic
                                .push(semantic(pos, format!("unknown variable `{name}`")));
                            Ok(Expr::constant(0))
                        }
                    },
                }
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    // ---- formulas over a signature ----

    /// `[X <- x, ...]` prefix; empty when absent.
    pub(crate) fn interventions(
        &mut self,
        sig: &Signature,
    ) -> PResult<Vec<(VarId, i64)>> {
        let mut out: Vec<(VarId, i64)> = Vec::new();
        if !self.eat(&Tok::LBracket) {
            return Ok(out);
        }
        if self.eat(&Tok::RBracket) {
            return Ok(out);
        }
        loop {
            let (name, pos) = self.ident("a variable name")?;
            self.expect(Tok::Arrow)?;
            let value = self.integer()?;
            if let Some(v) = self.resolve_setting(sig, &name, pos, value, false) {
                if out.iter().any(|(w, _)| *w == v) {
                    self.semantic.push(semantic(
                        pos,
                        format!("duplicate intervention variable `{name}`"),
                    ));
                } else {
                    out.push((v, value));
                }
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBracket)?;
        Ok(out)
    }

    /// Resolves `name = value`, recording a located semantic error and
    /// returning `None` when it is not acceptable.
    pub(crate) fn resolve_setting(
        &mut self,
        sig: &Signature,
        name: &str,
        pos: Pos,
        value: i64,
        allow_exogenous: bool,
    ) -> Option<VarId> {
        let Some(v) = sig.lookup(name) else {
            self.semantic
                .push(semantic(pos, format!("unknown variable `{name}`")));
            return None;
        };
        if !allow_exogenous && sig.is_exogenous(v) {
            self.semantic.push(semantic(
                pos,
                format!("`{name}` is exogenous; only endogenous variables are allowed here"),
            ));
            return None;
        }
        if !sig.range(v).contains(value) {
            self.semantic.push(semantic(
                pos,
                format!("value {value} is outside the range {} of `{name}`", sig.range(v)),
            ));
            return None;
        }
        Some(v)
    }

    pub(crate) fn formula(&mut self, sig: &Signature, allow_exogenous: bool) -> PResult<BoolFormula> {
        self.enter()?;
        let mut lhs = self.conjunction(sig, allow_exogenous)?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.conjunction(sig, allow_exogenous)?;
            lhs = BoolFormula::or(lhs, rhs);
        }
        self.leave();
        Ok(lhs)
    }

    fn conjunction(&mut self, sig: &Signature, allow_exogenous: bool) -> PResult<BoolFormula> {
        let mut lhs = self.formula_unary(sig, allow_exogenous)?;
        while self.eat(&Tok::Amp) {
            let rhs = self.formula_unary(sig, allow_exogenous)?;
            lhs = BoolFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    pub(crate) fn formula_unary(&mut self, sig: &Signature, allow_exogenous: bool) -> PResult<BoolFormula> {
        self.enter()?;
        let pos = self.here();
        let f = match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                BoolFormula::not(self.formula_unary(sig, allow_exogenous)?)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula(sig, allow_exogenous)?;
                self.expect(Tok::RParen)?;
                f
            }
            Tok::Ident(name) if name == "true" => {
                self.bump();
                BoolFormula::True
            }
            Tok::Ident(name) if name == "false" => {
                self.bump();
                BoolFormula::False
            }
            Tok::Ident(name) => {
                self.bump();
                let negated = match self.peek() {
                    Tok::Eq => false,
                    Tok::Ne => true,
                    _ => return Err(self.unexpected("`=` or `!=`")),
                };
                self.bump();
                let value = self.integer()?;
                let event = match self.resolve_setting(sig, &name, pos, value, allow_exogenous) {
                    Some(v) => BoolFormula::event(v, value),
                    None => BoolFormula::True,
                };
                if negated {
                    BoolFormula::not(event)
                } else {
                    event
                }
            }
            _ => return Err(self.unexpected("a formula")),
        };
        self.leave();
        Ok(f)
    }

    /// `X = x` items separated by `,` or `&`.
    pub(crate) fn assignments(
        &mut self,
        sig: &Signature,
        allow_exogenous: bool,
    ) -> PResult<Vec<(VarId, i64, Pos)>> {
        let mut out: Vec<(VarId, i64, Pos)> = Vec::new();
        loop {
            let (name, pos) = self.ident("a variable name")?;
            self.expect(Tok::Eq)?;
            let value = self.integer()?;
            if let Some(v) = self.resolve_setting(sig, &name, pos, value, allow_exogenous) {
                if out.iter().any(|(w, _, _)| *w == v) {
                    self.semantic
                        .push(semantic(pos, format!("`{name}` is assigned more than once")));
                } else {
                    out.push((v, value, pos));
                }
            }
            if !(self.eat(&Tok::Comma) || self.eat(&Tok::Amp)) {
                break;
            }
        }
        Ok(out)
    }
}

fn signed(n: u64, negative: bool) -> Option<i64> {
    if negative {
        0i64.checked_sub_unsigned(n)
    } else {
        i64::try_from(n).ok()
    }
}
