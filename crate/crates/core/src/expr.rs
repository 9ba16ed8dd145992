//! Total integer expression language used for mechanism bodies.
//!
//! Comparisons and logical connectives produce `0`/`1` so that every node
//! has the same integer type. Arithmetic is checked; an overflow is reported
//! as an error instead of wrapping.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::model::{Signature, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Max,
    Min,
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    /// `min` over truth values.
    And,
    /// `max` over truth values.
    Or,
}

impl BinOp {
    pub(crate) fn symbol(self) -> &'static str {
        match self {
            BinOp::Max => "max",
            BinOp::Min => "min",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&",
            BinOp::Or => "|",
        }
    }

    /// Binding strength for infix operators; `None` for the function-style
    /// `max`/`min`.
    pub(crate) fn precedence(self) -> Option<u8> {
        match self {
            BinOp::Or => Some(1),
            BinOp::And => Some(2),
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => Some(3),
            BinOp::Add | BinOp::Sub => Some(4),
            BinOp::Mul => Some(5),
            BinOp::Max | BinOp::Min => None,
        }
    }

    fn apply(self, a: i64, b: i64) -> Result<i64, EvalError> {
        let truth = |c: bool| i64::from(c);
        Ok(match self {
            BinOp::Max | BinOp::Or => a.max(b),
            BinOp::Min | BinOp::And => a.min(b),
            BinOp::Add => a.checked_add(b).ok_or(EvalError::Overflow)?,
            BinOp::Sub => a.checked_sub(b).ok_or(EvalError::Overflow)?,
            BinOp::Mul => a.checked_mul(b).ok_or(EvalError::Overflow)?,
            BinOp::Eq => truth(a == b),
            BinOp::Ne => truth(a != b),
            BinOp::Lt => truth(a < b),
            BinOp::Le => truth(a <= b),
            BinOp::Gt => truth(a > b),
            BinOp::Ge => truth(a >= b),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(i64),
    Var(VarId),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `1 - (e != 0)`.
    Not(Box<Expr>),
    /// Takes the `then` branch when the condition is nonzero.
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable #{} is not bound", .0.index())]
    Unbound(VarId),
    #[error("integer overflow")]
    Overflow,
}

/// A source of variable values for evaluation.
pub trait Env {
    fn value(&self, var: VarId) -> Option<i64>;
}

impl Env for [i64] {
    fn value(&self, var: VarId) -> Option<i64> {
        self.get(var.index()).copied()
    }
}

impl Env for Vec<i64> {
    fn value(&self, var: VarId) -> Option<i64> {
        self.as_slice().value(var)
    }
}

impl Env for [Option<i64>] {
    fn value(&self, var: VarId) -> Option<i64> {
        self.get(var.index()).copied().flatten()
    }
}

impl Env for HashMap<VarId, i64> {
    fn value(&self, var: VarId) -> Option<i64> {
        self.get(&var).copied()
    }
}

impl Env for BTreeMap<VarId, i64> {
    fn value(&self, var: VarId) -> Option<i64> {
        self.get(&var).copied()
    }
}

impl<E: Env + ?Sized> Env for &E {
    fn value(&self, var: VarId) -> Option<i64> {
        (**self).value(var)
    }
}

impl Expr {
    pub fn constant(value: i64) -> Self {
        Expr::Const(value)
    }

    pub fn var(var: VarId) -> Self {
        Expr::Var(var)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn max(lhs: Expr, rhs: Expr) -> Self {
        Self::binary(BinOp::Max, lhs, rhs)
    }

    pub fn min(lhs: Expr, rhs: Expr) -> Self {
        Self::binary(BinOp::Min, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(lhs: Expr, rhs: Expr) -> Self {
        Self::binary(BinOp::Add, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(lhs: Expr, rhs: Expr) -> Self {
        Self::binary(BinOp::Sub, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(lhs: Expr, rhs: Expr) -> Self {
        Self::binary(BinOp::Mul, lhs, rhs)
    }

    pub fn eq(lhs: Expr, rhs: Expr) -> Self {
        Self::binary(BinOp::Eq, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn if_then_else(cond: Expr, then: Expr, otherwise: Expr) -> Self {
        Expr::If(Box::new(cond), Box::new(then), Box::new(otherwise))
    }

    pub fn eval<E: Env + ?Sized>(&self, env: &E) -> Result<i64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => env.value(*v).ok_or(EvalError::Unbound(*v)),
            Expr::Binary(op, a, b) => op.apply(a.eval(env)?, b.eval(env)?),
            Expr::Not(e) => Ok(i64::from(e.eval(env)? == 0)),
            Expr::If(c, t, f) => {
                if c.eval(env)? != 0 {
                    t.eval(env)
                } else {
                    f.eval(env)
                }
            }
        }
    }

    /// Every variable referenced anywhere in the tree.
    pub fn free_variables(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Binary(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Not(e) => e.collect_vars(out),
            Expr::If(c, t, f) => {
                c.collect_vars(out);
                t.collect_vars(out);
                f.collect_vars(out);
            }
        }
    }

    /// Rewrites every variable reference through `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(VarId) -> Expr) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => f(*v),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.map_vars(f), b.map_vars(f)),
            Expr::Not(e) => Expr::not(e.map_vars(f)),
            Expr::If(c, t, e) => Expr::if_then_else(c.map_vars(f), t.map_vars(f), e.map_vars(f)),
        }
    }

    pub fn display<'a>(&'a self, signature: &'a Signature) -> ExprDisplay<'a> {
        ExprDisplay {
            expr: self,
            signature,
        }
    }
}

/// Free-function form of [`Expr::eval`].
pub fn eval_expression<E: Env + ?Sized>(expr: &Expr, env: &E) -> Result<i64, EvalError> {
    expr.eval(env)
}

/// Free-function form of [`Expr::free_variables`].
pub fn free_variables(expr: &Expr) -> BTreeSet<VarId> {
    expr.free_variables()
}

/// Renders an expression in the model-file syntax, with the minimum number
/// of parentheses needed to re-parse to the same tree.
pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    signature: &'a Signature,
}

impl ExprDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
        match e {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => match self.signature.try_name(*v) {
                Some(name) => f.write_str(name),
                None => write!(f, "#{}", v.index()),
            },
            Expr::Binary(op @ (BinOp::Max | BinOp::Min), a, b) => {
                // Left-nested chains print as one variadic call.
                let mut args = vec![b.as_ref()];
                let mut head = a.as_ref();
                while let Expr::Binary(inner, x, y) = head {
                    if inner != op {
                        break;
                    }
                    args.push(y);
                    head = x;
                }
                args.push(head);
                args.reverse();
                write!(f, "{}(", op.symbol())?;
                for (i, arg) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    self.write(f, arg, 0)?;
                }
                f.write_str(")")
            }
            Expr::Binary(op, a, b) => {
                let prec = op.precedence().unwrap_or(0);
                let paren = prec < min_prec;
                if paren {
                    f.write_str("(")?;
                }
                // Comparisons do not chain, so both operands bind tighter.
                let left_min = if prec == 3 { prec + 1 } else { prec };
                self.write(f, a, left_min)?;
                write!(f, " {} ", op.symbol())?;
                self.write(f, b, prec + 1)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Expr::Not(inner) => {
                f.write_str("!")?;
                self.write(f, inner, 6)
            }
            Expr::If(c, t, e) => {
                f.write_str("if(")?;
                self.write(f, c, 0)?;
                f.write_str(", ")?;
                self.write(f, t, 0)?;
                f.write_str(", ")?;
                self.write(f, e, 0)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.expr, 0)
    }
}
