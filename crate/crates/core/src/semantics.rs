//! Solutions of acyclic models, intervention surgery and the satisfaction
//! relation for causal formulas.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::expr::Expr;
use crate::model::{advance, CausalModel, Signature, VarId};

/// Default bound on enumerated spaces (contexts, worlds).
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{0}` is exogenous; only endogenous variables can be intervened on or tested")]
    ExogenousVariable(String),
    #[error("value {value} is outside the range of `{var}`")]
    OutOfRange { var: String, value: i64 },
    #[error("variable `{0}` is assigned more than once")]
    DuplicateVariable(String),
    #[error("context is missing exogenous variable(s): {}", .0.join(", "))]
    MissingContext(Vec<String>),
    #[error("`{0}` is not exogenous and cannot appear in a context")]
    NotExogenous(String),
    #[error("context has {found} values but the model has {expected} exogenous variables")]
    ContextArity { expected: usize, found: usize },
    #[error("{what} has {size} elements, more than the cap of {cap}")]
    TooLarge { what: &'static str, size: u128, cap: u64 },
}

/// A total in-range setting of the exogenous variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Context(Vec<i64>);

impl Context {
    /// Values listed in exogenous declaration order.
    pub fn new(sig: &Signature, values: Vec<i64>) -> Result<Self, SemanticsError> {
        if values.len() != sig.exogenous().len() {
            let missing = sig.exogenous()[values.len().min(sig.exogenous().len())..]
                .iter()
                .map(|d| d.name.clone())
                .collect::<Vec<_>>();
            if !missing.is_empty() {
                return Err(SemanticsError::MissingContext(missing));
            }
            return Err(SemanticsError::ContextArity {
                expected: sig.exogenous().len(),
                found: values.len(),
            });
        }
        for (id, v) in sig.exogenous_ids().zip(&values) {
            if !sig.range(id).contains(*v) {
                return Err(SemanticsError::OutOfRange {
                    var: sig.name(id).to_owned(),
                    value: *v,
                });
            }
        }
        Ok(Context(values))
    }

    /// Builds a context from `name = value` pairs, which must cover every
    /// exogenous variable exactly once.
    pub fn from_pairs<S: AsRef<str>>(
        sig: &Signature,
        pairs: &[(S, i64)],
    ) -> Result<Self, SemanticsError> {
        let mut values = vec![None; sig.exogenous().len()];
        for (name, value) in pairs {
            let name = name.as_ref();
            let id = sig
                .lookup(name)
                .ok_or_else(|| SemanticsError::UnknownVariable(name.to_owned()))?;
            if !sig.is_exogenous(id) {
                return Err(SemanticsError::NotExogenous(name.to_owned()));
            }
            if values[id.index()].is_some() {
                return Err(SemanticsError::DuplicateVariable(name.to_owned()));
            }
            if !sig.range(id).contains(*value) {
                return Err(SemanticsError::OutOfRange {
                    var: name.to_owned(),
                    value: *value,
                });
            }
            values[id.index()] = Some(*value);
        }
        let missing: Vec<String> = sig
            .exogenous_ids()
            .filter(|id| values[id.index()].is_none())
            .map(|id| sig.name(id).to_owned())
            .collect();
        if !missing.is_empty() {
            return Err(SemanticsError::MissingContext(missing));
        }
        Ok(Context(values.into_iter().map(Option::unwrap).collect()))
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn get(&self, var: VarId) -> i64 {
        self.0[var.index()]
    }

    /// Every context of the signature, in lexicographic order.
    pub fn enumerate(sig: &Signature, cap: u64) -> Result<Vec<Context>, SemanticsError> {
        let size = sig
            .exogenous()
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d.range.len() as u128));
        if size > u128::from(cap) {
            return Err(SemanticsError::TooLarge {
                what: "context space",
                size,
                cap,
            });
        }
        let ranges: Vec<&[i64]> = sig.exogenous().iter().map(|d| d.range.values()).collect();
        let mut digits = vec![0usize; ranges.len()];
        let mut out = Vec::with_capacity(size as usize);
        loop {
            out.push(Context(
                digits.iter().zip(&ranges).map(|(d, r)| r[*d]).collect(),
            ));
            if !advance(&mut digits, |i| ranges[i].len()) {
                return Ok(out);
            }
        }
    }
}

/// A total assignment to every variable of a signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct World(Vec<i64>);

impl World {
    pub fn from_values(values: Vec<i64>) -> Self {
        World(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn get(&self, var: VarId) -> i64 {
        self.0[var.index()]
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        struct D<'a>(&'a World, &'a Signature);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                for (i, id) in self.1.ids().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}={}", self.1.name(id), self.0.get(id))?;
                }
                Ok(())
            }
        }
        D(self, sig)
    }
}

impl crate::expr::Env for World {
    fn value(&self, var: VarId) -> Option<i64> {
        self.0.get(var.index()).copied()
    }
}

/// Boolean combination of primitive events `X = x`.
///
/// The variable type is generic so a formula can be written against names and
/// resolved against each model's signature separately.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolFormula<V = VarId> {
    True,
    False,
    Event(V, i64),
    Not(Box<BoolFormula<V>>),
    And(Box<BoolFormula<V>>, Box<BoolFormula<V>>),
    Or(Box<BoolFormula<V>>, Box<BoolFormula<V>>),
}

impl<V> BoolFormula<V> {
    pub fn event(var: V, value: i64) -> Self {
        BoolFormula::Event(var, value)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        BoolFormula::Not(Box::new(f))
    }

    pub fn and(a: Self, b: Self) -> Self {
        BoolFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Self, b: Self) -> Self {
        BoolFormula::Or(Box::new(a), Box::new(b))
    }

    /// Conjunction of all events; `True` when empty.
    pub fn conjunction(events: impl IntoIterator<Item = (V, i64)>) -> Self {
        events
            .into_iter()
            .map(|(v, x)| BoolFormula::Event(v, x))
            .reduce(BoolFormula::and)
            .unwrap_or(BoolFormula::True)
    }

    pub fn try_map_vars<W, E>(&self, f: &mut impl FnMut(&V) -> Result<W, E>) -> Result<BoolFormula<W>, E> {
        Ok(match self {
            BoolFormula::True => BoolFormula::True,
            BoolFormula::False => BoolFormula::False,
            BoolFormula::Event(v, x) => BoolFormula::Event(f(v)?, *x),
            BoolFormula::Not(a) => BoolFormula::not(a.try_map_vars(f)?),
            BoolFormula::And(a, b) => BoolFormula::and(a.try_map_vars(f)?, b.try_map_vars(f)?),
            BoolFormula::Or(a, b) => BoolFormula::or(a.try_map_vars(f)?, b.try_map_vars(f)?),
        })
    }

    pub fn evaluate(&self, value_of: &impl Fn(&V) -> i64) -> bool {
        match self {
            BoolFormula::True => true,
            BoolFormula::False => false,
            BoolFormula::Event(v, x) => value_of(v) == *x,
            BoolFormula::Not(a) => !a.evaluate(value_of),
            BoolFormula::And(a, b) => a.evaluate(value_of) && b.evaluate(value_of),
            BoolFormula::Or(a, b) => a.evaluate(value_of) || b.evaluate(value_of),
        }
    }

    fn visit_vars<'a>(&'a self, out: &mut impl FnMut(&'a V)) {
        match self {
            BoolFormula::True | BoolFormula::False => {}
            BoolFormula::Event(v, _) => out(v),
            BoolFormula::Not(a) => a.visit_vars(out),
            BoolFormula::And(a, b) | BoolFormula::Or(a, b) => {
                a.visit_vars(out);
                b.visit_vars(out);
            }
        }
    }
}

impl BoolFormula<VarId> {
    pub fn holds_in(&self, world: &[i64]) -> bool {
        self.evaluate(&|v: &VarId| world[v.index()])
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.visit_vars(&mut |v| {
            out.insert(*v);
        });
        out
    }

    /// Checks that every leaf names an endogenous variable and an in-range
    /// value.
    pub fn check(&self, sig: &Signature) -> Result<(), SemanticsError> {
        let mut result = Ok(());
        self.visit_events(&mut |v, x| {
            if result.is_err() {
                return;
            }
            result = check_endogenous_value(sig, v, x);
        });
        result
    }

    /// Like [`check`](Self::check) but allows exogenous leaves, as needed for
    /// statements about arbitrary worlds.
    pub fn check_any(&self, sig: &Signature) -> Result<(), SemanticsError> {
        let mut result = Ok(());
        self.visit_events(&mut |v, x| {
            if result.is_err() {
                return;
            }
            result = check_value(sig, v, x);
        });
        result
    }

    fn visit_events(&self, out: &mut impl FnMut(VarId, i64)) {
        match self {
            BoolFormula::True | BoolFormula::False => {}
            BoolFormula::Event(v, x) => out(*v, *x),
            BoolFormula::Not(a) => a.visit_events(out),
            BoolFormula::And(a, b) | BoolFormula::Or(a, b) => {
                a.visit_events(out);
                b.visit_events(out);
            }
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> FormulaDisplay<'a> {
        FormulaDisplay { formula: self, sig }
    }
}

impl BoolFormula<String> {
    pub fn resolve(&self, sig: &Signature) -> Result<BoolFormula<VarId>, SemanticsError> {
        let f = self.try_map_vars(&mut |name: &String| {
            sig.lookup(name)
                .ok_or_else(|| SemanticsError::UnknownVariable(name.clone()))
        })?;
        f.check(sig)?;
        Ok(f)
    }

    pub fn variable_names(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit_vars(&mut |v: &String| {
            if !out.contains(v) {
                out.push(v.clone());
            }
        });
        out
    }
}

pub(crate) fn check_value(sig: &Signature, var: VarId, value: i64) -> Result<(), SemanticsError> {
    let name = sig
        .try_name(var)
        .ok_or_else(|| SemanticsError::UnknownVariable(format!("#{}", var.index())))?;
    if !sig.range(var).contains(value) {
        return Err(SemanticsError::OutOfRange {
            var: name.to_owned(),
            value,
        });
    }
    Ok(())
}

pub(crate) fn check_endogenous_value(
    sig: &Signature,
    var: VarId,
    value: i64,
) -> Result<(), SemanticsError> {
    check_value(sig, var, value)?;
    if sig.is_exogenous(var) {
        return Err(SemanticsError::ExogenousVariable(sig.name(var).to_owned()));
    }
    Ok(())
}

/// Checks a list of `(variable, value)` settings: endogenous, in range,
/// pairwise distinct variables.
pub(crate) fn check_settings(
    sig: &Signature,
    settings: &[(VarId, i64)],
) -> Result<(), SemanticsError> {
    let mut seen = BTreeSet::new();
    for (v, x) in settings {
        check_endogenous_value(sig, *v, *x)?;
        if !seen.insert(*v) {
            return Err(SemanticsError::DuplicateVariable(sig.name(*v).to_owned()));
        }
    }
    Ok(())
}

pub struct FormulaDisplay<'a> {
    formula: &'a BoolFormula<VarId>,
    sig: &'a Signature,
}

impl FormulaDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, node: &BoolFormula<VarId>, min_prec: u8) -> fmt::Result {
        let (prec, paren) = match node {
            BoolFormula::Or(..) => (1, min_prec > 1),
            BoolFormula::And(..) => (2, min_prec > 2),
            _ => (3, false),
        };
        if paren {
            f.write_str("(")?;
        }
        match node {
            BoolFormula::True => f.write_str("true")?,
            BoolFormula::False => f.write_str("false")?,
            BoolFormula::Event(v, x) => write!(f, "{}={}", self.sig.name(*v), x)?,
            BoolFormula::Not(a) => {
                f.write_str("!")?;
                match a.as_ref() {
                    BoolFormula::And(..) | BoolFormula::Or(..) | BoolFormula::Event(..) => {
                        f.write_str("(")?;
                        self.write(f, a, 0)?;
                        f.write_str(")")?;
                    }
                    _ => self.write(f, a, 3)?,
                }
            }
            BoolFormula::And(a, b) | BoolFormula::Or(a, b) => {
                let op = if matches!(node, BoolFormula::And(..)) { " & " } else { " | " };
                self.write(f, a, prec)?;
                f.write_str(op)?;
                self.write(f, b, prec + 1)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.formula, 0)
    }
}

/// `[Y1 <- y1, ..., Yk <- yk] body`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CausalFormula {
    pub interventions: Vec<(VarId, i64)>,
    pub body: BoolFormula<VarId>,
}

impl CausalFormula {
    pub fn new(interventions: Vec<(VarId, i64)>, body: BoolFormula<VarId>) -> Self {
        CausalFormula {
            interventions,
            body,
        }
    }

    pub fn plain(body: BoolFormula<VarId>) -> Self {
        CausalFormula::new(Vec::new(), body)
    }

    pub fn check(&self, sig: &Signature) -> Result<(), SemanticsError> {
        check_settings(sig, &self.interventions)?;
        self.body.check(sig)
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        struct D<'a>(&'a CausalFormula, &'a Signature);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                if !self.0.interventions.is_empty() {
                    f.write_str("[")?;
                    for (i, (v, x)) in self.0.interventions.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{}<-{}", self.1.name(*v), x)?;
                    }
                    f.write_str("](")?;
                    write!(f, "{}", self.0.body.display(self.1))?;
                    return f.write_str(")");
                }
                write!(f, "{}", self.0.body.display(self.1))
            }
        }
        D(self, sig)
    }
}

/// `M_{X <- x}`: each listed variable's mechanism becomes the constant it is
/// set to. The original model is untouched.
pub fn intervene(model: &CausalModel, settings: &[(VarId, i64)]) -> Result<CausalModel, SemanticsError> {
    let sig = model.signature();
    check_settings(sig, settings)?;
    if settings.is_empty() {
        return Ok(model.clone());
    }
    let mut bodies = model.mechanism_bodies().to_vec();
    for (v, x) in settings {
        bodies[sig.endogenous_offset(*v).unwrap()] = Expr::Const(*x);
    }
    Ok(model.with_mechanisms(bodies))
}

/// Reusable evaluator for repeated solving of one model under varying
/// interventions without rebuilding the model.
#[derive(Debug, Clone)]
pub struct Solver<'m> {
    model: &'m CausalModel,
}

impl<'m> Solver<'m> {
    pub fn new(model: &'m CausalModel) -> Self {
        Solver { model }
    }

    pub fn model(&self) -> &'m CausalModel {
        self.model
    }

    /// Solves with `overrides[v]` (indexed by [`VarId`]) replacing the
    /// mechanism of every variable that has one. Overrides are trusted to be
    /// in range and on endogenous variables.
    pub fn solve_into(&self, context: &Context, overrides: &[Option<i64>], out: &mut Vec<i64>) {
        let sig = self.model.signature();
        out.clear();
        out.extend_from_slice(context.values());
        out.resize(sig.len(), 0);
        for &v in self.model.topological_order() {
            out[v.index()] = match overrides.get(v.index()).copied().flatten() {
                Some(x) => x,
                None => self
                    .model
                    .mechanism(v)
                    .eval(out.as_slice())
                    .expect("validated mechanisms are total over their inputs"),
            };
        }
    }

    pub fn solve(&self, context: &Context, overrides: &[Option<i64>]) -> World {
        let mut out = Vec::new();
        self.solve_into(context, overrides, &mut out);
        World(out)
    }
}

/// The unique world that extends `context` and satisfies every mechanism.
pub fn solve(model: &CausalModel, context: &Context) -> World {
    Solver::new(model).solve(context, &[])
}

/// Reference implementation of [`solve`]: enumerates every endogenous
/// assignment and keeps those that are fixed points of all mechanisms.
/// Exponential; intended for cross-checking on small models.
pub fn solve_by_enumeration(
    model: &CausalModel,
    context: &Context,
    cap: u64,
) -> Result<Vec<World>, SemanticsError> {
    let sig = model.signature();
    let endo: Vec<VarId> = sig.endogenous_ids().collect();
    let size = endo
        .iter()
        .fold(1u128, |acc, v| acc.saturating_mul(sig.range(*v).len() as u128));
    if size > u128::from(cap) {
        return Err(SemanticsError::TooLarge {
            what: "endogenous assignment space",
            size,
            cap,
        });
    }
    let mut digits = vec![0usize; endo.len()];
    let mut world: Vec<i64> = context.values().to_vec();
    world.resize(sig.len(), 0);
    let mut solutions = Vec::new();
    loop {
        for (v, d) in endo.iter().zip(&digits) {
            world[v.index()] = sig.range(*v).values()[*d];
        }
        let fixed = endo
            .iter()
            .all(|v| model.mechanism(*v).eval(world.as_slice()) == Ok(world[v.index()]));
        if fixed {
            solutions.push(World(world.clone()));
        }
        if !advance(&mut digits, |i| sig.range(endo[i]).len()) {
            return Ok(solutions);
        }
    }
}

/// `(M, u) |= formula`.
pub fn satisfies(
    model: &CausalModel,
    context: &Context,
    formula: &CausalFormula,
) -> Result<bool, SemanticsError> {
    formula.check(model.signature())?;
    let mut overrides = vec![None; model.signature().len()];
    for (v, x) in &formula.interventions {
        overrides[v.index()] = Some(*x);
    }
    let world = Solver::new(model).solve(context, &overrides);
    Ok(formula.body.holds_in(world.values()))
}

/// `M |= formula`: satisfaction in every context.
pub fn satisfies_all_contexts(model: &CausalModel, formula: &CausalFormula) -> Result<bool, SemanticsError> {
    satisfies_all_contexts_with_cap(model, formula, DEFAULT_ENUMERATION_CAP)
}

pub fn satisfies_all_contexts_with_cap(
    model: &CausalModel,
    formula: &CausalFormula,
    cap: u64,
) -> Result<bool, SemanticsError> {
    formula.check(model.signature())?;
    for context in Context::enumerate(model.signature(), cap)? {
        if !satisfies(model, &context, formula)? {
            return Ok(false);
        }
    }
    Ok(true)
}
