//! Signatures, mechanisms and validated causal models.
//!
//! A [`CandidateModel`] is raw data that may violate any of the model
//! invariants; [`validate_model`] reports every violation. A [`CausalModel`]
//! can only be obtained from a candidate that validates cleanly, so the rest
//! of the crate can rely on acyclicity, one mechanism per endogenous variable
//! and range discipline.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::expr::{EvalError, Expr};

/// Index of a variable in its signature: exogenous variables first, then
/// endogenous, each in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(usize);

impl VarId {
    pub const fn new(index: usize) -> Self {
        VarId(index)
    }

    pub const fn index(self) -> usize {
        self.0
    }
}

/// Words with a fixed meaning in the model syntax; never valid variable names.
pub const RESERVED_WORDS: &[&str] = &[
    "model",
    "exogenous",
    "endogenous",
    "equations",
    "ranking",
    "rule",
    "default",
    "inf",
    "max",
    "min",
    "if",
    "true",
    "false",
];

pub fn is_valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !RESERVED_WORDS.contains(&name)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RangeError {
    #[error("a range must contain at least one value")]
    Empty,
    #[error("value {0} appears more than once in the range")]
    Duplicate(i64),
}

/// Finite nonempty set of integer values, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Range {
    values: Vec<i64>,
}

impl Range {
    pub fn new(values: impl IntoIterator<Item = i64>) -> Result<Self, RangeError> {
        let mut values: Vec<i64> = values.into_iter().collect();
        if values.is_empty() {
            return Err(RangeError::Empty);
        }
        values.sort_unstable();
        if let Some(w) = values.windows(2).find(|w| w[0] == w[1]) {
            return Err(RangeError::Duplicate(w[0]));
        }
        Ok(Range { values })
    }

    /// The inclusive interval `lo..=hi`.
    pub fn interval(lo: i64, hi: i64) -> Result<Self, RangeError> {
        if lo > hi {
            return Err(RangeError::Empty);
        }
        Ok(Range {
            values: (lo..=hi).collect(),
        })
    }

    pub fn binary() -> Self {
        Range { values: vec![0, 1] }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn contains(&self, value: i64) -> bool {
        self.values.binary_search(&value).is_ok()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// True when the values form one contiguous interval.
    pub fn is_contiguous(&self) -> bool {
        self.values.windows(2).all(|w| w[1] - w[0] == 1)
    }

    pub fn min(&self) -> i64 {
        self.values[0]
    }

    pub fn max(&self) -> i64 {
        self.values[self.values.len() - 1]
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.values.len() > 2 && self.is_contiguous() {
            return write!(f, "{{{}..{}}}", self.min(), self.max());
        }
        f.write_str("{")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarDecl {
    pub name: String,
    pub range: Range,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, range: Range) -> Self {
        VarDecl {
            name: name.into(),
            range,
        }
    }
}

/// Exogenous and endogenous variable declarations. Declaration order is the
/// canonical variable order for every deterministic tie-break.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    vars: Vec<VarDecl>,
    exogenous: usize,
}

impl Signature {
    pub fn new(exogenous: Vec<VarDecl>, endogenous: Vec<VarDecl>) -> Self {
        let n = exogenous.len();
        let mut vars = exogenous;
        vars.extend(endogenous);
        Signature { vars, exogenous: n }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn exogenous(&self) -> &[VarDecl] {
        &self.vars[..self.exogenous]
    }

    pub fn endogenous(&self) -> &[VarDecl] {
        &self.vars[self.exogenous..]
    }

    pub fn exogenous_ids(&self) -> impl ExactSizeIterator<Item = VarId> + Clone {
        (0..self.exogenous).map(VarId)
    }

    pub fn endogenous_ids(&self) -> impl ExactSizeIterator<Item = VarId> + Clone {
        (self.exogenous..self.vars.len()).map(VarId)
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = VarId> + Clone {
        (0..self.vars.len()).map(VarId)
    }

    pub fn is_exogenous(&self, var: VarId) -> bool {
        var.0 < self.exogenous
    }

    pub fn is_endogenous(&self, var: VarId) -> bool {
        var.0 >= self.exogenous && var.0 < self.vars.len()
    }

    /// Position of an endogenous variable among the endogenous declarations.
    pub fn endogenous_offset(&self, var: VarId) -> Option<usize> {
        self.is_endogenous(var).then(|| var.0 - self.exogenous)
    }

    pub fn decl(&self, var: VarId) -> &VarDecl {
        &self.vars[var.0]
    }

    pub fn name(&self, var: VarId) -> &str {
        &self.vars[var.0].name
    }

    pub fn try_name(&self, var: VarId) -> Option<&str> {
        self.vars.get(var.0).map(|d| d.name.as_str())
    }

    pub fn range(&self, var: VarId) -> &Range {
        &self.vars[var.0].range
    }

    /// First variable declared under `name`.
    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|d| d.name == name).map(VarId)
    }

    /// Number of total assignments to all variables, saturating.
    pub fn world_count(&self) -> u128 {
        self.vars
            .iter()
            .fold(1u128, |acc, d| acc.saturating_mul(d.range.len() as u128))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Mechanism {
    pub target: VarId,
    pub body: Expr,
}

impl Mechanism {
    pub fn new(target: VarId, body: Expr) -> Self {
        Mechanism { target, body }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Largest number of input combinations enumerated per mechanism.
    pub totality_cap: u64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            totality_cap: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoEndogenous,
    InvalidIdentifier {
        var: VarId,
        name: String,
    },
    DuplicateIdentifier {
        name: String,
        first: VarId,
        duplicate: VarId,
    },
    MechanismForExogenous {
        target: VarId,
    },
    /// Mechanism target or body reference outside the signature.
    UnknownVariable {
        mechanism: usize,
        var: VarId,
    },
    MissingMechanism {
        var: VarId,
    },
    ExtraMechanism {
        var: VarId,
        mechanism: usize,
    },
    OutOfRange {
        target: VarId,
        value: i64,
        witness: Vec<(VarId, i64)>,
    },
    EvaluationFailed {
        target: VarId,
        error: EvalError,
        witness: Vec<(VarId, i64)>,
    },
    TotalityUnverified {
        target: VarId,
        combinations: u128,
        cap: u64,
    },
    /// Dependency cycle; the path starts and ends at the same variable.
    Cycle {
        path: Vec<VarId>,
    },
}

impl Violation {
    /// The variable the violation is primarily about, if any.
    pub fn subject(&self) -> Option<VarId> {
        match self {
            Violation::NoEndogenous => None,
            Violation::InvalidIdentifier { var, .. } => Some(*var),
            Violation::DuplicateIdentifier { duplicate, .. } => Some(*duplicate),
            Violation::MechanismForExogenous { target } => Some(*target),
            Violation::UnknownVariable { .. } => None,
            Violation::MissingMechanism { var } => Some(*var),
            Violation::ExtraMechanism { var, .. } => Some(*var),
            Violation::OutOfRange { target, .. }
            | Violation::EvaluationFailed { target, .. }
            | Violation::TotalityUnverified { target, .. } => Some(*target),
            Violation::Cycle { path } => path.first().copied(),
        }
    }

    pub fn describe(&self, sig: &Signature) -> String {
        let name = |v: VarId| {
            sig.try_name(v)
                .map(str::to_owned)
                .unwrap_or_else(|| format!("#{}", v.0))
        };
        let assignment = |w: &[(VarId, i64)]| {
            w.iter()
                .map(|(v, x)| format!("{}={}", name(*v), x))
                .collect::<Vec<_>>()
                .join(", ")
        };
        match self {
            Violation::NoEndogenous => "model declares no endogenous variables".into(),
            Violation::InvalidIdentifier { name: n, .. } => {
                format!("`{n}` is not a valid identifier")
            }
            Violation::DuplicateIdentifier { name: n, .. } => {
                format!("identifier `{n}` is declared more than once")
            }
            Violation::MechanismForExogenous { target } => {
                format!("exogenous variable {} cannot have an equation", name(*target))
            }
            Violation::UnknownVariable { mechanism, var } => {
                format!("equation #{mechanism} references undeclared variable #{}", var.0)
            }
            Violation::MissingMechanism { var } => format!("no equation for {}", name(*var)),
            Violation::ExtraMechanism { var, .. } => {
                format!("more than one equation for {}", name(*var))
            }
            Violation::OutOfRange {
                target,
                value,
                witness,
            } => format!(
                "equation for {} yields {} outside its range {} when {}",
                name(*target),
                value,
                sig.range(*target),
                assignment(witness)
            ),
            Violation::EvaluationFailed {
                target,
                error,
                witness,
            } => format!(
                "equation for {} fails ({}) when {}",
                name(*target),
                error,
                assignment(witness)
            ),
            Violation::TotalityUnverified {
                target,
                combinations,
                cap,
            } => format!(
                "totality unverified for {}: {} input combinations exceed the cap of {}",
                name(*target),
                combinations,
                cap
            ),
            Violation::Cycle { path } => format!(
                "dependency cycle {}",
                path.iter().map(|v| name(*v)).collect::<Vec<_>>().join(" -> ")
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self, sig: &Signature) -> Vec<String> {
        self.violations.iter().map(|v| v.describe(sig)).collect()
    }
}

/// A model as written, before any invariant has been checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateModel {
    pub signature: Signature,
    pub mechanisms: Vec<Mechanism>,
}

impl CandidateModel {
    pub fn new(signature: Signature, mechanisms: Vec<Mechanism>) -> Self {
        CandidateModel {
            signature,
            mechanisms,
        }
    }

    pub fn validate(&self) -> ValidationReport {
        validate_model_with(self, ValidationOptions::default())
    }
}

pub fn validate_model(model: &CandidateModel) -> ValidationReport {
    validate_model_with(model, ValidationOptions::default())
}

pub fn validate_model_with(model: &CandidateModel, options: ValidationOptions) -> ValidationReport {
    let sig = &model.signature;
    let mut violations = Vec::new();

    if sig.endogenous().is_empty() {
        violations.push(Violation::NoEndogenous);
    }

    let mut seen: BTreeMap<&str, VarId> = BTreeMap::new();
    for id in sig.ids() {
        let name = sig.name(id);
        if !is_valid_identifier(name) {
            violations.push(Violation::InvalidIdentifier {
                var: id,
                name: name.to_owned(),
            });
        }
        match seen.get(name) {
            Some(&first) => violations.push(Violation::DuplicateIdentifier {
                name: name.to_owned(),
                first,
                duplicate: id,
            }),
            None => {
                seen.insert(name, id);
            }
        }
    }

    // Mechanisms whose target and references are all in bounds.
    let mut usable = vec![true; model.mechanisms.len()];
    let mut owner: BTreeMap<VarId, usize> = BTreeMap::new();
    for (i, m) in model.mechanisms.iter().enumerate() {
        if m.target.0 >= sig.len() {
            violations.push(Violation::UnknownVariable {
                mechanism: i,
                var: m.target,
            });
            usable[i] = false;
            continue;
        }
        for v in m.body.free_variables() {
            if v.0 >= sig.len() {
                violations.push(Violation::UnknownVariable {
                    mechanism: i,
                    var: v,
                });
                usable[i] = false;
            }
        }
        if sig.is_exogenous(m.target) {
            violations.push(Violation::MechanismForExogenous { target: m.target });
            usable[i] = false;
            continue;
        }
        if let std::collections::btree_map::Entry::Vacant(e) = owner.entry(m.target) {
            e.insert(i);
        } else {
            violations.push(Violation::ExtraMechanism {
                var: m.target,
                mechanism: i,
            });
            usable[i] = false;
        }
    }
    for v in sig.endogenous_ids() {
        if !owner.contains_key(&v) {
            violations.push(Violation::MissingMechanism { var: v });
        }
    }

    for (i, m) in model.mechanisms.iter().enumerate() {
        if usable[i] {
            check_totality(sig, m, options, &mut violations);
        }
    }

    let edges: Vec<(VarId, VarId)> = model
        .mechanisms
        .iter()
        .zip(&usable)
        .filter(|(_, ok)| **ok)
        .flat_map(|(m, _)| m.body.free_variables().into_iter().map(move |v| (v, m.target)))
        .collect();
    for path in find_cycles(sig.len(), &edges) {
        violations.push(Violation::Cycle { path });
    }

    ValidationReport { violations }
}

/// Enumerates every assignment to the mechanism's inputs and checks that the
/// output lands in the target's range.
fn check_totality(
    sig: &Signature,
    m: &Mechanism,
    options: ValidationOptions,
    out: &mut Vec<Violation>,
) {
    let inputs: Vec<VarId> = m.body.free_variables().into_iter().collect();
    let combinations = inputs
        .iter()
        .fold(1u128, |acc, v| acc.saturating_mul(sig.range(*v).len() as u128));
    if combinations > u128::from(options.totality_cap) {
        out.push(Violation::TotalityUnverified {
            target: m.target,
            combinations,
            cap: options.totality_cap,
        });
        return;
    }
    let mut env = vec![None; sig.len()];
    let mut digits = vec![0usize; inputs.len()];
    loop {
        for (v, d) in inputs.iter().zip(&digits) {
            env[v.0] = Some(sig.range(*v).values()[*d]);
        }
        let witness = || inputs.iter().map(|v| (*v, env[v.0].unwrap())).collect();
        match m.body.eval(env.as_slice()) {
            Ok(value) if sig.range(m.target).contains(value) => {}
            Ok(value) => {
                out.push(Violation::OutOfRange {
                    target: m.target,
                    value,
                    witness: witness(),
                });
                return;
            }
            Err(error) => {
                out.push(Violation::EvaluationFailed {
                    target: m.target,
                    error,
                    witness: witness(),
                });
                return;
            }
        }
        if !advance(&mut digits, |i| sig.range(inputs[i]).len()) {
            return;
        }
    }
}

/// Odometer increment over mixed radices; the last position varies fastest.
/// Returns false after wrapping past the final combination.
pub(crate) fn advance(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for i in (0..digits.len()).rev() {
        digits[i] += 1;
        if digits[i] < radix(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

/// One cycle per strongly connected component that contains a cycle, each
/// starting at the earliest declared member of its component.
fn find_cycles(n: usize, edges: &[(VarId, VarId)]) -> Vec<Vec<VarId>> {
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (a, b) in edges {
        succ[a.0].insert(b.0);
    }
    let components = strongly_connected(&succ);
    let mut cycles = Vec::new();
    for comp in components {
        let start = *comp.iter().min().unwrap();
        if comp.len() == 1 && !succ[start].contains(&start) {
            continue;
        }
        if succ[start].contains(&start) {
            cycles.push(vec![VarId(start), VarId(start)]);
            continue;
        }
        // Breadth-first search inside the component back to `start`.
        let members: BTreeSet<usize> = comp.iter().copied().collect();
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::from([start]);
        let mut closing = None;
        'bfs: while let Some(u) = queue.pop_front() {
            for &w in &succ[u] {
                if !members.contains(&w) {
                    continue;
                }
                if w == start {
                    closing = Some(u);
                    break 'bfs;
                }
                if let std::collections::btree_map::Entry::Vacant(e) = parent.entry(w) {
                    e.insert(u);
                    queue.push_back(w);
                }
            }
        }
        let mut u = closing.expect("a nontrivial component contains a cycle");
        let mut path = vec![VarId(start)];
        while u != start {
            path.push(VarId(u));
            u = parent[&u];
        }
        path.push(VarId(start));
        path.reverse();
        cycles.push(path);
    }
    cycles.sort();
    cycles
}

/// Tarjan's algorithm, iterative.
fn strongly_connected(succ: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let n = succ.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, Vec<usize>)> = vec![(root, succ[root].iter().copied().collect())];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some((v, pending)) = call.last_mut() {
            let v = *v;
            if let Some(w) = pending.pop() {
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, succ[w].iter().copied().collect()));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some((parent, _)) = call.last() {
                low[*parent] = low[*parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                out.push(comp);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Error)]
#[error("invalid causal model: {}", .messages.join("; "))]
pub struct InvalidModel {
    pub report: ValidationReport,
    pub messages: Vec<String>,
}

/// A validated, acyclic causal model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalModel {
    signature: Arc<Signature>,
    /// Indexed by endogenous offset.
    mechanisms: Vec<Expr>,
    order: Vec<VarId>,
}

impl CausalModel {
    pub fn new(candidate: CandidateModel) -> Result<Self, InvalidModel> {
        Self::with_options(candidate, ValidationOptions::default())
    }

    pub fn with_options(
        candidate: CandidateModel,
        options: ValidationOptions,
    ) -> Result<Self, InvalidModel> {
        let report = validate_model_with(&candidate, options);
        if !report.is_valid() {
            let messages = report.render(&candidate.signature);
            return Err(InvalidModel { report, messages });
        }
        let CandidateModel {
            signature,
            mechanisms,
        } = candidate;
        let mut bodies = vec![None; signature.endogenous().len()];
        for m in mechanisms {
            let slot = signature.endogenous_offset(m.target).unwrap();
            bodies[slot] = Some(m.body);
        }
        let mechanisms: Vec<Expr> = bodies.into_iter().map(Option::unwrap).collect();
        Ok(Self::assemble(Arc::new(signature), mechanisms))
    }

    fn assemble(signature: Arc<Signature>, mechanisms: Vec<Expr>) -> Self {
        let order = kahn_order(&signature, &mechanisms).expect("validated model is acyclic");
        CausalModel {
            signature,
            mechanisms,
            order,
        }
    }

    /// Same signature with some mechanisms replaced. The replacement must
    /// keep the model acyclic and in range; used by intervention surgery.
    pub(crate) fn with_mechanisms(&self, mechanisms: Vec<Expr>) -> Self {
        Self::assemble(Arc::clone(&self.signature), mechanisms)
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn mechanism(&self, var: VarId) -> &Expr {
        let slot = self
            .signature
            .endogenous_offset(var)
            .expect("mechanisms exist only for endogenous variables");
        &self.mechanisms[slot]
    }

    pub(crate) fn mechanism_bodies(&self) -> &[Expr] {
        &self.mechanisms
    }

    pub fn mechanisms(&self) -> impl Iterator<Item = Mechanism> + '_ {
        self.signature
            .endogenous_ids()
            .zip(&self.mechanisms)
            .map(|(target, body)| Mechanism::new(target, body.clone()))
    }

    pub fn to_candidate(&self) -> CandidateModel {
        CandidateModel::new((*self.signature).clone(), self.mechanisms().collect())
    }

    /// Endogenous variables such that each follows everything it depends on;
    /// ties go to the earlier declaration.
    pub fn topological_order(&self) -> &[VarId] {
        &self.order
    }

    pub fn dependency_graph(&self) -> DependencyGraph {
        dependency_graph(self)
    }
}

fn kahn_order(sig: &Signature, mechanisms: &[Expr]) -> Result<Vec<VarId>, Vec<VarId>> {
    let endo: Vec<VarId> = sig.endogenous_ids().collect();
    let mut indegree = vec![0usize; endo.len()];
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); endo.len()];
    for (slot, body) in mechanisms.iter().enumerate() {
        for v in body.free_variables() {
            if let Some(src) = sig.endogenous_offset(v) {
                indegree[slot] += 1;
                dependents[src].push(slot);
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, d)| **d == 0)
        .map(|(i, _)| Reverse(i))
        .collect();
    let mut order = Vec::with_capacity(endo.len());
    while let Some(Reverse(slot)) = ready.pop() {
        order.push(endo[slot]);
        for &d in &dependents[slot] {
            indegree[d] -= 1;
            if indegree[d] == 0 {
                ready.push(Reverse(d));
            }
        }
    }
    if order.len() == endo.len() {
        Ok(order)
    } else {
        let stuck = (0..endo.len())
            .filter(|i| indegree[*i] > 0)
            .map(|i| endo[i])
            .collect();
        Err(stuck)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("dependency cycle among {} variable(s)", .stuck.len())]
pub struct CycleDetected {
    pub stuck: Vec<VarId>,
}

/// Topological order of a candidate's endogenous variables. Fails on a cycle,
/// which is only reachable when validation was skipped.
pub fn topological_order(candidate: &CandidateModel) -> Result<Vec<VarId>, CycleDetected> {
    let sig = &candidate.signature;
    let mut bodies = vec![Expr::Const(0); sig.endogenous().len()];
    for m in &candidate.mechanisms {
        if let Some(slot) = sig.endogenous_offset(m.target) {
            bodies[slot] = m.body.clone();
        }
    }
    kahn_order(sig, &bodies).map_err(|stuck| CycleDetected { stuck })
}

/// Syntactic dependency edges `(cause, effect)`: `cause` occurs in the
/// mechanism body of `effect`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub edges: BTreeSet<(VarId, VarId)>,
}

impl DependencyGraph {
    pub fn successors(&self, var: VarId) -> impl Iterator<Item = VarId> + '_ {
        self.edges
            .range((var, VarId(0))..=(var, VarId(usize::MAX)))
            .map(|(_, b)| *b)
    }

    pub fn contains(&self, from: VarId, to: VarId) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Edges whose endpoints are both endogenous.
    pub fn endogenous_edges<'a>(
        &'a self,
        sig: &'a Signature,
    ) -> impl Iterator<Item = (VarId, VarId)> + 'a {
        self.edges
            .iter()
            .copied()
            .filter(|(a, b)| sig.is_endogenous(*a) && sig.is_endogenous(*b))
    }
}

pub fn dependency_graph(model: &CausalModel) -> DependencyGraph {
    let sig = model.signature();
    let edges = sig
        .endogenous_ids()
        .zip(model.mechanism_bodies())
        .flat_map(|(target, body)| body.free_variables().into_iter().map(move |v| (v, target)))
        .collect();
    DependencyGraph { edges }
}
