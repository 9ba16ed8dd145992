//! Actual causation: AC1, the AC2 witness search, AC3 minimality, the but-for
//! test, cause enumeration and the path/stability comparison tools.
//!
//! The witness search is exhaustive and deterministic. Partitions are visited
//! with the contingency set `W` in increasing size, lexicographic by
//! declaration order within a size; for each `W` the alternative setting `x'`
//! varies slower than the contingency values `w`. The first `(W, x', w)` that
//! passes AC2(a), the optional normality gate and AC2(b) is reported.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::model::{advance, CausalModel, Signature, VarId};
use crate::normality::Rank;
use crate::semantics::{check_settings, BoolFormula, Context, SemanticsError, Solver};

pub const DEFAULT_MAX_ENDOGENOUS: usize = 16;
pub const DEFAULT_MAX_NEAR_MISSES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CausalityError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("a cause candidate needs at least one conjunct")]
    EmptyCandidate,
    #[error("search space too large: {endogenous} endogenous variables exceed the cap of {cap}")]
    TooLarge { endogenous: usize, cap: usize },
    #[error("AC1 does not hold: {0}")]
    NotActual(&'static str),
    #[error("malformed witness: {0}")]
    MalformedWitness(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Largest number of endogenous variables the witness search accepts.
    pub max_endogenous: usize,
    /// Largest number of rejected AC2 attempts kept for diagnostics.
    pub max_near_misses: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_endogenous: DEFAULT_MAX_ENDOGENOUS,
            max_near_misses: DEFAULT_MAX_NEAR_MISSES,
        }
    }
}

/// Conjunction `X1 = x1 & ... & Xk = xk` of primitive events over distinct
/// endogenous variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Candidate {
    conjuncts: Vec<(VarId, i64)>,
}

impl Candidate {
    pub fn new(sig: &Signature, conjuncts: Vec<(VarId, i64)>) -> Result<Self, CausalityError> {
        if conjuncts.is_empty() {
            return Err(CausalityError::EmptyCandidate);
        }
        check_settings(sig, &conjuncts)?;
        Ok(Candidate { conjuncts })
    }

    pub fn from_names<S: AsRef<str>>(sig: &Signature, conjuncts: &[(S, i64)]) -> Result<Self, CausalityError> {
        let resolved = conjuncts
            .iter()
            .map(|(name, x)| {
                sig.lookup(name.as_ref())
                    .map(|v| (v, *x))
                    .ok_or_else(|| SemanticsError::UnknownVariable(name.as_ref().to_owned()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Candidate::new(sig, resolved)
    }

    pub fn single(sig: &Signature, var: VarId, value: i64) -> Result<Self, CausalityError> {
        Candidate::new(sig, vec![(var, value)])
    }

    pub fn conjuncts(&self) -> &[(VarId, i64)] {
        &self.conjuncts
    }

    pub fn variables(&self) -> impl Iterator<Item = VarId> + '_ {
        self.conjuncts.iter().map(|(v, _)| *v)
    }

    pub fn len(&self) -> usize {
        self.conjuncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    pub fn as_formula(&self) -> BoolFormula<VarId> {
        BoolFormula::conjunction(self.conjuncts.iter().copied())
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        AssignmentDisplay {
            pairs: &self.conjuncts,
            sig,
            sep: " & ",
        }
    }
}

pub(crate) struct AssignmentDisplay<'a> {
    pub pairs: &'a [(VarId, i64)],
    pub sig: &'a Signature,
    pub sep: &'a str,
}

impl fmt::Display for AssignmentDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, x)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(self.sep)?;
            }
            write!(f, "{}={}", self.sig.name(*v), x)?;
        }
        Ok(())
    }
}

/// Certificate for AC2: the partition `(Z, W)` of the endogenous variables,
/// the alternative setting `x'`, the contingency `w` and the actual values
/// `z*` of `Z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Witness {
    pub z_set: Vec<VarId>,
    pub w_set: Vec<VarId>,
    pub x_prime: Vec<(VarId, i64)>,
    pub w_values: Vec<(VarId, i64)>,
    pub z_star: Vec<(VarId, i64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Clause {
    Ac1,
    Ac2,
    Ac3,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Ac1 => "AC1",
            Clause::Ac2 => "AC2",
            Clause::Ac3 => "AC3",
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct SearchStats {
    /// `(Z, W)` partitions visited.
    pub partitions: u64,
    /// `(x', w)` settings tried against AC2(a).
    pub settings: u64,
    /// Interventions solved while checking AC2(b).
    pub subset_checks: u64,
}

impl std::ops::AddAssign for SearchStats {
    fn add_assign(&mut self, rhs: Self) {
        self.partitions += rhs.partitions;
        self.settings += rhs.settings;
        self.subset_checks += rhs.subset_checks;
    }
}

/// `W' ⊆ W` and `Z' ⊆ Z` under which `[X <- x, W' <- w, Z' <- z*]φ` fails.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsetCounterexample {
    pub w_subset: Vec<VarId>,
    pub z_subset: Vec<VarId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rejection {
    Ac2b(SubsetCounterexample),
    /// Normality condition: no admissible world is at least as normal as the
    /// actual one.
    Abnormal { best_rank: Rank, actual_rank: Rank },
}

/// A setting that satisfied AC2(a) but was rejected afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NearMiss {
    pub w_set: Vec<VarId>,
    pub w_values: Vec<(VarId, i64)>,
    pub x_prime: Vec<(VarId, i64)>,
    pub rejection: Rejection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub is_cause: bool,
    pub failed_clause: Option<Clause>,
    pub witness: Option<Witness>,
    pub stats: SearchStats,
    /// Rejected AC2 attempts of the main search, in search order, truncated
    /// at [`SearchLimits::max_near_misses`].
    pub near_misses: Vec<NearMiss>,
}

/// Per-clause result of [`verify_witness`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessCheck {
    pub ac2a: bool,
    pub ac2b: Option<SubsetCounterexample>,
}

impl WitnessCheck {
    pub fn passed(&self) -> bool {
        self.ac2a && self.ac2b.is_none()
    }
}

/// Extra admissibility condition on AC2(a) settings, applied after AC2(a)
/// holds. Receives the settings `X <- x', W <- w` and the world they produce.
pub(crate) type Gate<'a> = dyn Fn(&[(VarId, i64)], &[i64]) -> Result<(), Rejection> + 'a;

pub(crate) struct Search<'a> {
    model: &'a CausalModel,
    solver: Solver<'a>,
    context: &'a Context,
    actual: Vec<i64>,
    limits: SearchLimits,
    gate: Option<&'a Gate<'a>>,
    stats: SearchStats,
    scratch: Vec<i64>,
    overrides: Vec<Option<i64>>,
}

impl<'a> Search<'a> {
    pub(crate) fn new(
        model: &'a CausalModel,
        context: &'a Context,
        limits: SearchLimits,
        gate: Option<&'a Gate<'a>>,
    ) -> Self {
        let solver = Solver::new(model);
        let actual = solver.solve(context, &[]).values().to_vec();
        let n = model.signature().len();
        Search {
            model,
            solver,
            context,
            actual,
            limits,
            gate,
            stats: SearchStats::default(),
            scratch: Vec::with_capacity(n),
            overrides: vec![None; n],
        }
    }

    pub(crate) fn actual(&self) -> &[i64] {
        &self.actual
    }

    fn sig(&self) -> &'a Signature {
        self.model.signature()
    }

    fn check_inputs(&self, candidate: &Candidate, effect: &BoolFormula) -> Result<(), CausalityError> {
        check_settings(self.sig(), candidate.conjuncts())?;
        effect.check(self.sig())?;
        Ok(())
    }

    fn check_size(&self) -> Result<(), CausalityError> {
        let n = self.sig().endogenous().len();
        if n > self.limits.max_endogenous {
            return Err(CausalityError::TooLarge {
                endogenous: n,
                cap: self.limits.max_endogenous,
            });
        }
        Ok(())
    }

    fn ac1(&self, candidate: &Candidate, effect: &BoolFormula) -> bool {
        candidate
            .conjuncts()
            .iter()
            .all(|(v, x)| self.actual[v.index()] == *x)
            && effect.holds_in(&self.actual)
    }

    /// Solves under `settings` and evaluates the effect.
    fn holds_under(&mut self, settings: &[(VarId, i64)], effect: &BoolFormula) -> bool {
        for (v, x) in settings {
            self.overrides[v.index()] = Some(*x);
        }
        self.solver.solve_into(self.context, &self.overrides, &mut self.scratch);
        for (v, _) in settings {
            self.overrides[v.index()] = None;
        }
        effect.holds_in(&self.scratch)
    }

    /// AC2(b): every `W' ⊆ W`, `Z' ⊆ Z \ X`, smallest subsets first.
    fn check_ac2b(
        &mut self,
        candidate: &Candidate,
        effect: &BoolFormula,
        w_values: &[(VarId, i64)],
        z_rest: &[VarId],
    ) -> Option<SubsetCounterexample> {
        let mut settings: Vec<(VarId, i64)> = Vec::with_capacity(self.sig().endogenous().len());
        let mut result = None;
        for_each_subset(w_values.len(), |w_idx| {
            for_each_subset(z_rest.len(), |z_idx| {
                settings.clear();
                settings.extend_from_slice(candidate.conjuncts());
                settings.extend(w_idx.iter().map(|&i| w_values[i]));
                settings.extend(z_idx.iter().map(|&i| {
                    let z = z_rest[i];
                    (z, self.actual[z.index()])
                }));
                self.stats.subset_checks += 1;
                if self.holds_under(&settings, effect) {
                    return true;
                }
                result = Some(SubsetCounterexample {
                    w_subset: w_idx.iter().map(|&i| w_values[i].0).collect(),
                    z_subset: z_idx.iter().map(|&i| z_rest[i]).collect(),
                });
                false
            });
            result.is_none()
        });
        result
    }

    fn make_witness(
        &self,
        w_set: &[VarId],
        x_prime: Vec<(VarId, i64)>,
        w_values: Vec<(VarId, i64)>,
    ) -> Witness {
        let z_set: Vec<VarId> = self
            .sig()
            .endogenous_ids()
            .filter(|v| !w_set.contains(v))
            .collect();
        let z_star = z_set.iter().map(|v| (*v, self.actual[v.index()])).collect();
        Witness {
            z_set,
            w_set: w_set.to_vec(),
            x_prime,
            w_values,
            z_star,
        }
    }

    /// Tries every `(x', w)` for one contingency set, in canonical order.
    fn search_partition(
        &mut self,
        candidate: &Candidate,
        effect: &BoolFormula,
        w_set: &[VarId],
        mut near_misses: Option<&mut Vec<NearMiss>>,
    ) -> Option<Witness> {
        let sig = self.sig();
        self.stats.partitions += 1;
        let x_vars: Vec<VarId> = candidate.variables().collect();
        let z_rest: Vec<VarId> = sig
            .endogenous_ids()
            .filter(|v| !w_set.contains(v) && !x_vars.contains(v))
            .collect();
        // AC2(b) does not depend on x'.
        let mut ac2b_cache: HashMap<Vec<i64>, Option<SubsetCounterexample>> = HashMap::new();
        let mut x_digits = vec![0usize; x_vars.len()];
        let mut settings = Vec::with_capacity(sig.endogenous().len());
        loop {
            let x_prime: Vec<(VarId, i64)> = x_vars
                .iter()
                .zip(&x_digits)
                .map(|(v, d)| (*v, sig.range(*v).values()[*d]))
                .collect();
            if x_prime.as_slice() != candidate.conjuncts() {
                let mut w_digits = vec![0usize; w_set.len()];
                loop {
                    let w_values: Vec<(VarId, i64)> = w_set
                        .iter()
                        .zip(&w_digits)
                        .map(|(v, d)| (*v, sig.range(*v).values()[*d]))
                        .collect();
                    self.stats.settings += 1;
                    settings.clear();
                    settings.extend_from_slice(&x_prime);
                    settings.extend_from_slice(&w_values);
                    if !self.holds_under(&settings, effect) {
                        let mut rejection = None;
                        if let Some(gate) = self.gate {
                            if let Err(r) = gate(&settings, &self.scratch) {
                                rejection = Some(r);
                            }
                        }
                        if rejection.is_none() {
                            let key: Vec<i64> = w_values.iter().map(|(_, x)| *x).collect();
                            let b = match ac2b_cache.get(&key) {
                                Some(b) => b.clone(),
                                None => {
                                    let b = self.check_ac2b(candidate, effect, &w_values, &z_rest);
                                    ac2b_cache.insert(key, b.clone());
                                    b
                                }
                            };
                            rejection = b.map(Rejection::Ac2b);
                        }
                        match rejection {
                            None => return Some(self.make_witness(w_set, x_prime, w_values)),
                            Some(rejection) => {
                                if let Some(list) = near_misses.as_deref_mut() {
                                    if list.len() < self.limits.max_near_misses {
                                        list.push(NearMiss {
                                            w_set: w_set.to_vec(),
                                            w_values,
                                            x_prime: x_prime.clone(),
                                            rejection,
                                        });
                                    }
                                }
                            }
                        }
                    }
                    if !advance(&mut w_digits, |i| sig.range(w_set[i]).len()) {
                        break;
                    }
                }
            }
            if !advance(&mut x_digits, |i| sig.range(x_vars[i]).len()) {
                return None;
            }
        }
    }

    /// Full AC2 search over every contingency set.
    fn find_witness(
        &mut self,
        candidate: &Candidate,
        effect: &BoolFormula,
        mut near_misses: Option<&mut Vec<NearMiss>>,
    ) -> Option<Witness> {
        let others: Vec<VarId> = self
            .sig()
            .endogenous_ids()
            .filter(|v| !candidate.variables().any(|x| x == *v))
            .collect();
        let mut found = None;
        for_each_subset(others.len(), |idx| {
            let w_set: Vec<VarId> = idx.iter().map(|&i| others[i]).collect();
            found = self.search_partition(candidate, effect, &w_set, near_misses.as_deref_mut());
            found.is_none()
        });
        found
    }

    /// AC3: true when some nonempty strict sub-conjunction satisfies AC2
    /// (AC1 is inherited from the full candidate).
    fn has_smaller_cause(&mut self, candidate: &Candidate, effect: &BoolFormula) -> bool {
        let k = candidate.len();
        let mut smaller = false;
        for size in 1..k {
            for_each_combination(k, size, |idx| {
                let sub = Candidate {
                    conjuncts: idx.iter().map(|&i| candidate.conjuncts[i]).collect(),
                };
                smaller = self.find_witness(&sub, effect, None).is_some();
                !smaller
            });
            if smaller {
                return true;
            }
        }
        false
    }

    pub(crate) fn verdict(
        &mut self,
        candidate: &Candidate,
        effect: &BoolFormula,
    ) -> Result<Verdict, CausalityError> {
        self.check_inputs(candidate, effect)?;
        if !self.ac1(candidate, effect) {
            return Ok(self.finish(Clause::Ac1.into(), None, Vec::new()));
        }
        self.check_size()?;
        if candidate.len() > 1 && self.has_smaller_cause(candidate, effect) {
            return Ok(self.finish(Some(Clause::Ac3), None, Vec::new()));
        }
        let mut near = Vec::new();
        let witness = self.find_witness(candidate, effect, Some(&mut near));
        let failed = witness.is_none().then_some(Clause::Ac2);
        Ok(self.finish(failed, witness, near))
    }

    fn finish(&mut self, failed: Option<Clause>, witness: Option<Witness>, near: Vec<NearMiss>) -> Verdict {
        let stats = std::mem::take(&mut self.stats);
        Verdict {
            is_cause: failed.is_none() && witness.is_some(),
            failed_clause: failed,
            witness,
            stats,
            near_misses: near,
        }
    }

    pub(crate) fn witness(
        &mut self,
        candidate: &Candidate,
        effect: &BoolFormula,
        w_set: Option<&[VarId]>,
    ) -> Result<Option<Witness>, CausalityError> {
        self.check_inputs(candidate, effect)?;
        if !self.ac1(candidate, effect) {
            return Err(CausalityError::NotActual(
                "the candidate or the effect is false in the actual world",
            ));
        }
        self.check_size()?;
        Ok(match w_set {
            None => self.find_witness(candidate, effect, None),
            Some(w) => {
                for v in w {
                    if !self.sig().is_endogenous(*v) || candidate.variables().any(|x| x == *v) {
                        return Err(CausalityError::MalformedWitness(
                            "W must consist of endogenous variables outside the candidate".into(),
                        ));
                    }
                }
                let mut w: Vec<VarId> = w.to_vec();
                w.sort();
                w.dedup();
                self.search_partition(candidate, effect, &w, None)
            }
        })
    }
}

/// Visits every subset of `0..n` by increasing size, lexicographic within a
/// size, until `f` returns false.
pub(crate) fn for_each_subset(n: usize, mut f: impl FnMut(&[usize]) -> bool) {
    for size in 0..=n {
        let mut go = true;
        for_each_combination(n, size, |idx| {
            go = f(idx);
            go
        });
        if !go {
            return;
        }
    }
}

/// Lexicographic `size`-combinations of `0..n`, until `f` returns false.
pub(crate) fn for_each_combination(n: usize, size: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        if !f(&idx) {
            return;
        }
        // Rightmost position that can still move.
        let Some(i) = (0..size).rev().find(|&i| idx[i] < n - size + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// AC1: the candidate and the effect both hold in the actual world.
pub fn check_ac1(
    model: &CausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
) -> Result<bool, CausalityError> {
    let search = Search::new(model, context, SearchLimits::default(), None);
    search.check_inputs(candidate, effect)?;
    Ok(search.ac1(candidate, effect))
}

/// Checks AC2(a) and AC2(b) for a given witness. Every `W' ⊆ W` and
/// `Z' ⊆ Z \ X` is tried; subsets of `Z` that include candidate variables set
/// them to their actual values, which AC1 makes identical to `X <- x`.
pub fn verify_witness(
    model: &CausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
    witness: &Witness,
) -> Result<WitnessCheck, CausalityError> {
    let mut search = Search::new(model, context, SearchLimits::default(), None);
    search.check_inputs(candidate, effect)?;
    let sig = model.signature();
    let malformed = |msg: &str| Err(CausalityError::MalformedWitness(msg.to_owned()));

    let z: BTreeSet<VarId> = witness.z_set.iter().copied().collect();
    let w: BTreeSet<VarId> = witness.w_set.iter().copied().collect();
    let all: BTreeSet<VarId> = sig.endogenous_ids().collect();
    if z.len() != witness.z_set.len() || w.len() != witness.w_set.len() {
        return malformed("Z and W must not repeat variables");
    }
    if !z.is_disjoint(&w) || z.union(&w).copied().collect::<BTreeSet<_>>() != all {
        return malformed("Z and W must partition the endogenous variables");
    }
    if !candidate.variables().all(|v| z.contains(&v)) {
        return malformed("the candidate variables must lie in Z");
    }
    let xs: Vec<VarId> = witness.x_prime.iter().map(|(v, _)| *v).collect();
    if xs != candidate.variables().collect::<Vec<_>>() {
        return malformed("x' must set exactly the candidate variables, in candidate order");
    }
    check_settings(sig, &witness.x_prime)?;
    let wv: BTreeSet<VarId> = witness.w_values.iter().map(|(v, _)| *v).collect();
    if wv != w || witness.w_values.len() != w.len() {
        return malformed("w must set exactly the variables of W");
    }
    check_settings(sig, &witness.w_values)?;
    let zs: BTreeSet<VarId> = witness.z_star.iter().map(|(v, _)| *v).collect();
    if zs != z || witness.z_star.len() != z.len() {
        return malformed("z* must cover exactly the variables of Z");
    }
    for (v, x) in &witness.z_star {
        if search.actual[v.index()] != *x {
            return malformed(&format!(
                "z* gives {}={} but its actual value is {}",
                sig.name(*v),
                x,
                search.actual[v.index()]
            ));
        }
    }

    let mut settings = witness.x_prime.clone();
    settings.extend_from_slice(&witness.w_values);
    let ac2a = !search.holds_under(&settings, effect);
    let z_rest: Vec<VarId> = witness
        .z_set
        .iter()
        .copied()
        .filter(|v| !xs.contains(v))
        .collect();
    // Canonical order inside W and Z \ X.
    let mut w_values = witness.w_values.clone();
    w_values.sort();
    let mut z_rest = z_rest;
    z_rest.sort();
    let ac2b = search.check_ac2b(candidate, effect, &w_values, &z_rest);
    Ok(WitnessCheck { ac2a, ac2b })
}

/// First witness in canonical order, or `None` when no partition satisfies
/// AC2. Fails when AC1 does not hold.
pub fn find_witness(
    model: &CausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
) -> Result<Option<Witness>, CausalityError> {
    find_witness_with(model, context, candidate, effect, &SearchLimits::default())
}

pub fn find_witness_with(
    model: &CausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
    limits: &SearchLimits,
) -> Result<Option<Witness>, CausalityError> {
    Search::new(model, context, *limits, None).witness(candidate, effect, None)
}

/// Witness search restricted to one contingency set `W`.
pub fn find_witness_in_partition(
    model: &CausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
    w_set: &[VarId],
) -> Result<Option<Witness>, CausalityError> {
    Search::new(model, context, SearchLimits::default(), None).witness(candidate, effect, Some(w_set))
}

/// Decides whether `candidate` is an actual cause of `effect` in
/// `(model, context)`.
pub fn is_actual_cause(
    model: &CausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
) -> Result<Verdict, CausalityError> {
    is_actual_cause_with(model, context, candidate, effect, &SearchLimits::default())
}

pub fn is_actual_cause_with(
    model: &CausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
    limits: &SearchLimits,
) -> Result<Verdict, CausalityError> {
    Search::new(model, context, *limits, None).verdict(candidate, effect)
}

/// Naive counterfactual dependence: some `x' != x` makes the effect false
/// with no contingency. Fails when AC1 does not hold.
pub fn but_for(
    model: &CausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
) -> Result<bool, CausalityError> {
    let mut search = Search::new(model, context, SearchLimits::default(), None);
    search.check_inputs(candidate, effect)?;
    if !search.ac1(candidate, effect) {
        return Err(CausalityError::NotActual(
            "the candidate or the effect is false in the actual world",
        ));
    }
    let sig = model.signature();
    let vars: Vec<VarId> = candidate.variables().collect();
    let mut digits = vec![0usize; vars.len()];
    loop {
        let x_prime: Vec<(VarId, i64)> = vars
            .iter()
            .zip(&digits)
            .map(|(v, d)| (*v, sig.range(*v).values()[*d]))
            .collect();
        if x_prime.as_slice() != candidate.conjuncts() && !search.holds_under(&x_prime, effect) {
            return Ok(true);
        }
        if !advance(&mut digits, |i| sig.range(vars[i]).len()) {
            return Ok(false);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerateOptions {
    pub max_conjuncts: usize,
    /// Skip candidates that mention a variable of the effect.
    pub exclude_effect_variables: bool,
    pub limits: SearchLimits,
}

impl EnumerateOptions {
    pub fn new(max_conjuncts: usize) -> Self {
        EnumerateOptions {
            max_conjuncts,
            exclude_effect_variables: true,
            limits: SearchLimits::default(),
        }
    }
}

/// Every actual-valued candidate with at most `max_conjuncts` conjuncts that
/// is an actual cause of `effect`, ordered by size then declaration order.
pub fn enumerate_causes(
    model: &CausalModel,
    context: &Context,
    effect: &BoolFormula,
    options: &EnumerateOptions,
) -> Result<Vec<(Candidate, Witness)>, CausalityError> {
    enumerate_with_gate(model, context, effect, options, None)
}

pub(crate) fn enumerate_with_gate<'a>(
    model: &'a CausalModel,
    context: &'a Context,
    effect: &BoolFormula,
    options: &EnumerateOptions,
    gate: Option<&'a Gate<'a>>,
) -> Result<Vec<(Candidate, Witness)>, CausalityError> {
    let sig = model.signature();
    effect.check(sig)?;
    let mut search = Search::new(model, context, options.limits, gate);
    if !effect.holds_in(search.actual()) {
        return Err(CausalityError::NotActual("the effect is false in the actual world"));
    }
    search.check_size()?;
    let effect_vars = effect.variables();
    let pool: Vec<VarId> = sig
        .endogenous_ids()
        .filter(|v| !(options.exclude_effect_variables && effect_vars.contains(v)))
        .collect();
    let mut out = Vec::new();
    let mut failure = None;
    for size in 1..=options.max_conjuncts.min(pool.len()) {
        for_each_combination(pool.len(), size, |idx| {
            let conjuncts = idx
                .iter()
                .map(|&i| (pool[i], search.actual()[pool[i].index()]))
                .collect();
            let candidate = Candidate { conjuncts };
            match search.verdict(&candidate, effect) {
                Ok(v) => {
                    if let Some(w) = v.witness.filter(|_| v.is_cause) {
                        out.push((candidate, w));
                    }
                    true
                }
                Err(e) => {
                    failure = Some(e);
                    false
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(out)
}

/// Every simple directed path from `from` to `to` in the dependency graph,
/// shortest first, then lexicographic by declaration order.
pub fn directed_paths(model: &CausalModel, from: VarId, to: VarId) -> Vec<Vec<VarId>> {
    let graph = model.dependency_graph();
    let mut out = Vec::new();
    let mut path = vec![from];
    let mut on_path = vec![false; model.signature().len()];
    if from.index() >= on_path.len() || to.index() >= on_path.len() {
        return out;
    }
    on_path[from.index()] = true;
    fn dfs(
        graph: &crate::model::DependencyGraph,
        to: VarId,
        path: &mut Vec<VarId>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<VarId>>,
    ) {
        let last = *path.last().unwrap();
        if last == to {
            out.push(path.clone());
            return;
        }
        let next: Vec<VarId> = graph.successors(last).collect();
        for n in next {
            if !on_path[n.index()] {
                on_path[n.index()] = true;
                path.push(n);
                dfs(graph, to, path, on_path, out);
                path.pop();
                on_path[n.index()] = false;
            }
        }
    }
    dfs(&graph, to, &mut path, &mut on_path, &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// One model of a [`compare_verdicts`] table.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub verdict: Result<Verdict, CausalityError>,
    /// Directed paths from candidate variables to effect variables, by name.
    pub paths: BTreeSet<Vec<String>>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    /// All verdicts succeeded and agree.
    pub stable: bool,
    /// For each adjacent pair `(i, i + 1)`, whether the path topology between
    /// candidate and effect variables differs.
    pub topology_changed: Vec<bool>,
}

/// Evaluates one named query against several models, e.g. successive
/// refinements of the same story, and reports whether the verdict is stable.
pub fn compare_verdicts(
    models: &[(&CausalModel, &Context)],
    candidate: &[(String, i64)],
    effect: &BoolFormula<String>,
) -> Comparison {
    let rows: Vec<ComparisonRow> = models
        .iter()
        .map(|(model, context)| {
            let sig = model.signature();
            let verdict = Candidate::from_names(sig, candidate).and_then(|c| {
                let e = effect.resolve(sig)?;
                is_actual_cause(model, context, &c, &e)
            });
            let mut paths = BTreeSet::new();
            for (cname, _) in candidate {
                for ename in effect.variable_names() {
                    if let (Some(a), Some(b)) = (sig.lookup(cname), sig.lookup(&ename)) {
                        for p in directed_paths(model, a, b) {
                            paths.insert(p.iter().map(|v| sig.name(*v).to_owned()).collect());
                        }
                    }
                }
            }
            ComparisonRow { verdict, paths }
        })
        .collect();
    let outcomes: Vec<Option<bool>> = rows
        .iter()
        .map(|r| r.verdict.as_ref().ok().map(|v| v.is_cause))
        .collect();
    let stable = outcomes.iter().all(Option::is_some) && outcomes.windows(2).all(|w| w[0] == w[1]);
    let topology_changed = rows.windows(2).map(|w| w[0].paths != w[1].paths).collect();
    Comparison {
        rows,
        stable,
        topology_changed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_come_smallest_first() {
        let mut seen = Vec::new();
        for_each_subset(3, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(
            seen,
            vec![
                vec![],
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
    }

    #[test]
    fn subset_visit_stops_early() {
        let mut count = 0;
        for_each_subset(4, |s| {
            count += 1;
            s.len() < 2
        });
        // empty + 4 singletons + first pair
        assert_eq!(count, 6);
    }

    #[test]
    fn combinations_of_empty_set() {
        let mut seen = Vec::new();
        for_each_combination(0, 0, |s| {
            seen.push(s.to_vec());
            true
        });
        assert_eq!(seen, vec![Vec::<usize>::new()]);
        for_each_combination(2, 3, |_| panic!("no 3-subsets of a 2-set"));
    }
}
