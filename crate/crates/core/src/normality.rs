//! Extended causal models: a ranking function grades every world by how
//! abnormal it is, and the normality-restricted cause check only accepts AC2
//! witnesses whose alternative world is at least as normal as the actual one.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::causality::{
    enumerate_with_gate, AssignmentDisplay, Candidate, CausalityError, EnumerateOptions, Gate,
    Rejection, Search, SearchLimits, Verdict, Witness,
};
use crate::model::{advance, CausalModel, Signature, VarId};
use crate::semantics::{check_value, BoolFormula, Context, SemanticsError, World, DEFAULT_ENUMERATION_CAP};

/// Rank of a world: a natural number, or infinity for impossible worlds.
/// `Finite(_) < Infinite`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank {
    Finite(u64),
    Infinite,
}

impl Rank {
    pub const ZERO: Rank = Rank::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Rank::Finite(_))
    }
}

impl From<u64> for Rank {
    fn from(r: u64) -> Self {
        Rank::Finite(r)
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(r) => write!(f, "{r}"),
            Rank::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalityError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("ranking rule {rule} mentions `{var}` more than once")]
    RepeatedPatternVariable { rule: usize, var: String },
    #[error("ranking does not belong to this model: {0}")]
    SignatureMismatch(String),
}

/// One `pattern => rank` rule. A world matches when it extends the partial
/// assignment `pattern`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankingRule {
    pub pattern: Vec<(VarId, i64)>,
    pub rank: Rank,
}

impl RankingRule {
    pub fn new(pattern: Vec<(VarId, i64)>, rank: impl Into<Rank>) -> Self {
        RankingRule {
            pattern,
            rank: rank.into(),
        }
    }

    pub fn matches(&self, world: &[i64]) -> bool {
        self.pattern.iter().all(|(v, x)| world[v.index()] == *x)
    }
}

/// Ordered rules; the first matching rule decides, `default` otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankingFunction {
    rules: Vec<RankingRule>,
    default: Rank,
}

impl RankingFunction {
    pub fn new(sig: &Signature, rules: Vec<RankingRule>, default: impl Into<Rank>) -> Result<Self, NormalityError> {
        for (i, rule) in rules.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for (v, x) in &rule.pattern {
                check_value(sig, *v, *x)?;
                if !seen.insert(*v) {
                    return Err(NormalityError::RepeatedPatternVariable {
                        rule: i + 1,
                        var: sig.name(*v).to_owned(),
                    });
                }
            }
        }
        Ok(RankingFunction {
            rules,
            default: default.into(),
        })
    }

    /// Every world gets the same rank.
    pub fn constant(rank: impl Into<Rank>) -> Self {
        RankingFunction {
            rules: Vec::new(),
            default: rank.into(),
        }
    }

    pub fn rules(&self) -> &[RankingRule] {
        &self.rules
    }

    pub fn default_rank(&self) -> Rank {
        self.default
    }

    pub fn with_default(mut self, default: impl Into<Rank>) -> Self {
        self.default = default.into();
        self
    }

    pub fn rank(&self, world: &[i64]) -> Rank {
        self.rules
            .iter()
            .find(|r| r.matches(world))
            .map_or(self.default, |r| r.rank)
    }

    /// Variables mentioned by some rule, i.e. the ones a rank can depend on.
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.rules
            .iter()
            .flat_map(|r| r.pattern.iter().map(|(v, _)| *v))
            .collect()
    }

    fn fits(&self, sig: &Signature) -> bool {
        self.rules
            .iter()
            .flat_map(|r| &r.pattern)
            .all(|(v, x)| v.index() < sig.len() && sig.range(*v).contains(*x))
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        RankingDisplay { ranking: self, sig }
    }
}

struct RankingDisplay<'a> {
    ranking: &'a RankingFunction,
    sig: &'a Signature,
}

impl fmt::Display for RankingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.ranking.rules {
            let pattern = AssignmentDisplay {
                pairs: &rule.pattern,
                sig: self.sig,
                sep: ", ",
            };
            writeln!(f, "{pattern} => {}", rule.rank)?;
        }
        write!(f, "default => {}", self.ranking.default)
    }
}

pub fn rank_world(ranking: &RankingFunction, world: &World) -> Rank {
    ranking.rank(world.values())
}

/// Which world the normality condition inspects.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum NormalitySemantics {
    /// Any world, solution or not, where `X = x'` and `W = w` hold.
    #[default]
    Literal,
    /// The solution of the model under `X <- x', W <- w`.
    Solution,
}

impl fmt::Display for NormalitySemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalitySemantics::Literal => "literal",
            NormalitySemantics::Solution => "solution",
        })
    }
}

impl std::str::FromStr for NormalitySemantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(NormalitySemantics::Literal),
            "solution" => Ok(NormalitySemantics::Solution),
            other => Err(format!("unknown normality semantics `{other}` (expected literal or solution)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedCausalModel {
    model: CausalModel,
    ranking: RankingFunction,
}

impl ExtendedCausalModel {
    pub fn new(model: CausalModel, ranking: RankingFunction) -> Result<Self, NormalityError> {
        if !ranking.fits(model.signature()) {
            return Err(NormalityError::SignatureMismatch(
                "a rule mentions an undeclared variable or an out-of-range value".into(),
            ));
        }
        Ok(ExtendedCausalModel { model, ranking })
    }

    pub fn model(&self) -> &CausalModel {
        &self.model
    }

    pub fn ranking(&self) -> &RankingFunction {
        &self.ranking
    }

    pub fn rank_world(&self, world: &World) -> Rank {
        self.ranking.rank(world.values())
    }
}

/// Enumerates assignments to `vars` (all other positions of `base` fixed),
/// calling `f` until it returns false.
fn for_each_assignment(sig: &Signature, vars: &[VarId], base: &mut [i64], mut f: impl FnMut(&[i64]) -> bool) {
    let mut digits = vec![0usize; vars.len()];
    loop {
        for (v, d) in vars.iter().zip(&digits) {
            base[v.index()] = sig.range(*v).values()[*d];
        }
        if !f(base) || !advance(&mut digits, |i| sig.range(vars[i]).len()) {
            return;
        }
    }
}

fn space_size(sig: &Signature, vars: impl IntoIterator<Item = VarId>) -> u128 {
    vars.into_iter()
        .map(|v| sig.range(v).len() as u128)
        .fold(1u128, |a, b| a.saturating_mul(b))
}

/// Default reading of "if `antecedent` then typically `consequent`": the
/// consequent holds in every minimum-rank world satisfying the antecedent,
/// ranging over the full assignment space. Vacuously true when no world
/// satisfies the antecedent.
pub fn typically(
    extended: &ExtendedCausalModel,
    antecedent: &BoolFormula,
    consequent: &BoolFormula,
) -> Result<bool, SemanticsError> {
    typically_with_cap(extended, antecedent, consequent, DEFAULT_ENUMERATION_CAP)
}

pub fn typically_with_cap(
    extended: &ExtendedCausalModel,
    antecedent: &BoolFormula,
    consequent: &BoolFormula,
    cap: u64,
) -> Result<bool, SemanticsError> {
    let sig = extended.model.signature();
    antecedent.check_any(sig)?;
    consequent.check_any(sig)?;
    // Variables outside the formulas and the ranking cannot change the answer.
    let mut relevant = extended.ranking.variables();
    relevant.extend(antecedent.variables());
    relevant.extend(consequent.variables());
    let vars: Vec<VarId> = relevant.into_iter().collect();
    let size = space_size(sig, vars.iter().copied());
    if size > cap as u128 {
        return Err(SemanticsError::TooLarge {
            what: "world space",
            size,
            cap,
        });
    }
    let mut world = vec![0i64; sig.len()];
    let mut best: Option<(Rank, bool)> = None;
    for_each_assignment(sig, &vars, &mut world, |w| {
        if antecedent.holds_in(w) {
            let r = extended.ranking.rank(w);
            let q = consequent.holds_in(w);
            best = Some(match best {
                Some((b, all)) if b < r => (b, all),
                Some((b, all)) if b == r => (b, all && q),
                _ => (r, q),
            });
        }
        true
    });
    Ok(best.is_none_or(|(_, all)| all))
}

/// Normality gate for the witness search.
struct NormalityGate<'a> {
    sig: &'a Signature,
    ranking: &'a RankingFunction,
    semantics: NormalitySemantics,
    actual_rank: Rank,
    rank_vars: Vec<VarId>,
}

impl NormalityGate<'_> {
    fn admit(&self, settings: &[(VarId, i64)], world: &[i64]) -> Result<(), Rejection> {
        let best = match self.semantics {
            NormalitySemantics::Solution => self.ranking.rank(world),
            NormalitySemantics::Literal => {
                let mut base = vec![0i64; self.sig.len()];
                for (v, x) in settings {
                    base[v.index()] = *x;
                }
                let free: Vec<VarId> = self
                    .rank_vars
                    .iter()
                    .copied()
                    .filter(|v| !settings.iter().any(|(s, _)| s == v))
                    .collect();
                let mut best = Rank::Infinite;
                let mut first = true;
                for_each_assignment(self.sig, &free, &mut base, |w| {
                    let r = self.ranking.rank(w);
                    if first || r < best {
                        best = r;
                        first = false;
                    }
                    best > self.actual_rank
                });
                best
            }
        };
        if best <= self.actual_rank {
            Ok(())
        } else {
            Err(Rejection::Abnormal {
                best_rank: best,
                actual_rank: self.actual_rank,
            })
        }
    }
}

fn with_gate<T>(
    extended: &ExtendedCausalModel,
    context: &Context,
    semantics: NormalitySemantics,
    run: impl FnOnce(&Gate<'_>) -> Result<T, CausalityError>,
) -> Result<T, CausalityError> {
    let sig = extended.model.signature();
    let rank_vars: Vec<VarId> = extended.ranking.variables().into_iter().collect();
    if semantics == NormalitySemantics::Literal {
        let size = space_size(sig, rank_vars.iter().copied());
        if size > DEFAULT_ENUMERATION_CAP as u128 {
            return Err(SemanticsError::TooLarge {
                what: "ranking pattern space",
                size,
                cap: DEFAULT_ENUMERATION_CAP,
            }
            .into());
        }
    }
    let actual = crate::semantics::solve(&extended.model, context);
    let gate = NormalityGate {
        sig,
        ranking: &extended.ranking,
        semantics,
        actual_rank: extended.ranking.rank(actual.values()),
        rank_vars,
    };
    let f = |s: &[(VarId, i64)], w: &[i64]| gate.admit(s, w);
    run(&f)
}

/// Actual causation in an extended model: as [`crate::causality::is_actual_cause`],
/// except that an AC2 witness must also pass the normality condition.
pub fn is_actual_cause_extended(
    extended: &ExtendedCausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
    semantics: NormalitySemantics,
) -> Result<Verdict, CausalityError> {
    is_actual_cause_extended_with(extended, context, candidate, effect, semantics, &SearchLimits::default())
}

pub fn is_actual_cause_extended_with(
    extended: &ExtendedCausalModel,
    context: &Context,
    candidate: &Candidate,
    effect: &BoolFormula,
    semantics: NormalitySemantics,
    limits: &SearchLimits,
) -> Result<Verdict, CausalityError> {
    with_gate(extended, context, semantics, |gate| {
        Search::new(&extended.model, context, *limits, Some(gate)).verdict(candidate, effect)
    })
}

/// Cause enumeration under the normality condition.
pub fn enumerate_causes_extended(
    extended: &ExtendedCausalModel,
    context: &Context,
    effect: &BoolFormula,
    semantics: NormalitySemantics,
    options: &EnumerateOptions,
) -> Result<Vec<(Candidate, Witness)>, CausalityError> {
    with_gate(extended, context, semantics, |gate| {
        enumerate_with_gate(&extended.model, context, effect, options, Some(gate))
    })
}
