//! Shared helpers for integration tests: a brute-force actual-causation
//! oracle with its own solver, and random small models.
#![allow(dead_code)]

use causet::model::{CandidateModel, Mechanism, Range, Signature, VarDecl, VarId};
use causet::normality::{NormalitySemantics, Rank, RankingFunction, RankingRule};
use causet::{BoolFormula, CausalModel, Context, Expr};
use rand::seq::SliceRandom;
use rand::Rng;

/// Extra condition on AC2(a) settings: the settings and the world they
/// produce.
pub type Admissible<'a> = dyn Fn(&[(VarId, i64)], &[i64]) -> bool + 'a;

/// Every assignment over `ranges`, first position slowest.
pub fn product(ranges: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for r in ranges {
        let mut next = Vec::with_capacity(out.len() * r.len());
        for prefix in &out {
            for &x in r {
                let mut p = prefix.clone();
                p.push(x);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// All subsets of `items`, in no particular order.
pub fn subsets<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    (0u32..1 << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

pub struct Oracle<'a> {
    pub model: &'a CausalModel,
    pub context: &'a Context,
}

impl<'a> Oracle<'a> {
    pub fn new(model: &'a CausalModel, context: &'a Context) -> Self {
        Oracle { model, context }
    }

    fn sig(&self) -> &Signature {
        self.model.signature()
    }

    /// Every full world consistent with the context, the interventions and
    /// the remaining equations, found by trying all endogenous assignments.
    pub fn solutions(&self, interventions: &[(VarId, i64)]) -> Vec<Vec<i64>> {
        let sig = self.sig();
        let endo: Vec<VarId> = sig.endogenous_ids().collect();
        let ranges: Vec<Vec<i64>> = endo.iter().map(|v| sig.range(*v).values().to_vec()).collect();
        let mut out = Vec::new();
        for assignment in product(&ranges) {
            let mut world = self.context.values().to_vec();
            world.extend(assignment);
            let ok = endo.iter().all(|v| {
                match interventions.iter().find(|(w, _)| w == v) {
                    Some((_, x)) => world[v.index()] == *x,
                    None => self.model.mechanism(*v).eval(&world[..]).ok() == Some(world[v.index()]),
                }
            });
            if ok {
                out.push(world);
            }
        }
        out
    }

    pub fn solve(&self, interventions: &[(VarId, i64)]) -> Vec<i64> {
        let mut s = self.solutions(interventions);
        assert_eq!(s.len(), 1, "acyclic models have exactly one solution");
        s.pop().unwrap()
    }

    pub fn holds(&self, interventions: &[(VarId, i64)], phi: &BoolFormula) -> bool {
        phi.holds_in(&self.solve(interventions))
    }

    /// AC2 by full sweep: every W, every x' != x, every w, then every
    /// W' ⊆ W and Z' ⊆ Z (candidate variables included in Z').
    /// `admissible` is the extra AC2(a) condition of extended models.
    pub fn ac2(
        &self,
        cand: &[(VarId, i64)],
        phi: &BoolFormula,
        admissible: &Admissible,
    ) -> bool {
        let sig = self.sig();
        let actual = self.solve(&[]);
        let xs: Vec<VarId> = cand.iter().map(|(v, _)| *v).collect();
        let rest: Vec<VarId> = sig.endogenous_ids().filter(|v| !xs.contains(v)).collect();
        let x_ranges: Vec<Vec<i64>> = xs.iter().map(|v| sig.range(*v).values().to_vec()).collect();
        let x_actual: Vec<i64> = cand.iter().map(|(_, x)| *x).collect();
        for w_set in subsets(&rest) {
            let z_set: Vec<VarId> = sig.endogenous_ids().filter(|v| !w_set.contains(v)).collect();
            let w_ranges: Vec<Vec<i64>> = w_set.iter().map(|v| sig.range(*v).values().to_vec()).collect();
            for x_prime in product(&x_ranges) {
                if x_prime == x_actual {
                    continue;
                }
                for w in product(&w_ranges) {
                    let mut setting: Vec<(VarId, i64)> = xs.iter().copied().zip(x_prime.iter().copied()).collect();
                    setting.extend(w_set.iter().copied().zip(w.iter().copied()));
                    let world = self.solve(&setting);
                    if phi.holds_in(&world) || !admissible(&setting, &world) {
                        continue;
                    }
                    let b_ok = subsets(&w_set.iter().copied().zip(w.iter().copied()).collect::<Vec<_>>())
                        .into_iter()
                        .all(|w_sub| {
                            subsets(&z_set).into_iter().all(|z_sub| {
                                let mut s: Vec<(VarId, i64)> = cand.to_vec();
                                s.extend(w_sub.iter().copied());
                                for z in z_sub {
                                    if !s.iter().any(|(v, _)| *v == z) {
                                        s.push((z, actual[z.index()]));
                                    }
                                }
                                self.holds(&s, phi)
                            })
                        });
                    if b_ok {
                        return true;
                    }
                }
            }
        }
        false
    }

    pub fn is_cause_with(
        &self,
        cand: &[(VarId, i64)],
        phi: &BoolFormula,
        admissible: &Admissible,
    ) -> bool {
        let actual = self.solve(&[]);
        let ac1 = cand.iter().all(|(v, x)| actual[v.index()] == *x) && phi.holds_in(&actual);
        if !ac1 || !self.ac2(cand, phi, admissible) {
            return false;
        }
        subsets(cand)
            .into_iter()
            .filter(|s| !s.is_empty() && s.len() < cand.len())
            .all(|s| !self.ac2(&s, phi, admissible))
    }

    pub fn is_cause(&self, cand: &[(VarId, i64)], phi: &BoolFormula) -> bool {
        self.is_cause_with(cand, phi, &|_, _| true)
    }

    /// Extended-model verdict with the normality test computed by
    /// enumerating the whole world space.
    pub fn is_extended_cause(
        &self,
        cand: &[(VarId, i64)],
        phi: &BoolFormula,
        ranking: &RankingFunction,
        semantics: NormalitySemantics,
    ) -> bool {
        let sig = self.sig();
        let actual_rank = ranking.rank(&self.solve(&[]));
        let all: Vec<Vec<i64>> = sig.ids().map(|v| sig.range(v).values().to_vec()).collect();
        let worlds = product(&all);
        let admissible = |setting: &[(VarId, i64)], world: &[i64]| match semantics {
            NormalitySemantics::Solution => ranking.rank(world) <= actual_rank,
            NormalitySemantics::Literal => worlds.iter().any(|s| {
                setting.iter().all(|(v, x)| s[v.index()] == *x) && ranking.rank(s) <= actual_rank
            }),
        };
        self.is_cause_with(cand, phi, &admissible)
    }

    pub fn but_for(&self, cand: &[(VarId, i64)], phi: &BoolFormula) -> bool {
        let sig = self.sig();
        let ranges: Vec<Vec<i64>> = cand.iter().map(|(v, _)| sig.range(*v).values().to_vec()).collect();
        let actual: Vec<i64> = cand.iter().map(|(_, x)| *x).collect();
        product(&ranges).into_iter().filter(|x| *x != actual).any(|x| {
            let s: Vec<(VarId, i64)> = cand.iter().map(|(v, _)| *v).zip(x).collect();
            !self.holds(&s, phi)
        })
    }
}

// ---- random models ----

#[derive(Debug, Clone)]
pub struct RandomCase {
    pub model: CausalModel,
    pub ranking: RankingFunction,
    pub context: Context,
    /// Candidate built from actual values.
    pub candidate: Vec<(VarId, i64)>,
    pub effect: BoolFormula,
}

fn random_range<R: Rng>(rng: &mut R) -> Range {
    if rng.gen_bool(0.6) {
        Range::binary()
    } else {
        Range::interval(0, 2).unwrap()
    }
}

fn random_expr<R: Rng>(rng: &mut R, inputs: &[VarId], depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.35);
    if leaf {
        if inputs.is_empty() || rng.gen_bool(0.2) {
            return Expr::constant(rng.gen_range(0..=2));
        }
        return Expr::var(*inputs.choose(rng).unwrap());
    }
    let sub = |rng: &mut R| random_expr(rng, inputs, depth - 1);
    match rng.gen_range(0..9) {
        0 => Expr::max(sub(rng), sub(rng)),
        1 => Expr::min(sub(rng), sub(rng)),
        2 => Expr::add(sub(rng), sub(rng)),
        3 => Expr::sub(sub(rng), sub(rng)),
        4 => Expr::mul(sub(rng), sub(rng)),
        5 => Expr::eq(sub(rng), sub(rng)),
        6 => Expr::not(sub(rng)),
        7 => Expr::if_then_else(sub(rng), sub(rng), sub(rng)),
        _ => Expr::binary(causet::BinOp::Ge, sub(rng), sub(rng)),
    }
}

/// `max(lo, min(hi, e))`, so every mechanism stays in its range.
fn clamp(e: Expr, range: &Range) -> Expr {
    Expr::max(Expr::constant(range.min()), Expr::min(Expr::constant(range.max()), e))
}

/// Random acyclic model with 1-2 exogenous and 1-`max_endo` endogenous
/// variables. Declaration order is a shuffle of the dependency order.
pub fn random_model<R: Rng>(rng: &mut R, max_endo: usize) -> CausalModel {
    let n_exo = rng.gen_range(1..=2);
    let n_endo = rng.gen_range(1..=max_endo);
    let exo: Vec<VarDecl> = (0..n_exo)
        .map(|i| VarDecl::new(format!("U{i}"), random_range(rng)))
        .collect();
    let endo: Vec<VarDecl> = (0..n_endo)
        .map(|i| VarDecl::new(format!("V{i}"), random_range(rng)))
        .collect();
    let sig = Signature::new(exo, endo);
    let mut order: Vec<VarId> = sig.endogenous_ids().collect();
    order.shuffle(rng);
    let mut mechanisms = Vec::new();
    for (k, v) in order.iter().enumerate() {
        let mut inputs: Vec<VarId> = sig.exogenous_ids().collect();
        inputs.extend_from_slice(&order[..k]);
        let body = clamp(random_expr(rng, &inputs, 3), sig.range(*v));
        mechanisms.push(Mechanism::new(*v, body));
    }
    CausalModel::new(CandidateModel::new(sig, mechanisms)).expect("generated models are valid")
}

pub fn random_ranking<R: Rng>(rng: &mut R, sig: &Signature) -> RankingFunction {
    let rank = |rng: &mut R| {
        if rng.gen_bool(0.1) {
            Rank::Infinite
        } else {
            Rank::Finite(rng.gen_range(0..4))
        }
    };
    let ids: Vec<VarId> = sig.ids().collect();
    let rules = (0..rng.gen_range(0..5))
        .map(|_| {
            let k = rng.gen_range(1..=ids.len().min(3));
            let vars: Vec<VarId> = ids.choose_multiple(rng, k).copied().collect();
            let pattern = vars
                .into_iter()
                .map(|v| (v, *sig.range(v).values().choose(rng).unwrap()))
                .collect();
            RankingRule::new(pattern, rank(rng))
        })
        .collect();
    let default = rank(rng);
    RankingFunction::new(sig, rules, default).unwrap()
}

pub fn random_context<R: Rng>(rng: &mut R, sig: &Signature) -> Context {
    let values = sig
        .exogenous_ids()
        .map(|v| *sig.range(v).values().choose(rng).unwrap())
        .collect();
    Context::new(sig, values).unwrap()
}

pub fn random_case<R: Rng>(rng: &mut R, max_endo: usize) -> RandomCase {
    let model = random_model(rng, max_endo);
    let sig = model.signature().clone();
    let ranking = random_ranking(rng, &sig);
    let context = random_context(rng, &sig);
    let actual = causet::solve(&model, &context);
    let endo: Vec<VarId> = sig.endogenous_ids().collect();
    let k = if endo.len() >= 2 && rng.gen_bool(0.25) { 2 } else { 1 };
    let mut vars: Vec<VarId> = endo.choose_multiple(rng, k).copied().collect();
    vars.sort();
    let candidate = vars.iter().map(|v| (*v, actual.values()[v.index()])).collect();
    let target = *endo.choose(rng).unwrap();
    // Mostly actual values, so AC1 usually holds.
    let value = if rng.gen_bool(0.8) {
        actual.values()[target.index()]
    } else {
        *sig.range(target).values().choose(rng).unwrap()
    };
    let effect = if rng.gen_bool(0.2) {
        BoolFormula::not(BoolFormula::event(target, value))
    } else {
        BoolFormula::event(target, value)
    };
    RandomCase {
        model,
        ranking,
        context,
        candidate,
        effect,
    }
}

/// The same model with variables renamed and declarations shuffled within
/// the exogenous and endogenous blocks. Returns the copy and the map from
/// old to new variable ids.
pub fn permuted<R: Rng>(rng: &mut R, model: &CausalModel) -> (CausalModel, Vec<VarId>) {
    let sig = model.signature();
    let mut exo: Vec<VarId> = sig.exogenous_ids().collect();
    let mut endo: Vec<VarId> = sig.endogenous_ids().collect();
    exo.shuffle(rng);
    endo.shuffle(rng);
    let mut map = vec![VarId::new(0); sig.len()];
    for (new, old) in exo.iter().chain(&endo).enumerate() {
        map[old.index()] = VarId::new(new);
    }
    let decl = |old: &VarId| VarDecl::new(format!("R_{}", sig.name(*old)), sig.range(*old).clone());
    let new_sig = Signature::new(exo.iter().map(decl).collect(), endo.iter().map(decl).collect());
    let mechanisms = endo
        .iter()
        .map(|old| {
            let body = model.mechanism(*old).map_vars(&mut |v| Expr::var(map[v.index()]));
            Mechanism::new(map[old.index()], body)
        })
        .collect();
    let copy = CausalModel::new(CandidateModel::new(new_sig, mechanisms)).expect("renaming keeps validity");
    (copy, map)
}

pub fn map_context(context: &Context, map: &[VarId], target: &Signature) -> Context {
    let mut values = vec![0; target.exogenous().len()];
    for (old, x) in context.values().iter().enumerate() {
        values[map[old].index()] = *x;
    }
    Context::new(target, values).unwrap()
}

pub fn map_formula(f: &BoolFormula, map: &[VarId]) -> BoolFormula {
    f.try_map_vars(&mut |v: &VarId| Ok::<_, ()>(map[v.index()])).unwrap()
}
