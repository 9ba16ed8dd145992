use causet::causality::{enumerate_causes, Clause, EnumerateOptions, Rejection};
use causet::corpus::load_fixture;
use causet::dsl::{parse_candidate, parse_effect, parse_formula, parse_model};
use causet::semantics::satisfies_all_contexts;
use causet::{
    but_for, check_ac1, compare_verdicts, directed_paths, find_witness, is_actual_cause, satisfies, solve,
    verify_witness, BoolFormula, Candidate, CausalModel, CausalityError, Context, Signature, VarId, Witness,
};

struct Setup {
    model: CausalModel,
    context: Context,
}

impl Setup {
    fn fixture(name: &str, context: &str) -> Self {
        let f = load_fixture(name).unwrap();
        let context = f.context(context).unwrap().clone();
        Setup {
            model: f.document.model,
            context,
        }
    }

    fn sig(&self) -> &Signature {
        self.model.signature()
    }

    fn v(&self, name: &str) -> VarId {
        self.sig().lookup(name).unwrap()
    }

    fn vs(&self, names: &[&str]) -> Vec<VarId> {
        names.iter().map(|n| self.v(n)).collect()
    }

    fn set(&self, pairs: &[(&str, i64)]) -> Vec<(VarId, i64)> {
        pairs.iter().map(|(n, x)| (self.v(n), *x)).collect()
    }

    fn cand(&self, text: &str) -> Candidate {
        parse_candidate(text, self.sig()).unwrap()
    }

    fn effect(&self, text: &str) -> BoolFormula {
        parse_effect(text, self.sig()).unwrap()
    }

    fn is_cause(&self, cand: &str, effect: &str) -> bool {
        is_actual_cause(&self.model, &self.context, &self.cand(cand), &self.effect(effect))
            .unwrap()
            .is_cause
    }

    fn holds(&self, formula: &str) -> bool {
        let f = parse_formula(formula, self.sig()).unwrap();
        satisfies(&self.model, &self.context, &f).unwrap()
    }

    /// Witness with `Z = V \ W` and `z*` read off the actual world.
    fn witness(&self, w: &[(&str, i64)], x_prime: &[(&str, i64)]) -> Witness {
        let w_values = self.set(w);
        let w_set: Vec<VarId> = w_values.iter().map(|(v, _)| *v).collect();
        let actual = solve(&self.model, &self.context);
        let z_set: Vec<VarId> = self.sig().endogenous_ids().filter(|v| !w_set.contains(v)).collect();
        let z_star = z_set.iter().map(|v| (*v, actual.get(*v))).collect();
        Witness {
            z_set,
            w_set,
            x_prime: self.set(x_prime),
            w_values,
            z_star,
        }
    }
}

#[test]
fn solving_the_story_models() {
    let fire = Setup::fixture("forest-fire-disjunctive", "both");
    let world = solve(&fire.model, &fire.context);
    assert_eq!(world.display(fire.sig()).to_string(), "U_L=1, U_ML=1, L=1, ML=1, F=1");

    let rocks = Setup::fixture("rock-throw-5var", "both-throw");
    let world = solve(&rocks.model, &rocks.context);
    for (n, x) in [("SH", 1), ("BH", 0), ("BS", 1)] {
        assert_eq!(world.get(rocks.v(n)), x, "{n}");
    }
}

#[test]
fn counterfactuals_about_the_fire() {
    let fire = Setup::fixture("forest-fire-disjunctive", "both");
    assert!(fire.holds("[ML<-0](F=1)"));
    assert!(fire.holds("[L<-0, ML<-0](F=0)"));
    assert!(fire.holds("L=1 & ML=1 & F=1"));

    let conj = load_fixture("forest-fire-conjunctive").unwrap().document.model;
    let sig = conj.signature();
    assert!(satisfies_all_contexts(&conj, &parse_formula("[L<-0](F=0)", sig).unwrap()).unwrap());
    let disj = &fire.model;
    assert!(!satisfies_all_contexts(disj, &parse_formula("F=1", fire.sig()).unwrap()).unwrap());
    assert!(satisfies_all_contexts(disj, &parse_formula("F=0 | !(F=0)", fire.sig()).unwrap()).unwrap());
}

#[test]
fn ac1_checks_the_actual_world() {
    let fire = Setup::fixture("forest-fire-disjunctive", "both");
    let run = |c: &str, e: &str| check_ac1(&fire.model, &fire.context, &fire.cand(c), &fire.effect(e)).unwrap();
    assert!(run("L=1", "F=1"));
    assert!(!run("L=0", "F=1"));
    assert!(!run("L=1", "F=0"));
}

#[test]
fn verify_the_textbook_witnesses() {
    let fire = Setup::fixture("forest-fire-disjunctive", "both");
    let w = fire.witness(&[("ML", 0)], &[("L", 0)]);
    assert_eq!(w.z_set, fire.vs(&["L", "F"]));
    let check = verify_witness(&fire.model, &fire.context, &fire.cand("L=1"), &fire.effect("F=1"), &w).unwrap();
    assert!(check.passed());

    let conj = Setup::fixture("forest-fire-conjunctive", "both");
    let w = conj.witness(&[("ML", 1)], &[("L", 0)]);
    let check = verify_witness(&conj.model, &conj.context, &conj.cand("L=1"), &conj.effect("F=1"), &w).unwrap();
    assert!(check.passed());

    let rocks = Setup::fixture("rock-throw-5var", "both-throw");
    let w = rocks.witness(&[("ST", 0)], &[("BT", 0)]);
    let check = verify_witness(&rocks.model, &rocks.context, &rocks.cand("BT=1"), &rocks.effect("BS=1"), &w).unwrap();
    assert!(check.ac2a, "with Suzy held back, Billy's throw matters");
    let cex = check.ac2b.expect("AC2(b) fails");
    assert_eq!(cex.z_subset, rocks.vs(&["BH"]));
}

#[test]
fn malformed_witnesses_are_rejected() {
    let fire = Setup::fixture("forest-fire-disjunctive", "both");
    let (c, e) = (fire.cand("L=1"), fire.effect("F=1"));
    let good = fire.witness(&[("ML", 0)], &[("L", 0)]);
    let mut overlap = good.clone();
    overlap.z_set.push(fire.v("ML"));
    let mut stray = good.clone();
    stray.z_star[0].1 = 0;
    let mut no_x = good.clone();
    no_x.x_prime.clear();
    for bad in [overlap, stray, no_x] {
        assert!(matches!(
            verify_witness(&fire.model, &fire.context, &c, &e, &bad),
            Err(CausalityError::MalformedWitness(_))
        ));
    }
}

#[test]
fn witness_search() {
    let rocks = Setup::fixture("rock-throw-5var", "both-throw");
    let w = find_witness(&rocks.model, &rocks.context, &rocks.cand("ST=1"), &rocks.effect("BS=1"))
        .unwrap()
        .unwrap();
    assert_eq!(w.w_set, rocks.vs(&["BT"]));
    assert_eq!(w.w_values, rocks.set(&[("BT", 0)]));
    assert_eq!(w.z_set, rocks.vs(&["ST", "SH", "BH", "BS"]));
    assert!(find_witness(&rocks.model, &rocks.context, &rocks.cand("BT=1"), &rocks.effect("BS=1"))
        .unwrap()
        .is_none());

    let single = parse_model("model one { exogenous { U: {0,1} } endogenous { X: {0,1} } equations { X = U } }")
        .unwrap()
        .model;
    let sig = single.signature();
    let ctx = Context::from_pairs(sig, &[("U", 1)]).unwrap();
    let x = parse_candidate("X=1", sig).unwrap();
    let w = find_witness(&single, &ctx, &x, &parse_effect("X=1", sig).unwrap()).unwrap().unwrap();
    assert!(w.w_set.is_empty());
    assert_eq!(w.x_prime, vec![(sig.lookup("X").unwrap(), 0)]);
}

#[test]
fn returned_witnesses_verify() {
    for (name, ctx, cand, effect) in [
        ("forest-fire-disjunctive", "both", "ML=1", "F=1"),
        ("forest-fire-conjunctive", "both", "ML=1", "F=1"),
        ("rock-throw-5var", "both-throw", "SH=1", "BS=1"),
        ("train-blocked", "switch-thrown-clear", "S=1", "A=1"),
        ("soldiers-trumping", "both-order-march", "M=1", "A=1"),
    ] {
        let s = Setup::fixture(name, ctx);
        let (c, e) = (s.cand(cand), s.effect(effect));
        let w = find_witness(&s.model, &s.context, &c, &e).unwrap().expect(name);
        assert!(verify_witness(&s.model, &s.context, &c, &e, &w).unwrap().passed(), "{name}");
    }
}

#[test]
fn verdicts_from_the_stories() {
    let fire = Setup::fixture("forest-fire-disjunctive", "both");
    assert!(fire.is_cause("L=1", "F=1"));
    assert!(fire.is_cause("ML=1", "F=1"));
    let pair = is_actual_cause(&fire.model, &fire.context, &fire.cand("L=1 & ML=1"), &fire.effect("F=1")).unwrap();
    assert!(!pair.is_cause);
    assert_eq!(pair.failed_clause, Some(Clause::Ac3));

    let rocks3 = Setup::fixture("rock-throw-3var", "both-throw");
    assert!(rocks3.is_cause("ST=1", "BS=1"));
    assert!(rocks3.is_cause("BT=1", "BS=1"));

    let rocks5 = Setup::fixture("rock-throw-5var", "both-throw");
    let billy = is_actual_cause(&rocks5.model, &rocks5.context, &rocks5.cand("BT=1"), &rocks5.effect("BS=1")).unwrap();
    assert_eq!(billy.failed_clause, Some(Clause::Ac2));
    assert!(billy
        .near_misses
        .iter()
        .all(|m| matches!(m.rejection, Rejection::Ac2b(_))));

    let wrong = is_actual_cause(&fire.model, &fire.context, &fire.cand("L=0"), &fire.effect("F=1")).unwrap();
    assert_eq!(wrong.failed_clause, Some(Clause::Ac1));
}

#[test]
fn but_for_dependence() {
    let rocks = Setup::fixture("rock-throw-5var", "both-throw");
    assert!(!but_for(&rocks.model, &rocks.context, &rocks.cand("ST=1"), &rocks.effect("BS=1")).unwrap());
    let conj = Setup::fixture("forest-fire-conjunctive", "both");
    assert!(but_for(&conj.model, &conj.context, &conj.cand("L=1"), &conj.effect("F=1")).unwrap());
    let disj = Setup::fixture("forest-fire-disjunctive", "both");
    assert!(!but_for(&disj.model, &disj.context, &disj.cand("L=1"), &disj.effect("F=1")).unwrap());
}

#[test]
fn enumeration() {
    let fire = Setup::fixture("forest-fire-disjunctive", "both");
    let found = enumerate_causes(&fire.model, &fire.context, &fire.effect("F=1"), &EnumerateOptions::new(1)).unwrap();
    let names: Vec<String> = found.iter().map(|(c, _)| c.display(fire.sig()).to_string()).collect();
    assert_eq!(names, ["L=1", "ML=1"]);

    let mut with_self = EnumerateOptions::new(1);
    with_self.exclude_effect_variables = false;
    let found = enumerate_causes(&fire.model, &fire.context, &fire.effect("F=1"), &with_self).unwrap();
    let names: Vec<String> = found.iter().map(|(c, _)| c.display(fire.sig()).to_string()).collect();
    assert_eq!(names, ["L=1", "ML=1", "F=1"]);

    let rocks = Setup::fixture("rock-throw-5var", "both-throw");
    let found = enumerate_causes(&rocks.model, &rocks.context, &rocks.effect("BS=1"), &EnumerateOptions::new(2)).unwrap();
    let names: Vec<String> = found.iter().map(|(c, _)| c.display(rocks.sig()).to_string()).collect();
    assert!(names.contains(&"ST=1".to_owned()));
    assert!(!names.contains(&"BT=1".to_owned()));
    // AC3: no returned pair has a conjunct that is a cause on its own.
    for (c, _) in found.iter().filter(|(c, _)| c.len() == 2) {
        for (v, x) in c.conjuncts() {
            let single = Candidate::single(rocks.sig(), *v, *x).unwrap();
            assert!(!is_actual_cause(&rocks.model, &rocks.context, &single, &rocks.effect("BS=1")).unwrap().is_cause);
        }
    }

    let conj = Setup::fixture("forest-fire-conjunctive", "lightning-only");
    assert!(matches!(
        enumerate_causes(&conj.model, &conj.context, &conj.effect("F=1"), &EnumerateOptions::new(1)),
        Err(CausalityError::NotActual(_))
    ));
}

#[test]
fn paths_between_variables() {
    let rocks5 = Setup::fixture("rock-throw-5var", "both-throw");
    let paths = directed_paths(&rocks5.model, rocks5.v("ST"), rocks5.v("BS"));
    assert_eq!(paths, vec![rocks5.vs(&["ST", "SH", "BS"]), rocks5.vs(&["ST", "SH", "BH", "BS"])]);
    let rocks3 = Setup::fixture("rock-throw-3var", "both-throw");
    assert_eq!(directed_paths(&rocks3.model, rocks3.v("ST"), rocks3.v("BS")), vec![rocks3.vs(&["ST", "BS"])]);
    assert!(directed_paths(&rocks3.model, rocks3.v("ST"), rocks3.v("BT")).is_empty());
}

#[test]
fn comparing_refinements() {
    let rocks3 = Setup::fixture("rock-throw-3var", "both-throw");
    let rocks5 = Setup::fixture("rock-throw-5var", "both-throw");
    let cand = vec![("BT".to_owned(), 1)];
    let effect = BoolFormula::event("BS".to_owned(), 1);
    let cmp = compare_verdicts(
        &[(&rocks3.model, &rocks3.context), (&rocks5.model, &rocks5.context)],
        &cand,
        &effect,
    );
    let verdicts: Vec<bool> = cmp.rows.iter().map(|r| r.verdict.as_ref().unwrap().is_cause).collect();
    assert_eq!(verdicts, [true, false]);
    assert!(!cmp.stable);
    assert_eq!(cmp.topology_changed, [true]);

    let same = compare_verdicts(
        &[(&rocks5.model, &rocks5.context), (&rocks5.model, &rocks5.context)],
        &cand,
        &effect,
    );
    assert!(same.stable);
    assert_eq!(same.topology_changed, [false]);

    let simple = Setup::fixture("train-simple", "switch-thrown");
    let blocked = Setup::fixture("train-blocked", "switch-thrown-clear");
    let cmp = compare_verdicts(
        &[(&simple.model, &simple.context), (&blocked.model, &blocked.context)],
        &[("S".to_owned(), 1)],
        &BoolFormula::event("A".to_owned(), 1),
    );
    let verdicts: Vec<bool> = cmp.rows.iter().map(|r| r.verdict.as_ref().unwrap().is_cause).collect();
    assert_eq!(verdicts, [false, true]);

    let missing = compare_verdicts(
        &[(&rocks5.model, &rocks5.context), (&rocks3.model, &rocks3.context)],
        &[("SH".to_owned(), 1)],
        &effect,
    );
    assert!(missing.rows[0].verdict.is_ok());
    assert!(missing.rows[1].verdict.is_err());
    assert!(!missing.stable);
}

#[test]
fn verdicts_are_deterministic() {
    let s = Setup::fixture("soldiers-trumping", "both-order-march");
    let run = || is_actual_cause(&s.model, &s.context, &s.cand("S=1"), &s.effect("A=1")).unwrap();
    assert_eq!(run(), run());
}
