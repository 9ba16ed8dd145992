mod common;

use causet::corpus::{all_fixtures, load_fixture, Fixture, FIXTURE_NAMES};
use causet::dsl::{parse_candidate, parse_effect, parse_model, print_model};
use causet::normality::{is_actual_cause_extended, NormalitySemantics};
use causet::is_actual_cause;

use common::Oracle;

fn check_expectations(f: &Fixture) {
    let sig = f.document.signature();
    let ext = f.document.extended();
    for e in &f.expectations {
        let ctx = f.context(&e.context).unwrap();
        let cand = parse_candidate(&e.candidate, sig).unwrap();
        let effect = parse_effect(&e.effect, sig).unwrap();
        let label = format!("{} / {} / {} -> {}", f.name, e.context, e.candidate, e.effect);
        let v = is_actual_cause(&f.document.model, ctx, &cand, &effect).unwrap();
        assert_eq!(v.is_cause, e.preliminary, "preliminary: {label}");
        let oracle = Oracle::new(&f.document.model, ctx);
        assert_eq!(oracle.is_cause(cand.conjuncts(), &effect), e.preliminary, "oracle: {label}");
        if let Some(expected) = e.extended {
            let ext = ext.as_ref().expect("extended expectation needs a ranking");
            for sem in [NormalitySemantics::Literal, NormalitySemantics::Solution] {
                let v = is_actual_cause_extended(ext, ctx, &cand, &effect, sem).unwrap();
                assert_eq!(v.is_cause, expected, "extended ({sem}): {label}");
            }
        }
    }
}

#[test]
fn expected_verdicts_hold() {
    for f in all_fixtures() {
        check_expectations(&f);
    }
}

#[test]
fn doctors_verdicts_do_not_depend_on_the_number_of_doctors() {
    for n in [2, 3, 4] {
        check_expectations(&load_fixture(&format!("doctors({n})")).unwrap());
    }
}

#[test]
fn fixtures_round_trip_through_the_printer() {
    for name in FIXTURE_NAMES {
        let f = load_fixture(name).unwrap();
        let text = print_model(&f.document);
        let again = parse_model(&text).unwrap();
        assert_eq!(again, f.document, "{name}");
        assert_eq!(print_model(&again), text, "{name}: printing is idempotent");
    }
}

#[test]
fn rock_throw_5var_equations() {
    let f = load_fixture("rock-throw-5var").unwrap();
    let text = print_model(&f.document);
    assert!(text.contains("SH = ST"));
    assert!(text.contains("BH = min(BT, 1 - SH)"));
    assert!(text.contains("BS = max(SH, BH)"));
}

#[test]
fn bodyguard_ranking_ladder() {
    let f = load_fixture("bodyguard").unwrap();
    let ranking = f.document.ranking.as_ref().unwrap();
    // [U_A, U_B, A, B, VS]; A = 1 means no poison.
    let rank = |a: i64, b: i64| ranking.rank(&[a, b, a, b, a.max(b)]);
    assert_eq!(rank(1, 0).to_string(), "0");
    assert_eq!(rank(0, 0).to_string(), "1");
    assert_eq!(rank(1, 1).to_string(), "1");
    assert_eq!(rank(0, 1).to_string(), "2");
}

#[test]
fn small_fixtures_agree_with_the_oracle_on_every_singleton() {
    for f in all_fixtures() {
        let sig = f.document.signature();
        if sig.endogenous().len() > 6 {
            continue;
        }
        for nc in &f.contexts {
            let actual = causet::solve(&f.document.model, &nc.context);
            let oracle = Oracle::new(&f.document.model, &nc.context);
            for x in sig.endogenous_ids() {
                for y in sig.endogenous_ids() {
                    let cand = causet::Candidate::single(sig, x, actual.values()[x.index()]).unwrap();
                    let effect = causet::BoolFormula::event(y, actual.values()[y.index()]);
                    let v = is_actual_cause(&f.document.model, &nc.context, &cand, &effect).unwrap();
                    assert_eq!(
                        v.is_cause,
                        oracle.is_cause(cand.conjuncts(), &effect),
                        "{} {} {}->{}",
                        f.name,
                        nc.name,
                        sig.name(x),
                        sig.name(y)
                    );
                }
            }
        }
    }
}
