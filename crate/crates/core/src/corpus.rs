//! Built-in example models with their canonical contexts and the verdicts
//! the test suite checks against them.
//!
//! Each fixture ships as `.cm` text. `doctors(n)` is generated for any
//! `1 <= n <= 100`; the plain name `doctors` means `doctors(3)`.
//!
//! The camping story has two rejected encodings. The single fire variable
//! (`C = 1 - F`, `F = C`) is cyclic and is kept as a negative source that
//! must fail validation. The three-valued `F'` encoding (`C = 0` iff
//! `F' = 1`, `F' = 2` iff `C = 1`) is also cyclic; it additionally predicts
//! that igniting a June fire sends the camper camping in early June, which
//! gets the causal order backwards.

use std::fmt::Write;

use thiserror::Error;

use crate::dsl::{parse_model, DslError, ModelDocument};
use crate::semantics::Context;

pub const FIXTURE_NAMES: &[&str] = &[
    "forest-fire-disjunctive",
    "forest-fire-conjunctive",
    "rock-throw-3var",
    "rock-throw-5var",
    "bodyguard",
    "doctors",
    "train-simple",
    "train-blocked",
    "soldiers-trumping",
    "camping",
    "door-alarm",
];

pub const DEFAULT_DOCTORS: usize = 3;
pub const MAX_DOCTORS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("unknown fixture `{name}`; available: {}", FIXTURE_NAMES.join(", "))]
    Unknown { name: String },
    #[error("doctors(n) needs 1 <= n <= {MAX_DOCTORS}, got `{0}`")]
    BadParameter(String),
    #[error("fixture `{name}` does not parse: {error}")]
    Broken { name: String, error: DslError },
}

/// Where an expected verdict comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    /// Conclusion stated in the narrative of the example.
    Stated,
    /// Worked out by hand from the equations.
    Derived,
    /// Computed by the brute-force oracle; no independent narrative claim.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedContext {
    pub name: String,
    pub context: Context,
}

/// One checked query: in `context`, is `candidate` a cause of `effect`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub context: String,
    pub candidate: String,
    pub effect: String,
    pub preliminary: bool,
    /// Verdict with the fixture's ranking, under both normality semantics.
    pub extended: Option<bool>,
    pub provenance: Provenance,
    pub note: Option<&'static str>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub summary: &'static str,
    pub document: ModelDocument,
    pub contexts: Vec<NamedContext>,
    pub expectations: Vec<Expectation>,
}

impl Fixture {
    pub fn context(&self, name: &str) -> Option<&Context> {
        self.contexts.iter().find(|c| c.name == name).map(|c| &c.context)
    }

    /// The first canonical context.
    pub fn default_context(&self) -> &NamedContext {
        &self.contexts[0]
    }
}

const FOREST_FIRE_DISJUNCTIVE: &str = "\
// Lightning or a dropped match is enough to burn the forest.
model forest_fire_disjunctive {
  exogenous  { U_L: {0,1}  U_ML: {0,1} }
  endogenous { L: {0,1}  ML: {0,1}  F: {0,1} }
  equations  { L = U_L   ML = U_ML   F = max(L, ML) }
}
";

const FOREST_FIRE_CONJUNCTIVE: &str = "\
// The forest burns only if lightning and a dropped match both occur.
model forest_fire_conjunctive {
  exogenous  { U_L: {0,1}  U_ML: {0,1} }
  endogenous { L: {0,1}  ML: {0,1}  F: {0,1} }
  equations  { L = U_L   ML = U_ML   F = min(L, ML) }
}
";

const ROCK_THROW_3VAR: &str = "\
// Suzy and Billy both throw; either throw shatters the bottle.
model rock_throw_3var {
  exogenous  { U_ST: {0,1}  U_BT: {0,1} }
  endogenous { ST: {0,1}  BT: {0,1}  BS: {0,1} }
  equations  { ST = U_ST   BT = U_BT   BS = max(ST, BT) }
}
";

const ROCK_THROW_5VAR: &str = "\
// Suzy's rock arrives first, so Billy's only hits an intact bottle.
model rock_throw_5var {
  exogenous  { U_ST: {0,1}  U_BT: {0,1} }
  endogenous { ST: {0,1}  BT: {0,1}  SH: {0,1}  BH: {0,1}  BS: {0,1} }
  equations {
    ST = U_ST
    BT = U_BT
    SH = ST
    BH = min(BT, 1 - SH)
    BS = max(SH, BH)
  }
}
";

const BODYGUARD: &str = "\
// A = 1: the assassin does not poison the coffee. B = 1: the bodyguard adds
// antidote. VS = 1: the victim survives.
model bodyguard {
  exogenous  { U_A: {0,1}  U_B: {0,1} }
  endogenous { A: {0,1}  B: {0,1}  VS: {0,1} }
  equations  { A = U_A   B = U_B   VS = max(A, B) }
  ranking {
    rule A=1, B=0 => 0   // neither poison nor antidote
    rule A=0, B=1 => 2   // both
    default => 1         // exactly one of them
  }
}
";

const TRAIN_SIMPLE: &str = "\
// The tracks reconverge, so the train arrives whichever way it goes.
model train_simple {
  exogenous  { U_S: {0,1} }
  endogenous { S: {0,1}  A: {0,1} }
  equations  { S = U_S   A = max(S, 1 - S) }
}
";

const TRAIN_BLOCKED: &str = "\
// S = 1 sends the train left. It arrives unless its track is blocked.
model train_blocked {
  exogenous  { U_S: {0,1}  U_LB: {0,1}  U_RB: {0,1} }
  endogenous { S: {0,1}  LB: {0,1}  RB: {0,1}  A: {0,1} }
  equations {
    S = U_S
    LB = U_LB
    RB = U_RB
    A = if(S = 1, 1 - LB, 1 - RB)
  }
  ranking {
    rule LB=1 => 1
    rule RB=1 => 1
    default => 0
  }
}
";

const SOLDIERS_TRUMPING: &str = "\
// Orders: 0 none, 1 march, 2 something else. The major outranks the sergeant.
model soldiers_trumping {
  exogenous  { U_M: {0..2}  U_S: {0..2} }
  endogenous { M: {0..2}  S: {0..2}  A: {0..2} }
  equations  { M = U_M   S = U_S   A = if(M != 0, M, S) }
}
";

const CAMPING: &str = "\
// F1: fire in May. C: the camper goes camping. F2: fire in June.
model camping {
  exogenous  { U_F1: {0,1} }
  endogenous { F1: {0,1}  C: {0,1}  F2: {0,1} }
  equations  { F1 = U_F1   C = 1 - F1   F2 = C * (1 - F1) }
}
";

const DOOR_ALARM: &str = "\
// P: 0 no push, 1 normal push, 2 solid push. Only a solid push opens the
// door; any push trips the alarm.
model door_alarm {
  exogenous  { U_P: {0..2} }
  endogenous { P: {0..2}  O: {0,1}  AL: {0,1} }
  equations  { P = U_P   O = (P = 2)   AL = (P >= 1) }
}
";

const CAMPING_CYCLIC: &str = "\
// One fire variable for both months: cyclic, no solution.
model camping_cyclic {
  exogenous  { U: {0,1} }
  endogenous { C: {0,1}  F: {0,1} }
  equations  { C = 1 - F   F = C }
}
";

/// Sources that must be rejected, as `(name, text)`.
pub const NEGATIVE_SOURCES: &[(&str, &str)] = &[("camping-cyclic", CAMPING_CYCLIC)];

/// Text of `doctors(n)`: `A_i` (doctor i assigned), `T_i` (doctor i treats),
/// `S` (sick on Tuesday) with `S = 1 - max(T_1, ..., T_n)`.
pub fn doctors_source(n: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "// {n} doctors; A_i: doctor i is assigned, T_i: doctor i treats, S: sick on Tuesday."
    );
    let _ = writeln!(s, "model doctors_{n} {{");
    let decls = |prefix: &str| {
        (1..=n)
            .flat_map(|i| [format!("{prefix}A{i}: {{0,1}}"), format!("{prefix}T{i}: {{0,1}}")])
            .collect::<Vec<_>>()
    };
    let _ = writeln!(s, "  exogenous {{ {} }}", decls("U_").join("  "));
    let endo: Vec<String> = (1..=n)
        .map(|i| format!("A{i}: {{0,1}}"))
        .chain((1..=n).map(|i| format!("T{i}: {{0,1}}")))
        .chain(["S: {0,1}".to_owned()])
        .collect();
    let _ = writeln!(s, "  endogenous {{ {} }}", endo.join("  "));
    s.push_str("  equations {\n");
    for i in 1..=n {
        let _ = writeln!(s, "    A{i} = U_A{i}");
    }
    for i in 1..=n {
        let _ = writeln!(s, "    T{i} = U_T{i}");
    }
    let ts: Vec<String> = (1..=n).map(|i| format!("T{i}")).collect();
    if n == 1 {
        s.push_str("    S = 1 - T1\n");
    } else {
        let _ = writeln!(s, "    S = 1 - max({})", ts.join(", "));
    }
    s.push_str("  }\n");
    // Patterns fix every A and T, so each rule names one world.
    let world = |assigned: Option<usize>, treating: Option<usize>| {
        (1..=n)
            .map(|k| format!("A{k}={}", u8::from(assigned == Some(k))))
            .chain((1..=n).map(|k| format!("T{k}={}", u8::from(treating == Some(k)))))
            .collect::<Vec<_>>()
            .join(", ")
    };
    s.push_str("  ranking {\n");
    let _ = writeln!(s, "    rule {} => 0", world(None, None));
    for i in 1..=n {
        let _ = writeln!(s, "    rule {} => 1", world(Some(i), Some(i)));
    }
    for i in 1..=n {
        let _ = writeln!(s, "    rule {} => 2", world(Some(i), None));
    }
    for i in 1..=n {
        for j in (1..=n).filter(|&j| j != i) {
            let _ = writeln!(s, "    rule {} => 3", world(Some(i), Some(j)));
        }
    }
    s.push_str("    default => 4\n  }\n}\n");
    s
}

/// Parses `doctors(n)`; `None` if `name` is not of that form.
fn doctors_parameter(name: &str) -> Option<Result<usize, CorpusError>> {
    if name == "doctors" {
        return Some(Ok(DEFAULT_DOCTORS));
    }
    let inner = name.strip_prefix("doctors(")?.strip_suffix(')')?;
    Some(
        inner
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| (1..=MAX_DOCTORS).contains(n))
            .ok_or_else(|| CorpusError::BadParameter(inner.to_owned())),
    )
}

/// Source text of a fixture.
pub fn fixture_source(name: &str) -> Result<String, CorpusError> {
    if let Some(n) = doctors_parameter(name) {
        return Ok(doctors_source(n?));
    }
    let text = match name {
        "forest-fire-disjunctive" => FOREST_FIRE_DISJUNCTIVE,
        "forest-fire-conjunctive" => FOREST_FIRE_CONJUNCTIVE,
        "rock-throw-3var" => ROCK_THROW_3VAR,
        "rock-throw-5var" => ROCK_THROW_5VAR,
        "bodyguard" => BODYGUARD,
        "train-simple" => TRAIN_SIMPLE,
        "train-blocked" => TRAIN_BLOCKED,
        "soldiers-trumping" => SOLDIERS_TRUMPING,
        "camping" => CAMPING,
        "door-alarm" => DOOR_ALARM,
        _ => {
            return Err(CorpusError::Unknown {
                name: name.to_owned(),
            })
        }
    };
    Ok(text.to_owned())
}

struct Spec {
    summary: &'static str,
    contexts: Vec<(String, String)>,
    expectations: Vec<Expectation>,
}

fn ctx(name: &str, text: &str) -> (String, String) {
    (name.to_owned(), text.to_owned())
}

fn expect(
    context: &str,
    candidate: &str,
    effect: &str,
    preliminary: bool,
    extended: Option<bool>,
    provenance: Provenance,
) -> Expectation {
    Expectation {
        context: context.to_owned(),
        candidate: candidate.to_owned(),
        effect: effect.to_owned(),
        preliminary,
        extended,
        provenance,
        note: None,
    }
}

fn noted(mut e: Expectation, note: &'static str) -> Expectation {
    e.note = Some(note);
    e
}

fn doctors_context(n: usize, treats: bool) -> String {
    (1..=n)
        .map(|i| format!("U_A{i}={}", u8::from(i == 1)))
        .chain((1..=n).map(|i| format!("U_T{i}={}", u8::from(treats && i == 1))))
        .collect::<Vec<_>>()
        .join(", ")
}

const NARRATIVE_DISAGREES: &str =
    "the narrative expects not-a-cause, but a world satisfying the AC2(a) setting has rank at most the actual rank";

fn spec(name: &str) -> Spec {
    use Provenance::*;
    if let Some(Ok(n)) = doctors_parameter(name) {
        let mut expectations = vec![
            expect("doctor1-assigned-untreated", "T1=0", "S=1", true, Some(true), Stated),
            expect("doctor1-assigned-treats", "T1=1", "S=0", true, Some(true), Stated),
        ];
        for j in 2..=n {
            expectations.push(noted(
                expect(
                    "doctor1-assigned-untreated",
                    &format!("T{j}=0"),
                    "S=1",
                    true,
                    Some(true),
                    Derived,
                ),
                NARRATIVE_DISAGREES,
            ));
        }
        return Spec {
            summary: "doctor 1 is assigned to Billy; any doctor could treat him",
            contexts: vec![
                ctx("doctor1-assigned-untreated", &doctors_context(n, false)),
                ctx("doctor1-assigned-treats", &doctors_context(n, true)),
            ],
            expectations,
        };
    }
    match name {
        "forest-fire-disjunctive" => Spec {
            summary: "lightning or a match suffices for the fire",
            contexts: vec![
                ctx("both", "U_L=1, U_ML=1"),
                ctx("lightning-only", "U_L=1, U_ML=0"),
            ],
            expectations: vec![
                expect("both", "L=1", "F=1", true, None, Stated),
                expect("both", "ML=1", "F=1", true, None, Stated),
                expect("lightning-only", "L=1", "F=1", true, None, Derived),
                expect("lightning-only", "ML=0", "F=1", false, None, Derived),
            ],
        },
        "forest-fire-conjunctive" => Spec {
            summary: "lightning and a match are both needed for the fire",
            contexts: vec![
                ctx("both", "U_L=1, U_ML=1"),
                ctx("lightning-only", "U_L=1, U_ML=0"),
            ],
            expectations: vec![
                expect("both", "L=1", "F=1", true, None, Stated),
                expect("both", "ML=1", "F=1", true, None, Stated),
                expect("both", "L=1 & ML=1", "F=1", false, None, Derived),
                expect("lightning-only", "ML=0", "F=0", true, None, Derived),
                expect("lightning-only", "L=1", "F=0", false, None, Derived),
            ],
        },
        "rock-throw-3var" => Spec {
            summary: "two throwers, no record of whose rock hits",
            contexts: vec![ctx("both-throw", "U_ST=1, U_BT=1")],
            expectations: vec![
                expect("both-throw", "ST=1", "BS=1", true, None, Stated),
                expect("both-throw", "BT=1", "BS=1", true, None, Stated),
            ],
        },
        "rock-throw-5var" => Spec {
            summary: "Suzy's rock hits first and preempts Billy's",
            contexts: vec![
                ctx("both-throw", "U_ST=1, U_BT=1"),
                ctx("billy-only", "U_ST=0, U_BT=1"),
            ],
            expectations: vec![
                expect("both-throw", "ST=1", "BS=1", true, None, Stated),
                expect("both-throw", "BT=1", "BS=1", false, None, Stated),
                expect("both-throw", "SH=1", "BS=1", true, None, Derived),
                expect("billy-only", "BT=1", "BS=1", true, None, Derived),
            ],
        },
        "bodyguard" => Spec {
            summary: "antidote added to coffee the assassin never poisoned",
            contexts: vec![ctx("assassin-refrains", "U_A=1, U_B=1")],
            expectations: vec![
                noted(
                    expect("assassin-refrains", "B=1", "VS=1", true, Some(true), Derived),
                    NARRATIVE_DISAGREES,
                ),
                expect("assassin-refrains", "A=1", "VS=1", true, Some(true), Derived),
            ],
        },
        "train-simple" => Spec {
            summary: "the switch only chooses between reconverging tracks",
            contexts: vec![ctx("switch-thrown", "U_S=1")],
            expectations: vec![expect("switch-thrown", "S=1", "A=1", false, None, Stated)],
        },
        "train-blocked" => Spec {
            summary: "the switch chooses a track; either track may be blocked",
            contexts: vec![
                ctx("switch-thrown-clear", "U_S=1, U_LB=0, U_RB=0"),
                ctx("switch-thrown-right-blocked", "U_S=1, U_LB=0, U_RB=1"),
            ],
            expectations: vec![
                expect("switch-thrown-clear", "S=1", "A=1", true, Some(false), Stated),
                expect("switch-thrown-clear", "LB=0", "A=1", true, Some(false), Derived),
                expect("switch-thrown-right-blocked", "S=1", "A=1", true, Some(true), Derived),
            ],
        },
        "soldiers-trumping" => Spec {
            summary: "sergeant and major both order a march",
            contexts: vec![
                ctx("both-order-march", "U_M=1, U_S=1"),
                ctx("major-countermands", "U_M=2, U_S=1"),
            ],
            expectations: vec![
                expect("both-order-march", "M=1", "A=1", true, None, Oracle),
                expect("both-order-march", "S=1", "A=1", true, None, Oracle),
                expect("major-countermands", "M=2", "A=2", true, None, Oracle),
                expect("major-countermands", "S=1", "A=2", false, None, Oracle),
            ],
        },
        "camping" => Spec {
            summary: "no fire in May, so the camper goes and starts one in June",
            contexts: vec![ctx("no-may-fire", "U_F1=0"), ctx("may-fire", "U_F1=1")],
            expectations: vec![
                expect("no-may-fire", "C=1", "F2=1", true, None, Derived),
                expect("no-may-fire", "F1=0", "F2=1", true, None, Derived),
                expect("no-may-fire", "F1=0", "C=1", true, None, Derived),
                expect("may-fire", "F1=1", "C=0", true, None, Derived),
            ],
        },
        "door-alarm" => Spec {
            summary: "a solid push opens the door; any push trips the alarm",
            contexts: vec![ctx("solid-push", "U_P=2"), ctx("normal-push", "U_P=1")],
            expectations: vec![
                expect("solid-push", "P=2", "O=1", true, None, Derived),
                expect("solid-push", "P=2", "AL=1", true, None, Derived),
                expect("normal-push", "P=1", "AL=1", true, None, Derived),
                expect("normal-push", "P=1", "O=0", true, None, Derived),
            ],
        },
        _ => unreachable!("names are checked before lookup"),
    }
}

/// Loads a fixture by name; `doctors(n)` selects the number of doctors.
pub fn load_fixture(name: &str) -> Result<Fixture, CorpusError> {
    let source = fixture_source(name)?;
    let broken = |error: DslError| CorpusError::Broken {
        name: name.to_owned(),
        error,
    };
    let document = parse_model(&source).map_err(broken)?;
    let spec = spec(name);
    let contexts = spec
        .contexts
        .into_iter()
        .map(|(cname, text)| {
            crate::dsl::parse_context(&text, document.signature())
                .map(|context| NamedContext { name: cname, context })
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(broken)?;
    let canonical = match doctors_parameter(name) {
        Some(Ok(n)) => format!("doctors({n})"),
        _ => name.to_owned(),
    };
    Ok(Fixture {
        name: canonical,
        summary: spec.summary,
        document,
        contexts,
        expectations: spec.expectations,
    })
}

/// Every registered fixture, with `doctors` at its default size.
pub fn all_fixtures() -> Vec<Fixture> {
    FIXTURE_NAMES
        .iter()
        .map(|n| load_fixture(n).expect("built-in fixtures parse"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_fixture_loads() {
        for f in all_fixtures() {
            assert!(!f.contexts.is_empty(), "{}", f.name);
            for e in &f.expectations {
                assert!(f.context(&e.context).is_some(), "{}: {}", f.name, e.context);
            }
        }
    }

    #[test]
    fn doctors_parameter_forms() {
        assert_eq!(load_fixture("doctors").unwrap().name, "doctors(3)");
        assert_eq!(load_fixture("doctors( 4 )").unwrap().name, "doctors(4)");
        assert_eq!(load_fixture("doctors(1)").unwrap().document.signature().endogenous().len(), 3);
        assert!(matches!(load_fixture("doctors(0)"), Err(CorpusError::BadParameter(_))));
        assert!(matches!(load_fixture("doctors(x)"), Err(CorpusError::BadParameter(_))));
    }

    #[test]
    fn unknown_fixture_lists_the_registry() {
        let err = load_fixture("nonexistent").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nonexistent"));
        for name in FIXTURE_NAMES {
            assert!(msg.contains(name));
        }
    }

    #[test]
    fn negative_sources_fail_validation() {
        for (name, src) in NEGATIVE_SOURCES {
            let err = parse_model(src).unwrap_err();
            assert!(err.to_string().contains("cycle"), "{name}: {err}");
        }
    }
}
