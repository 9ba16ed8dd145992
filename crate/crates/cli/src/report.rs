//! Machine-readable results and their human renderings.
//!
//! Every JSON document has a `command` field first; the remaining fields are
//! emitted in declaration order, so the output is stable across runs.

use std::fmt::Write;

use causet::causality::{NearMiss, Rejection, SearchStats};
use causet::{Candidate, Context, Rank, Signature, VarId, Verdict, Witness};
use serde::Serialize;

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Setting {
    pub var: String,
    pub value: i64,
}

pub fn settings(sig: &Signature, pairs: &[(VarId, i64)]) -> Vec<Setting> {
    pairs
        .iter()
        .map(|(v, x)| Setting {
            var: sig.name(*v).to_owned(),
            value: *x,
        })
        .collect()
}

pub fn context_settings(sig: &Signature, ctx: &Context) -> Vec<Setting> {
    let pairs: Vec<(VarId, i64)> = sig.exogenous_ids().map(|v| (v, ctx.get(v))).collect();
    settings(sig, &pairs)
}

fn names(sig: &Signature, vars: &[VarId]) -> Vec<String> {
    vars.iter().map(|v| sig.name(*v).to_owned()).collect()
}

/// Finite ranks are numbers, the infinite rank is the string `"inf"`.
#[derive(Debug, Clone, Copy)]
pub struct RankJson(pub Rank);

impl Serialize for RankJson {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Rank::Finite(n) => s.serialize_u64(n),
            Rank::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessJson {
    pub z: Vec<String>,
    pub w: Vec<Setting>,
    pub x_prime: Vec<Setting>,
    pub z_star: Vec<Setting>,
}

impl WitnessJson {
    pub fn new(sig: &Signature, w: &Witness) -> Self {
        WitnessJson {
            z: names(sig, &w.z_set),
            w: settings(sig, &w.w_values),
            x_prime: settings(sig, &w.x_prime),
            z_star: settings(sig, &w.z_star),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StatsJson {
    pub partitions: u64,
    pub settings: u64,
    pub subset_checks: u64,
}

impl From<SearchStats> for StatsJson {
    fn from(s: SearchStats) -> Self {
        StatsJson {
            partitions: s.partitions,
            settings: s.settings,
            subset_checks: s.subset_checks,
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectionJson {
    Ac2b { w_subset: Vec<String>, z_subset: Vec<String> },
    Abnormal { best_rank: RankJson, actual_rank: RankJson },
}

#[derive(Debug, Serialize)]
pub struct NearMissJson {
    pub w: Vec<Setting>,
    pub x_prime: Vec<Setting>,
    pub rejection: RejectionJson,
}

impl NearMissJson {
    fn new(sig: &Signature, m: &NearMiss) -> Self {
        NearMissJson {
            w: settings(sig, &m.w_values),
            x_prime: settings(sig, &m.x_prime),
            rejection: match &m.rejection {
                Rejection::Ac2b(c) => RejectionJson::Ac2b {
                    w_subset: names(sig, &c.w_subset),
                    z_subset: names(sig, &c.z_subset),
                },
                Rejection::Abnormal {
                    best_rank,
                    actual_rank,
                } => RejectionJson::Abnormal {
                    best_rank: RankJson(*best_rank),
                    actual_rank: RankJson(*actual_rank),
                },
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Query {
    pub model: String,
    pub context: Vec<Setting>,
    /// `preliminary` or `extended`.
    pub mode: &'static str,
    pub semantics: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct CauseResult {
    pub command: &'static str,
    #[serde(flatten)]
    pub query: Query,
    pub candidate: Vec<Setting>,
    pub effect: String,
    pub is_cause: bool,
    pub failed_clause: Option<String>,
    pub witness: Option<WitnessJson>,
    pub stats: StatsJson,
    pub near_misses: Vec<NearMissJson>,
}

impl CauseResult {
    pub fn new(sig: &Signature, query: Query, candidate: &Candidate, effect: String, v: &Verdict) -> Self {
        CauseResult {
            command: "cause",
            query,
            candidate: settings(sig, candidate.conjuncts()),
            effect,
            is_cause: v.is_cause,
            failed_clause: v.failed_clause.map(|c| c.to_string()),
            witness: v.witness.as_ref().map(|w| WitnessJson::new(sig, w)),
            stats: v.stats.into(),
            near_misses: v.near_misses.iter().map(|m| NearMissJson::new(sig, m)).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CauseRow {
    pub candidate: Vec<Setting>,
    pub witness: WitnessJson,
}

#[derive(Debug, Serialize)]
pub struct CausesResult {
    pub command: &'static str,
    #[serde(flatten)]
    pub query: Query,
    pub effect: String,
    pub max_conjuncts: usize,
    pub causes: Vec<CauseRow>,
}

#[derive(Debug, Serialize)]
pub struct EvalResult {
    pub command: &'static str,
    pub model: String,
    pub context: Vec<Setting>,
    pub formula: String,
    pub value: bool,
}

#[derive(Debug, Serialize)]
pub struct Located {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Serialize)]
pub struct ValidateResult {
    pub command: &'static str,
    pub model: String,
    pub valid: bool,
    pub name: Option<String>,
    pub exogenous: Vec<String>,
    pub endogenous: Vec<String>,
    pub topological_order: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub ranked: bool,
    pub violations: Vec<Located>,
}

#[derive(Debug, Serialize)]
pub struct CompareRow {
    pub model: String,
    pub context: Vec<Setting>,
    pub is_cause: Option<bool>,
    pub failed_clause: Option<String>,
    pub error: Option<String>,
    pub paths: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct CompareResult {
    pub command: &'static str,
    pub candidate: String,
    pub effect: String,
    pub stable: bool,
    pub rows: Vec<CompareRow>,
    pub topology_changed: Vec<bool>,
}

#[derive(Debug, Serialize)]
pub struct FixtureEntry {
    pub name: String,
    pub summary: String,
    pub exogenous: usize,
    pub endogenous: usize,
    pub ranked: bool,
    pub contexts: Vec<String>,
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

fn plain(s: &[Setting]) -> String {
    s.iter().map(|x| format!("{}={}", x.var, x.value)).collect::<Vec<_>>().join(", ")
}

fn set(names: &[String]) -> String {
    format!("{{{}}}", names.join(", "))
}

fn describe_query(q: &Query) -> String {
    let mut s = format!("in {}", q.model);
    if !q.context.is_empty() {
        let _ = write!(s, " under {}", plain(&q.context));
    }
    if let Some(sem) = &q.semantics {
        let _ = write!(s, " (extended, {sem} semantics)");
    }
    s
}

fn witness_line(w: &WitnessJson, verbose: bool) -> String {
    let ws: Vec<String> = w.w.iter().map(|s| s.var.clone()).collect();
    let mut line = format!("W = {}", set(&ws));
    if !w.w.is_empty() {
        let _ = write!(line, ", w: {}", plain(&w.w));
    }
    let _ = write!(line, ", x': {}", plain(&w.x_prime));
    if verbose {
        let _ = write!(line, ", Z = {}, z*: {}", set(&w.z), plain(&w.z_star));
    }
    line
}

pub fn render_cause(r: &CauseResult, verbose: bool) -> String {
    let cand = plain(&r.candidate).replace(", ", " & ");
    let mut out = String::new();
    if r.is_cause {
        let _ = writeln!(out, "{cand} is an actual cause of {} {}", r.effect, describe_query(&r.query));
        if let Some(w) = &r.witness {
            let _ = writeln!(out, "  witness: {}", witness_line(w, verbose));
        }
    } else {
        let clause = r.failed_clause.as_deref().unwrap_or("?");
        let _ = writeln!(
            out,
            "{cand} is not an actual cause of {} {}: {clause} fails",
            r.effect,
            describe_query(&r.query)
        );
    }
    if verbose {
        let _ = writeln!(
            out,
            "  search: {} partitions, {} settings, {} subset checks",
            r.stats.partitions, r.stats.settings, r.stats.subset_checks
        );
        for m in &r.near_misses {
            let ws: Vec<String> = m.w.iter().map(|s| s.var.clone()).collect();
            let why = match &m.rejection {
                RejectionJson::Ac2b { w_subset, z_subset } => {
                    format!("AC2(b) fails with W' = {}, Z' = {}", set(w_subset), set(z_subset))
                }
                RejectionJson::Abnormal {
                    best_rank,
                    actual_rank,
                } => format!(
                    "abnormal: best rank {} exceeds actual rank {}",
                    best_rank.0, actual_rank.0
                ),
            };
            let _ = writeln!(
                out,
                "  rejected: W = {}, w: {}, x': {}: {why}",
                set(&ws),
                plain(&m.w),
                plain(&m.x_prime)
            );
        }
    }
    out
}

pub fn render_causes(r: &CausesResult, verbose: bool) -> String {
    let mut out = String::new();
    if r.causes.is_empty() {
        let _ = writeln!(
            out,
            "no causes of {} with at most {} conjuncts {}",
            r.effect,
            r.max_conjuncts,
            describe_query(&r.query)
        );
        return out;
    }
    let _ = writeln!(out, "causes of {} {}:", r.effect, describe_query(&r.query));
    let cands: Vec<String> = r.causes.iter().map(|c| plain(&c.candidate).replace(", ", " & ")).collect();
    let width = cands.iter().map(String::len).max().unwrap_or(0);
    for (c, row) in cands.iter().zip(&r.causes) {
        let _ = writeln!(out, "  {c:<width$}  {}", witness_line(&row.witness, verbose));
    }
    out
}

pub fn render_validate(r: &ValidateResult) -> String {
    let mut out = String::new();
    if r.valid {
        let _ = writeln!(
            out,
            "{}: valid model `{}` ({} exogenous, {} endogenous{})",
            r.model,
            r.name.as_deref().unwrap_or(""),
            r.exogenous.len(),
            r.endogenous.len(),
            if r.ranked { ", ranked" } else { "" }
        );
        let _ = writeln!(out, "  order: {}", r.topological_order.join(", "));
    } else {
        let _ = writeln!(out, "{}: invalid model", r.model);
        for v in &r.violations {
            let _ = writeln!(out, "  {}:{}: {}", v.line, v.column, v.message);
        }
    }
    out
}

pub fn render_compare(r: &CompareResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} -> {}", r.candidate, r.effect);
    let width = r.rows.iter().map(|row| row.model.len()).max().unwrap_or(0);
    for (i, row) in r.rows.iter().enumerate() {
        let verdict = match (&row.error, row.is_cause) {
            (Some(e), _) => format!("error: {e}"),
            (None, Some(true)) => "cause".to_owned(),
            (None, _) => format!("not a cause ({} fails)", row.failed_clause.as_deref().unwrap_or("?")),
        };
        let paths: Vec<String> = row.paths.iter().map(|p| p.join("->")).collect();
        let _ = writeln!(out, "  {:<width$}  {verdict}; paths: {}", row.model, set(&paths));
        if let Some(changed) = r.topology_changed.get(i) {
            if *changed {
                let _ = writeln!(out, "    path topology changes in the next model");
            }
        }
    }
    let _ = writeln!(out, "{}", if r.stable { "stable" } else { "unstable" });
    out
}
