//! The `.cm` text format for models, optional rankings, contexts and formulas.
//!
//! ```text
//! model forest_fire_disjunctive {
//!   exogenous  { U_L: {0,1}  U_ML: {0,1} }
//!   endogenous { L: {0,1}  ML: {0,1}  F: {0,1} }
//!   equations  { L = U_L   ML = U_ML   F = max(L, ML) }
//! }
//! ```
//!
//! An optional `ranking { rule A=1, B=0 => 0  default => 1 }` block after the
//! equations turns the document into an extended model. Entries may be
//! separated by whitespace, `;` or `,`; `//` and `#` start line comments.
//!
//! Expressions use `max(..)`, `min(..)`, `if(c, a, b)`, `+ - *`, comparisons
//! (`= != < <= > >=`, yielding 0 or 1) and the boolean operators `& | !`
//! (minimum, maximum and `1 - (x != 0)`).

mod lexer;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

use crate::causality::Candidate;
use crate::model::{CandidateModel, CausalModel, Mechanism, Signature, Violation};
use crate::normality::{ExtendedCausalModel, RankingFunction, RankingRule};
use crate::semantics::{BoolFormula, CausalFormula, Context};

use lexer::{lex, utf8_error_position, Pos};
use parser::{semantic, Parser};

pub use parser::{MAX_DEPTH, MAX_RANGE_VALUES};
pub use printer::print_model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    Semantic,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::Lexical => "lexical",
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::Semantic => "semantic",
        })
    }
}

/// One located problem. Lines and columns start at 1; columns count
/// characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {} error: {}", self.line, self.column, self.kind, self.message)
    }
}

/// Parse failure. Lexical and syntax errors stop the parse, so they come
/// alone; semantic errors are collected and reported in source order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct DslError {
    pub diagnostics: Vec<Diagnostic>,
}

impl DslError {
    pub fn kind(&self) -> DiagnosticKind {
        self.diagnostics[0].kind
    }

    pub fn first(&self) -> &Diagnostic {
        &self.diagnostics[0]
    }
}

impl From<Diagnostic> for DslError {
    fn from(d: Diagnostic) -> Self {
        DslError { diagnostics: vec![d] }
    }
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.diagnostics.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A parsed model file: the validated model, its optional ranking and the
/// text it came from. Equality ignores the source text.
#[derive(Debug, Clone)]
pub struct ModelDocument {
    pub name: String,
    pub model: CausalModel,
    pub ranking: Option<RankingFunction>,
    pub source: String,
}

impl PartialEq for ModelDocument {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.model == other.model && self.ranking == other.ranking
    }
}

impl Eq for ModelDocument {}

impl ModelDocument {
    /// Wraps a programmatically built model; the source is its canonical
    /// text.
    pub fn new(name: impl Into<String>, model: CausalModel, ranking: Option<RankingFunction>) -> Self {
        let mut doc = ModelDocument {
            name: name.into(),
            model,
            ranking,
            source: String::new(),
        };
        doc.source = print_model(&doc);
        doc
    }

    pub fn signature(&self) -> &Signature {
        self.model.signature()
    }

    /// The model with its ranking attached, if it has one.
    pub fn extended(&self) -> Option<ExtendedCausalModel> {
        let ranking = self.ranking.clone()?;
        ExtendedCausalModel::new(self.model.clone(), ranking).ok()
    }
}

fn finish<T>(p: &mut Parser, value: T) -> Result<T, DslError> {
    if p.semantic.is_empty() {
        Ok(value)
    } else {
        Err(fail(std::mem::take(&mut p.semantic)))
    }
}

fn fail(mut diagnostics: Vec<Diagnostic>) -> DslError {
    diagnostics.sort_by_key(|d| (d.line, d.column));
    DslError { diagnostics }
}

fn parser_for(text: &str) -> Result<Parser, DslError> {
    Ok(Parser::new(lex(text)?))
}

pub fn parse_model(text: &str) -> Result<ModelDocument, DslError> {
    let mut p = parser_for(text)?;
    let parsed = p.model()?;
    let parsed = finish(&mut p, parsed)?;

    let n_exo = parsed.exogenous.len();
    let decl_pos: Vec<Pos> = parsed
        .exogenous
        .iter()
        .chain(&parsed.endogenous)
        .map(|d| d.pos)
        .collect();
    let signature = Signature::new(
        parsed.exogenous.into_iter().map(|d| d.decl).collect(),
        parsed.endogenous.into_iter().map(|d| d.decl).collect(),
    );
    let mut eq_pos: Vec<Option<Pos>> = vec![None; signature.len()];
    let mut mechanisms = Vec::new();
    let mut diags = Vec::new();
    for eq in parsed.equations {
        let target = eq.target.expect("unresolved targets were reported");
        let name = signature.name(target);
        if target.index() < n_exo {
            diags.push(semantic(
                eq.pos,
                format!("`{name}` is exogenous and cannot have an equation"),
            ));
        } else if let Some(first) = eq_pos[target.index()] {
            diags.push(semantic(
                eq.pos,
                format!(
                    "second equation for `{name}` (first at {}:{})",
                    first.line, first.column
                ),
            ));
        } else {
            eq_pos[target.index()] = Some(eq.pos);
            mechanisms.push(Mechanism {
                target,
                body: eq.body,
            });
        }
    }
    for v in signature.endogenous_ids() {
        if eq_pos[v.index()].is_none() {
            diags.push(semantic(
                decl_pos[v.index()],
                format!("`{}` has no equation", signature.name(v)),
            ));
        }
    }
    if diags.is_empty() && signature.endogenous().is_empty() {
        diags.push(semantic(
            Pos { line: 1, column: 1 },
            "a model needs at least one endogenous variable",
        ));
    }
    if !diags.is_empty() {
        return Err(fail(diags));
    }

    let candidate = CandidateModel {
        signature,
        mechanisms,
    };
    let report = candidate.validate();
    if !report.is_valid() {
        let sig = &candidate.signature;
        return Err(fail(
            report
                .violations
                .iter()
                .map(|v| semantic(violation_pos(v, &eq_pos, &decl_pos), v.describe(sig)))
                .collect(),
        ));
    }
    let model = CausalModel::new(candidate).expect("validated above");
    let ranking = parsed.ranking.map(|r| {
        let rules = r
            .rules
            .into_iter()
            .map(|(pattern, rank)| RankingRule::new(pattern, rank))
            .collect();
        RankingFunction::new(model.signature(), rules, r.default).expect("rules were checked while parsing")
    });
    Ok(ModelDocument {
        name: parsed.name,
        model,
        ranking,
        source: text.to_owned(),
    })
}

fn violation_pos(v: &Violation, eq_pos: &[Option<Pos>], decl_pos: &[Pos]) -> Pos {
    v.subject()
        .and_then(|s| eq_pos.get(s.index()).copied().flatten().or(decl_pos.get(s.index()).copied()))
        .unwrap_or(Pos { line: 1, column: 1 })
}

/// Like [`parse_model`], for raw bytes; invalid UTF-8 is a located lexical
/// error.
pub fn parse_model_bytes(bytes: &[u8]) -> Result<ModelDocument, DslError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_model(text),
        Err(e) => {
            let pos = utf8_error_position(bytes, e.valid_up_to());
            Err(Diagnostic {
                kind: DiagnosticKind::Lexical,
                line: pos.line,
                column: pos.column,
                message: "input is not valid UTF-8".into(),
            }
            .into())
        }
    }
}

/// `[X <- x, ...](body)` or a plain boolean formula over endogenous
/// variables.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<CausalFormula, DslError> {
    let mut p = parser_for(text)?;
    let interventions = p.interventions(sig)?;
    let body = if interventions.is_empty() {
        p.formula(sig, false)?
    } else {
        p.formula_unary(sig, false)?
    };
    p.expect_eof()?;
    finish(&mut p, CausalFormula::new(interventions, body))
}

/// Boolean formula over endogenous variables, e.g. an effect `F=1`.
pub fn parse_effect(text: &str, sig: &Signature) -> Result<BoolFormula, DslError> {
    let mut p = parser_for(text)?;
    let f = p.formula(sig, false)?;
    p.expect_eof()?;
    finish(&mut p, f)
}

/// Boolean formula that may also mention exogenous variables, for
/// statements about arbitrary worlds.
pub fn parse_world_formula(text: &str, sig: &Signature) -> Result<BoolFormula, DslError> {
    let mut p = parser_for(text)?;
    let f = p.formula(sig, true)?;
    p.expect_eof()?;
    finish(&mut p, f)
}

/// Conjunction of events, written `A=1 & B=0` or `A=1, B=0`.
pub fn parse_candidate(text: &str, sig: &Signature) -> Result<Candidate, DslError> {
    let mut p = parser_for(text)?;
    let items = p.assignments(sig, false)?;
    p.expect_eof()?;
    let conjuncts = items.into_iter().map(|(v, x, _)| (v, x)).collect();
    let c = finish(&mut p, conjuncts)?;
    Ok(Candidate::new(sig, c).expect("conjuncts were checked while parsing"))
}

/// Exogenous setting `U1=1, U2=0` covering every exogenous variable.
pub fn parse_context(text: &str, sig: &Signature) -> Result<Context, DslError> {
    let mut p = parser_for(text)?;
    let items = if p.at_eof() && sig.exogenous().is_empty() {
        Vec::new()
    } else {
        p.assignments(sig, true)?
    };
    let end = p.here();
    p.expect_eof()?;
    let items = finish(&mut p, items)?;
    let mut values = vec![None; sig.exogenous().len()];
    for (v, x, pos) in items {
        if !sig.is_exogenous(v) {
            return Err(semantic(
                pos,
                format!("`{}` is endogenous; a context sets exogenous variables only", sig.name(v)),
            )
            .into());
        }
        values[v.index()] = Some(x);
    }
    let missing: Vec<&str> = sig
        .exogenous_ids()
        .filter(|v| values[v.index()].is_none())
        .map(|v| sig.name(v))
        .collect();
    if !missing.is_empty() {
        return Err(semantic(end, format!("context does not set {}", missing.join(", "))).into());
    }
    Ok(Context::new(sig, values.into_iter().map(Option::unwrap).collect()).expect("complete and in range"))
}
