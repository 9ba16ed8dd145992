//! Finite structural causal models and actual causation.
//!
//! Models are built from a [`Signature`] of exogenous and endogenous
//! variables with finite integer ranges plus one mechanism per endogenous
//! variable. They can be written in a small text format (see [`dsl`]),
//! solved, intervened on and queried for actual causes, with or without a
//! ranking function that grades how normal each world is.

pub mod causality;
pub mod corpus;
pub mod dsl;
pub mod expr;
pub mod model;
pub mod normality;
pub mod semantics;

pub use causality::{
    but_for, check_ac1, compare_verdicts, directed_paths, enumerate_causes, find_witness,
    find_witness_in_partition, is_actual_cause, verify_witness, Candidate, CausalityError, Clause,
    EnumerateOptions, SearchLimits, Verdict, Witness,
};
pub use expr::{BinOp, Expr};
pub use model::{CandidateModel, CausalModel, Mechanism, Range, Signature, VarDecl, VarId};
pub use normality::{
    is_actual_cause_extended, typically, ExtendedCausalModel, NormalitySemantics, Rank,
    RankingFunction, RankingRule,
};
pub use semantics::{intervene, satisfies, solve, BoolFormula, CausalFormula, Context, World};
