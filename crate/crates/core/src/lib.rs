//! Identifiability analysis for missing-data DAGs under monotone missingness.
//!
//! The crate answers, for a vertex-partitioned DAG with response indicators
//! and optional monotone annotations between them, whether the full law
//! `p(O, X^(1), R)` or the target law `p(O, X^(1))` is a functional of the
//! observed data law — and when it is, emits that functional symbolically.
//! Every positive answer can be re-checked with an exact-rational brute-force
//! oracle over random models, and the classical nonidentifiability witnesses
//! (observationally equivalent model pairs along self-censoring chains) are
//! constructible on demand.
//!
//! Modules:
//! * [`graph`] — m-DAG representation, validation, d-separation, and
//!   monotonicity-aware conditional-independence verdicts;
//! * [`structure`] — colluder and self-censoring detection;
//! * [`expr`] — symbolic probability expressions with exact evaluation;
//! * [`model`] — exact-rational discrete models and observed-law coarsening;
//! * [`or_check`] — the odds-ratio factorization reconstruction check;
//! * [`identify`] — the identification engine;
//! * [`counterexample`] — observationally equivalent model pairs;
//! * [`verify`] — the random-model verification oracle;
//! * [`figures`] — built-in example graphs.

pub mod counterexample;
pub mod expr;
pub mod figures;
pub mod graph;
pub mod identify;
pub mod model;
pub mod or_check;
pub mod structure;
pub mod verify;

pub use counterexample::{
    bivariate_pair, bivariate_shape, chain_pair, BivariateModel, CexError, ChainPair,
    ObservedBivariate,
};
pub use expr::{evaluate, parse_expr, EvalError, Evaluator, LawRef, ProbExpr, ProbTerm, VarRef};
pub use graph::{
    ci_under_context, d_separated, d_separated_named, relation_set, validate_mdag, CiVerdict,
    CiVerdictKind, Context, GraphError, MDag, MonotoneSpec, RelationKind, ValidationReport, VarId,
    VertexKind, Violation,
};
pub use identify::{
    identify_colluded_at_one, identify_full_law, identify_indicator_fallback, identify_target_law,
    identify_violation_part, CiObligation, EngineError, IdentifyResult, IdentifyStatus,
    RefusalReason, RuleId, TheoremApplication,
};
pub use model::{
    observed_law, parse_rational, query_eval, random_model, ratio, rational_string, Cpt,
    DiscreteModel, LawTable, ModelError, ObservedLaw, Query, QueryTable, NA,
};
pub use or_check::{or_factorization, or_reconstruct, OrError, OrFactorization, OrReport};
pub use structure::{
    find_colluders, find_maximal_colluder, find_self_censoring, Colluder, MaximalColluder,
    SelfCensoring, SelfCensoringEdge, SelfCensoringPath,
};
pub use verify::{verify_functional, Counterexample, RunReport, VerificationReport};
