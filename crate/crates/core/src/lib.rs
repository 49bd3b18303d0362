//! Workbench for the typed linear λ-calculus.
//!
//! The calculus has tensor products and linear implication, with every
//! variable used exactly once.  On top of the base language this crate
//! provides:
//!
//!  - parsing, linearity checking and capture-free substitution ([`syntax`]),
//!  - principal type inference, type matching and poly-type certificates
//!    ([`types`]),
//!  - β/η reduction together with the commutative (let-floating) conversion,
//!    normalization, and the decidable equality `=βηc` ([`rewrite`]),
//!  - the second-order linear term system with its {0,1} model and the
//!    separating-assignment search ([`slt`]),
//!  - the separation toolbox: linear distributive transformers, projection
//!    and constant-function builders, Böhm separators and copy terms
//!    ([`bohm`]),
//!  - Boolean functional completeness: gate synthesis, truth-table
//!    compilation, the built-in example corpus, and the bounded negative
//!    search showing why poly-types are needed ([`boolfc`]),
//!  - IMLL proof nets with cut elimination, used as an independent oracle
//!    for `=βηc` ([`proofnet`]).

pub mod bohm;
pub mod boolfc;
pub mod enumerate;
pub mod gen;
pub mod proofnet;
pub mod rewrite;
pub mod slt;
pub mod syntax;
pub mod types;

use syntax::SourceSpan;

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("syntax error: {message}{}", span_suffix(.span))]
    Parse {
        message: String,
        span: Option<SourceSpan>,
    },
    #[error("linearity violation: {0}")]
    Linearity(String),
    #[error("variable `{0}` does not occur free in the term")]
    NotFree(String),
    #[error("occurs check failed: '{var} occurs in {ty}")]
    OccursCheck { var: String, ty: String },
    #[error("cannot unify {left} with {right}")]
    TypeMismatch { left: String, right: String },
    #[error("untypable term: {0}")]
    Untypable(String),
    #[error("type is not implicational: tensor subformula {0}")]
    NotImplicational(String),
    #[error("step budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("unsupported type for the distributive transformation: {0}")]
    UnsupportedLdtr(String),
    #[error("term is not in canonical order-<4 shape: {0}")]
    NotCanonicalShape(String),
    #[error("ill-formed second-order term: {0}")]
    IllFormedSlt(String),
    #[error("terms are equal; nothing to separate")]
    NothingToSeparate,
    #[error("separation search exhausted: {0}")]
    SearchExhausted(String),
    #[error("premise violated: {0}")]
    Premise(String),
    #[error("construction failed verification: {0}")]
    ConstructionFailure(String),
    #[error("no poly-type witness: {0}")]
    NoPolyWitness(String),
    #[error("{0}")]
    Other(String),
}

fn span_suffix(span: &Option<SourceSpan>) -> String {
    match span {
        Some(s) => format!(" at bytes {}..{}", s.start, s.end),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
