//! The simply typed λ-calculus with products and unit.

mod normalize;
mod parse;
mod term;
mod types;
mod typing;

#[cfg(test)]
pub(crate) mod testgen;

pub use normalize::{beta_eta_eq, normalize, normalize_with_budget, DEFAULT_STEP_BUDGET};
pub use parse::{parse_term, parse_term_in, parse_type};
pub use term::{alpha_eq, term_size, Term};
pub use types::SimpleType;
pub use typing::{typecheck, TypingContext};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StlcError {
    #[error("type error at {location}: expected {expected}, found {found}")]
    Type {
        location: String,
        expected: String,
        found: String,
    },
    #[error("variable #{index} out of scope (context has {context_len} entries)")]
    Scope { index: usize, context_len: usize },
    #[error("normalization exceeded its step budget after {steps} steps")]
    GuardExceeded { steps: usize },
    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("internal normalizer error: {0}")]
    Internal(String),
}
