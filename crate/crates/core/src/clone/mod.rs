//! Abstract clones: the free clone of trees, endomorphism and action clones,
//! derived clones, morphisms, and a law checker.

mod alphabet;
mod clones;
mod elem;
mod laws;
mod monoid;
mod morphism;
mod tree;

pub use alphabet::RankedAlphabet;
pub use clones::{Carrier, CloneOps, CloneShape, FiniteClone};
pub use elem::{Elem, IntFn};
pub use laws::{
    check_clone_laws, check_morphism, check_mutations, test_pool, Counterexample, LawCheck,
    LawOptions, LawReport, Mutation,
};
pub use monoid::{Monoid, MonoidAction};
pub use morphism::{
    appvar, cay, cay_tabulated, delta_endo_iso, enumerate_morphisms, free_alphabet, morphism_count,
    CloneMorphism, FreeMorphism,
};
pub use tree::{parse_tree, tree_subst, trees_below_height, Tree, TreeEnumerator};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CloneError {
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("guard exceeded: {what} has {} elements, guard is {guard}", .size.map(|s| s.to_string()).unwrap_or_else(|| "unboundedly many".into()))]
    GuardExceeded {
        what: String,
        size: Option<u128>,
        guard: u64,
    },
    #[error("action law violation: {0}")]
    ActionLawViolation(String),
    #[error("not in carrier: {0}")]
    NotInCarrier(String),
    #[error("parse error: {0}")]
    Parse(String),
}
