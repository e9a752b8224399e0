//! Profinite terms approximated on a finite clone roster: natural families,
//! restriction to endomorphism clones, parametric families and the
//! fixed-point equation.

mod family;
mod parametric;
mod roster;
mod term;

pub use family::{
    definability_search, definers, family_of_tree, naturality_check, Definability, NaturalFamily,
    NaturalityOptions, NaturalityReport, SquareCheck,
};
pub use parametric::{
    fixed_point_check, parametric_to_tree, parametric_to_trees, parametricity_check,
    FixedPointReport, ParametricFamily, ParametricityReport, RelationPairCheck,
};
pub use roster::{CloneRoster, Recipe, RosterMember};
pub use term::{lift, restrict, ProfiniteTermApprox};

use crate::church::ChurchError;
use crate::clone::CloneError;
use crate::finsem::SemError;
use crate::stlc::StlcError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfiniteError {
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("missing roster member: {0}")]
    MissingRosterMember(String),
    #[error("no rule: {0}")]
    NeedsRule(String),
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
    #[error(transparent)]
    Clone(#[from] CloneError),
    #[error(transparent)]
    Sem(#[from] SemError),
    #[error(transparent)]
    Church(#[from] ChurchError),
    #[error(transparent)]
    Stlc(#[from] StlcError),
}
