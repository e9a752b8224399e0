//! Clones of ranked trees and their profinite completion, computed at desk
//! scale.
//!
//! The crate is organised bottom-up:
//!
//! * [`stlc`]: the simply typed λ-calculus with its long normal forms.
//! * [`finsem`]: finite-set semantics and logical relations.
//! * [`clone`]: abstract clones of trees and of finite operations, with
//!   morphisms and a law checker.
//! * [`signatures`]: signatures under composition, and the pointed-pair
//!   encoding of monoid actions.
//! * [`church`]: Church encoding of trees and the generator terms.
//! * [`profinite`]: natural, profinite-term and parametric families over a
//!   finite roster of clones.
//! * [`suite`]: the batch check runner and its reports.

pub mod church;
pub mod clone;
pub mod finsem;
pub mod profinite;
pub mod signatures;
pub mod stlc;
pub mod suite;

/// Default enumeration guard: the largest carrier or domain that will be
/// listed element by element.
pub const DEFAULT_GUARD: u64 = 65_536;
