//! Toolkit for threshold automata with parametric guards.
//!
//! The crate provides exact operational semantics for threshold automata
//! over parametric environments ([`ta`]), sketch automata whose guard
//! coefficients may contain indeterminates ([`sketch`]), explicit-state
//! coverability search ([`cover`]), a restricted fragment of Presburger
//! arithmetic with divisibility ([`pad`]), a compiler from that fragment
//! into sketch automata ([`reduction`]), and a semi-decision loop that
//! searches for coefficient assignments under which a location becomes
//! uncoverable ([`synth`]).
//!
//! All arithmetic is exact 64-bit integer arithmetic with checked
//! operations; overflow is reported as an error, never wrapped.

pub mod cover;
#[cfg(test)]
pub(crate) mod fixtures;
pub mod pad;
pub mod reduction;
pub mod sketch;
pub mod suites;
pub mod synth;
pub mod ta;

pub use cover::{CoverVerdict, CoverWitness, SearchBounds};
pub use sketch::{AffineCoeff, Assignment, SketchAutomaton};
pub use ta::{Configuration, Environment, ThresholdAutomaton};
