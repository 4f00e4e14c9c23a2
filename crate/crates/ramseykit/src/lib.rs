//! Finite combinatorics of structural Ramsey theory, made executable.
//!
//! The crate works with finite relational structures on universes of at most
//! 64 elements and provides:
//!
//! * embeddings, copies, automorphisms and canonical forms ([`structure`],
//!   [`embedding`], [`canon`]),
//! * finitely-specified hereditary classes with bounded joint-embedding and
//!   amalgamation checks ([`class`]),
//! * exact decision of arrow relations `C -> (B)^A_{k,d}` in copy and
//!   embedding flavour, with machine-checkable certificates ([`arrow`]),
//! * Ramsey-degree bookkeeping: index colorings, the copy/embedding degree
//!   conversion, order-expansion counting and the power-of-two audit
//!   ([`degree`]),
//! * order expansions: admissible orders, forgetfulness, the ordering
//!   property, reasonableness and order-forgetful order search
//!   ([`expansion`]),
//! * consistent random orderings as exact rational linear programs, cylinder
//!   measures and the measure-concentration cover experiment ([`ergodic`]).
//!
//! Every enumeration is deterministic (lexicographic in a fixed convention)
//! so that certificates are bit-reproducible. See the `examples/` directory
//! for one runnable program per capability, and the `ramseykit` binary for
//! the command line front end.

pub mod arrow;
pub mod cache;
pub mod canon;
pub mod class;
pub mod cli;
pub mod degree;
pub mod embedding;
pub mod ergodic;
pub mod expansion;
pub mod lp;
pub mod signature;
pub mod structure;


pub use canon::{canonical_form, CanonicalForm};


pub use embedding::Embedding;


pub use signature::Signature;
pub use structure::Structure;
