//! Hash commitments to boolean predicates encoded as quasi-reduced ordered
//! binary decision diagrams.
//!
//! A notary compiles a seller's attribute into a diagram whose *input* is a
//! buyer's criterion ([`predicates`]), commits to it under per-level blinding
//! keys ([`commitment`]) and signs the root ([`certificate`]). The seller later
//! opens a single evaluation path ([`witness`]); the buyer checks it against the
//! signed root and learns only the result for that criterion.

pub mod certificate;
mod codec;
pub mod commitment;
mod error;
pub mod hash;
pub mod obdd;
pub mod predicates;
pub mod witness;

pub use commitment::{commit, derive_keys, verify_full, CommitmentTree, Seed, SeedKeys};
pub use error::{Error, Result};
pub use hash::Digest;
pub use obdd::{build_layered, BoolOp, InputWord, Node, Qrobdd};
pub use witness::{open, verify, VerifyError, Witness};
