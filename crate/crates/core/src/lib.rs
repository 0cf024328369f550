//! Lattice-linear predicate (LLP) solvers for stable marriage variants.
//!
//! Every solver in this crate is an instance of one fixpoint engine
//! ([`llp`]): a state vector is advanced on *forbidden* indices until no
//! index is forbidden, which yields the least vector satisfying the
//! predicate. On top of the engine the crate provides:
//!
//! - [`model`]: preference profiles with ties, external constraints and
//!   their compilation into a precedence poset over proposal events;
//! - [`csmp`]: man-optimal stable and externally constrained stable marriage;
//! - [`ties`]: super-stable and strongly stable marriage under ties, with
//!   the bipartite machinery (Hall deficiency, critical sets) they need;
//! - [`sim`]: a deterministic discrete-event simulator of the asynchronous
//!   diffusing-computation protocol with Dijkstra-Scholten termination
//!   detection;
//! - [`oracle`]: brute-force ground truth used to certify the solvers.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is on; the
//! `std` feature adds a multi-threaded engine driver.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod csmp;
pub mod gen;
pub mod llp;
pub mod model;
pub mod oracle;
pub mod sim;
pub mod ties;

pub use csmp::{solve_constrained, solve_stable, SolveError};
pub use model::{
    compile_constraints, Constraint, ConstraintPoset, Event, Matching, ModelError,
    PreferenceProfile, ProposalVector,
};
