//! Exact arithmetic for weighted quotient graphs of the Bruhat–Tits tree of
//! lattice balls over 𝔽_q(t).
//!
//! The toolkit has three layers:
//!
//! * combinatorial: graphs with explicit edge reversal, group actions,
//!   barycentric subdivision, fine quotients and weighted reductions
//!   ([`graph`]), and the weighted combinatorially finite graphs with cusp
//!   descriptors that the quotients produce ([`wcfg`]);
//! * arithmetic: balls in the local field at infinity, Moebius actions,
//!   congruence quotients of the tree and quotients by overgroups such as
//!   Atkin–Lehner extensions ([`btree`], with field/polynomial support in
//!   [`algebra`]);
//! * analytic bookkeeping: transfer of a quotient from one place to another
//!   through the transfer polynomials ([`transfer`]) and the finite linear
//!   obstruction spaces that measure how far the transferred matrix is from
//!   being determined ([`obstruction`]).
//!
//! Everything is exact: weights are arbitrary-precision rationals, field and
//! polynomial arithmetic is symbolic, and no floating point is used anywhere.

pub mod algebra;
pub mod btree;
#[cfg(test)]
pub(crate) mod fixtures;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod obstruction;
pub mod transfer;
pub mod verify;
pub mod wcfg;

pub use graph::{FineGraph, Graph, GroupAction, VertexKind};
pub use wcfg::{CfMatrix, Charge, CuspDescriptor, Site, Wcfg};

/// Exact rational scalar used for all weights and matrix entries.
pub type Q = num::BigRational;

/// Shorthand for an integer as a [`Q`].
pub fn qint(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Shorthand for the rational n/d as a [`Q`].
pub fn qrat(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

/// Errors shared across the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid group action: {0}")]
    InvalidAction(String),
    #[error("quotient weights disagree between preimages: {0}")]
    WeightMismatch(String),
    #[error("invalid weighted graph: {0}")]
    InvalidWcfg(String),
    #[error("matrix is not normalizable: {0}")]
    NotNormalizable(String),
    #[error("invalid shell: {0}")]
    InvalidShell(String),
    #[error("transfer is not applicable: {0}")]
    TransferNotApplicable(String),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("document error: {0}")]
    Document(String),
    #[error("verification case failed: {0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
