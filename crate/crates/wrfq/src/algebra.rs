//! Arithmetic over small finite fields and polynomial rings used by the
//! lattice-ball layer: F_q for q in {2, 3, 4, 5}, F_q[t], and 2x2 matrices.

/// Placeholder while the module is under construction.
pub struct Fq;
