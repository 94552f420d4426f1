//! Lattice-ball model of the tree over F_q(t) at the place at infinity:
//! balls, ray reduction, congruence stabilizers, and quotient graphs.

/// Placeholder while the module is under construction.
pub struct Ball;
