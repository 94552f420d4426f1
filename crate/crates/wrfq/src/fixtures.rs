//! Shared graph fixtures: small weighted graphs with known quotient,
//! obstruction, and transfer behavior, frozen from independent computations.

use crate::wcfg::{CuspDescriptor, Wcfg};
use crate::{qint, qrat, Q};

pub(crate) fn build(
    vertices: &[u32],
    labels: &[(u32, &str)],
    weights: &[(u32, u32, Q)],
    cusps: Vec<CuspDescriptor>,
    q_param: Option<u64>,
) -> Wcfg {
    Wcfg::from_parts(
        vertices.to_vec(),
        labels.iter().map(|&(v, s)| (v, s.to_string())).collect(),
        weights.iter().map(|(a, b, m)| ((*a, *b), m.clone())).collect(),
        cusps,
        q_param,
    )
    .unwrap()
}

/// Path d2—d1—c—u1—u2 with cusps at both ends, q = 2.
pub(crate) fn two_cusp_path() -> Wcfg {
    let [d2, d1, c, u1, u2] = [0u32, 1, 2, 3, 4];
    build(
        &[d2, d1, c, u1, u2],
        &[(d2, "d2"), (d1, "d1"), (c, "c"), (u1, "u1"), (u2, "u2")],
        &[
            (d2, d1, qint(2)),
            (d1, d2, qint(1)),
            (d1, c, qint(2)),
            (c, d1, qint(1)),
            (c, u1, qint(2)),
            (u1, c, qint(2)),
            (u1, u2, qint(1)),
            (u2, u1, qint(2)),
        ],
        vec![
            CuspDescriptor::new(Some(d2), qint(2), qint(1)),
            CuspDescriptor::new(Some(u2), qint(2), qint(1)),
        ],
        Some(2),
    )
}

/// Single vertex with a half edge of weight 2 and one cusp, q = 2.
pub(crate) fn half_edge_cusp() -> Wcfg {
    build(
        &[0],
        &[(0, "d1")],
        &[(0, 0, qint(2))],
        vec![CuspDescriptor::new(Some(0), qint(2), qint(1))],
        Some(2),
    )
}

/// Path a—e—f with a half edge at a and a cusp at f, q = 2.
pub(crate) fn half_edge_line() -> Wcfg {
    let [a, e, f] = [0u32, 1, 2];
    build(
        &[a, e, f],
        &[(a, "a"), (e, "e"), (f, "f")],
        &[
            (a, a, qint(1)),
            (a, e, qint(2)),
            (e, a, qint(2)),
            (e, f, qint(1)),
            (f, e, qint(2)),
        ],
        vec![CuspDescriptor::new(Some(f), qint(2), qint(1))],
        Some(2),
    )
}

/// Path b—c—d—e with a cusp at e and one heavy end weight, q = 2.
pub(crate) fn four_vertex_line() -> Wcfg {
    let [b, c, d, e] = [0u32, 1, 2, 3];
    build(
        &[b, c, d, e],
        &[(b, "b"), (c, "c"), (d, "d"), (e, "e")],
        &[
            (b, c, qint(3)),
            (c, b, qint(1)),
            (c, d, qint(2)),
            (d, c, qint(2)),
            (d, e, qint(1)),
            (e, d, qint(2)),
        ],
        vec![CuspDescriptor::new(Some(e), qint(2), qint(1))],
        Some(2),
    )
}

/// Three leaves n1, n2, d0 around the hub m1, with m2 between the hub and
/// the cusped vertex d1; q = 2. The smallest quotient with a nontrivial
/// obstruction space.
pub(crate) fn three_leaf_hub() -> Wcfg {
    let [n1, n2, m1, m2, d0, d1] = [0u32, 1, 2, 3, 4, 5];
    build(
        &[n1, n2, m1, m2, d0, d1],
        &[(n1, "n1"), (n2, "n2"), (m1, "m1"), (m2, "m2"), (d0, "d0"), (d1, "d1")],
        &[
            (n1, m1, qint(3)),
            (n2, m1, qint(3)),
            (m1, n1, qint(1)),
            (m1, n2, qint(1)),
            (m1, m2, qint(1)),
            (m2, m1, qint(2)),
            (m2, d1, qint(1)),
            (d0, d1, qint(3)),
            (d1, m2, qint(1)),
            (d1, d0, qint(1)),
        ],
        vec![CuspDescriptor::new(Some(d1), qint(2), qint(1))],
        Some(2),
    )
}

/// Leaves v and z joined to a hub w that feeds a cusp; columns sum to 1.
pub(crate) fn two_leaf_hub(a: Q, b: Q) -> Wcfg {
    let [v, z, w, y] = [0u32, 1, 2, 3];
    let rest = qint(1) - &a - &b;
    build(
        &[v, z, w, y],
        &[(v, "v"), (z, "z"), (w, "w"), (y, "y")],
        &[
            (v, w, qint(1)),
            (z, w, qint(1)),
            (w, v, a),
            (w, z, b),
            (w, y, rest),
            (y, w, qrat(1, 2)),
        ],
        vec![CuspDescriptor::new(Some(y), qrat(1, 2), qrat(1, 2))],
        None,
    )
}

/// Line u—z—w continuing into a cusp, with one extra leaf v on the hub w;
/// columns sum to 1.
pub(crate) fn leaf_beside_line() -> Wcfg {
    let [u, z, w, v, y] = [0u32, 1, 2, 3, 4];
    let (a, d, b) = (qrat(1, 3), qrat(1, 2), qrat(1, 3));
    build(
        &[u, z, w, v, y],
        &[(u, "u"), (z, "z"), (w, "w"), (v, "v"), (y, "y")],
        &[
            (u, z, qint(1)),
            (z, u, b.clone()),
            (z, w, qint(1) - &b),
            (w, z, d.clone()),
            (w, v, a.clone()),
            (w, y, qint(1) - &a - &d),
            (v, w, qint(1)),
            (y, w, qrat(1, 2)),
        ],
        vec![CuspDescriptor::new(Some(y), qrat(1, 2), qrat(1, 2))],
        None,
    )
}

/// Pendant paths t—v and u—z joined at a hub w that feeds a cusp; columns
/// sum to 1. Whether the obstruction vanishes depends on the weights, not
/// on the shape: it is nontrivial exactly when b = c.
pub(crate) fn two_pendant_pairs(a: Q, b: Q, c: Q, d: Q) -> Wcfg {
    let [t, v, u, z, w, y] = [0u32, 1, 2, 3, 4, 5];
    build(
        &[t, v, u, z, w, y],
        &[(t, "t"), (v, "v"), (u, "u"), (z, "z"), (w, "w"), (y, "y")],
        &[
            (t, v, qint(1)),
            (v, t, c.clone()),
            (v, w, qint(1) - &c),
            (u, z, qint(1)),
            (z, u, b.clone()),
            (z, w, qint(1) - &b),
            (w, v, a.clone()),
            (w, z, d.clone()),
            (w, y, qint(1) - &a - &d),
            (y, w, qrat(1, 2)),
        ],
        vec![CuspDescriptor::new(Some(y), qrat(1, 2), qrat(1, 2))],
        None,
    )
}
