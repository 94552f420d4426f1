//! Obstruction spaces of weighted graphs with cusps.
//!
//! When a quotient graph is carried from one place to another, the carried
//! matrix is pinned down by the commutation relation and the cusp data except
//! possibly on a finite set of vertices. This module computes that finite
//! ambiguity: shells (finite vertex sets away from every cusp that can
//! support a commuting perturbation), exact rational bases of the space of
//! such perturbations, the set of vertex pairs the perturbations reach, and
//! the characteristic polynomial of the operator compressed to a shell.
//!
//! A perturbation here is a linear map `F` on charges that vanishes on
//! charges supported outside the shell, has image inside the shell, commutes
//! with the graph operator on every basis charge of the shell, and (by
//! default) has all column sums zero, since differences of two candidate
//! neighborhood matrices lose their common column sum.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Zero};

use crate::graph::VertexId;
use crate::linalg::Mat;
use crate::wcfg::{delta, detect_cusps, Charge, CuspDescriptor, Site, Wcfg};
use crate::{Error, Result, Q};

/// Basis of the space of commuting perturbations supported on a shell.
///
/// Each basis element is a shell×shell matrix: entry `(i, j)` is the
/// coefficient of the shell's i-th vertex in the image of the j-th one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionBasis {
    pub shell: Vec<VertexId>,
    pub basis: Vec<Mat>,
}

impl ObstructionBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Shell vertices with a nonzero row or column in some basis element.
    /// Edge weights between two such vertices are exactly the ones a
    /// perturbation can change.
    pub fn support(&self) -> Vec<VertexId> {
        let m = self.shell.len();
        (0..m)
            .filter(|&k| {
                self.basis.iter().any(|f| {
                    (0..m).any(|i| !f[(k, i)].is_zero() || !f[(i, k)].is_zero())
                })
            })
            .map(|k| self.shell[k])
            .collect()
    }
}

/// Geometric criterion guaranteeing a trivial obstruction space: after
/// deleting all half edges, every connected component must be acyclic with
/// at most one remaining valency-1 vertex. Tails count toward valency (one
/// step per attached cusp) but never contribute leaves of their own.
pub fn triviality_criterion(w: &Wcfg) -> bool {
    let mut unseen: BTreeSet<VertexId> = w.vertices().iter().copied().collect();
    while let Some(&start) = unseen.iter().next() {
        unseen.remove(&start);
        let mut component = vec![start];
        let mut queue = vec![start];
        while let Some(v) = queue.pop() {
            for u in w.neighbors(v) {
                if unseen.remove(&u) {
                    component.push(u);
                    queue.push(u);
                }
            }
        }
        let mut degree_sum = 0usize;
        let mut leaves = 0usize;
        for &v in &component {
            let degree = w.neighbors(v).len();
            degree_sum += degree;
            if degree + w.cusps_at(v).len() == 1 {
                leaves += 1;
            }
        }
        let acyclic = degree_sum / 2 + 1 == component.len();
        if !acyclic || leaves > 1 {
            return false;
        }
    }
    true
}

/// Largest shell: the vertices lying on no cusp, where a cusp is taken
/// together with its inward continuation through the core. A continuation
/// step must look exactly like one more tail vertex (two neighbors, no half
/// edge, no other cusp, the same inward and outward weights); a chain may
/// also end in a vertex whose half edge folds the tail pattern back on
/// itself. Vertices absorbed into tails by canonicalization are excluded
/// as well.
pub fn candidate_shell(w: &Wcfg) -> Vec<VertexId> {
    let (canon, _) = detect_cusps(w);
    let mut excluded: BTreeSet<VertexId> = w
        .vertices()
        .iter()
        .copied()
        .filter(|v| !canon.vertices().contains(v))
        .collect();
    for cusp in canon.cusps() {
        excluded.extend(cusp_extension(&canon, cusp));
    }
    w.vertices().iter().copied().filter(|v| !excluded.contains(v)).collect()
}

/// Vertices covered by one cusp together with its maximal continuation
/// inward through the core.
fn cusp_extension(g: &Wcfg, cusp: &CuspDescriptor) -> BTreeSet<VertexId> {
    let mut covered = BTreeSet::new();
    let Some(attach) = cusp.attach else {
        return covered;
    };
    covered.insert(attach);
    // The chain can continue past the attach vertex only if the attach
    // itself looks like a tail vertex: its sole extra structure is the cusp.
    if !g.half_edge(attach).is_zero() || g.cusps_at(attach).len() != 1 {
        return covered;
    }
    let inward_nbs = g.neighbors(attach);
    if inward_nbs.len() != 1 || g.weight(attach, inward_nbs[0]) != cusp.inward {
        return covered;
    }
    let (mut prev, mut cur) = (attach, inward_nbs[0]);
    loop {
        let beyond: Vec<VertexId> =
            g.neighbors(cur).into_iter().filter(|&x| x != prev).collect();
        let plain = g.half_edge(cur).is_zero() && g.cusps_at(cur).is_empty();
        if beyond.is_empty()
            && !g.half_edge(cur).is_zero()
            && g.cusps_at(cur).is_empty()
            && g.weight(cur, prev) == cusp.inward
        {
            // Terminal half edge: the tail pattern reflects here.
            covered.insert(cur);
            return covered;
        }
        let interior = beyond.len() == 1
            && plain
            && g.weight(cur, prev) == cusp.outward
            && g.weight(cur, beyond[0]) == cusp.inward;
        if !interior {
            return covered;
        }
        covered.insert(cur);
        prev = cur;
        cur = beyond[0];
    }
}

fn validate_shell(w: &Wcfg, shell: &[VertexId]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &s in shell {
        if !w.vertices().contains(&s) {
            return Err(Error::InvalidShell(format!("vertex {s} is not in the graph")));
        }
        if !seen.insert(s) {
            return Err(Error::InvalidShell(format!("vertex {s} listed twice")));
        }
    }
    let allowed = candidate_shell(w);
    for &s in shell {
        if !allowed.contains(&s) {
            return Err(Error::InvalidShell(format!("vertex {s} lies on a cusp")));
        }
    }
    Ok(())
}

/// Solves for all commuting perturbations supported on the shell, with the
/// column-sum-zero constraint imposed.
pub fn obstruction_space(w: &Wcfg, shell: &[VertexId]) -> Result<ObstructionBasis> {
    obstruction_space_opts(w, shell, true)
}

/// Like [`obstruction_space`], with the column-sum-zero constraint optional.
/// Relaxing it enlarges the space to all shell-supported commutants.
pub fn obstruction_space_opts(
    w: &Wcfg,
    shell: &[VertexId],
    zero_column_sums: bool,
) -> Result<ObstructionBasis> {
    validate_shell(w, shell)?;
    let m = shell.len();
    if m == 0 {
        return Ok(ObstructionBasis { shell: Vec::new(), basis: Vec::new() });
    }
    // The constraint rows enumerate every site either side of the commutator
    // can reach. Widening the enumeration window beyond that adds only zero
    // rows, which the stability re-check confirms.
    let window = shell_diameter(w, shell) + 2;
    let kernel = solve(w, shell, zero_column_sums, window);
    if kernel != solve(w, shell, zero_column_sums, window + 4) {
        return Err(Error::Arithmetic("constraint window is unstable".into()));
    }
    let basis = kernel
        .into_iter()
        .map(|flat| {
            let mut f = Mat::zero(m, m);
            for i in 0..m {
                for j in 0..m {
                    f[(i, j)] = flat[i * m + j].clone();
                }
            }
            f
        })
        .collect();
    Ok(ObstructionBasis { shell: shell.to_vec(), basis })
}

/// Builds and solves the commutation system. Unknown `i*m + j` is the entry
/// sending the shell's j-th vertex to its i-th one.
fn solve(
    w: &Wcfg,
    shell: &[VertexId],
    zero_column_sums: bool,
    window: u64,
) -> Vec<Vec<Q>> {
    let m = shell.len();
    let pos: BTreeMap<VertexId, usize> =
        shell.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let operator_columns: Vec<Charge> = shell
        .iter()
        .map(|&v| w.apply_operator(&delta(Site::Core(v))))
        .collect();
    let mut row_sites = sites_within(w, shell, window);
    for col in &operator_columns {
        row_sites.extend(col.keys().copied());
    }
    let mut rows = Vec::new();
    for (j, tcol) in operator_columns.iter().enumerate() {
        for &site in &row_sites {
            let mut row = vec![Q::zero(); m * m];
            // (F ∘ T)(δ_j) lands on the shell row i with weight
            // Σ_k F[i][k]·(Tδ_j)[k]; sites off the shell get nothing.
            if let Site::Core(v) = site {
                if let Some(&i) = pos.get(&v) {
                    for (k, &sk) in shell.iter().enumerate() {
                        if let Some(c) = tcol.get(&Site::Core(sk)) {
                            row[i * m + k] += c;
                        }
                    }
                }
            }
            // (T ∘ F)(δ_j) spreads each F[i][j] along the operator column
            // of the i-th shell vertex, reaching sites off the shell too.
            for (i, icol) in operator_columns.iter().enumerate() {
                if let Some(c) = icol.get(&site) {
                    row[i * m + j] -= c;
                }
            }
            if row.iter().any(|x| !x.is_zero()) {
                rows.push(row);
            }
        }
    }
    if zero_column_sums {
        for j in 0..m {
            let mut row = vec![Q::zero(); m * m];
            for i in 0..m {
                row[i * m + j] = Q::one();
            }
            rows.push(row);
        }
    }
    if rows.is_empty() {
        rows.push(vec![Q::zero(); m * m]);
    }
    Mat::from_rows(rows).kernel_basis()
}

/// All sites within the given number of operator steps of the shell,
/// walking core edges and tail segments.
fn sites_within(w: &Wcfg, shell: &[VertexId], depth: u64) -> BTreeSet<Site> {
    let mut seen: BTreeSet<Site> = shell.iter().map(|&v| Site::Core(v)).collect();
    let mut frontier: Vec<Site> = seen.iter().copied().collect();
    for _ in 0..depth {
        let mut next = Vec::new();
        for &site in &frontier {
            let reach = |s: Site, next: &mut Vec<Site>, seen: &mut BTreeSet<Site>| {
                if seen.insert(s) {
                    next.push(s);
                }
            };
            match site {
                Site::Core(v) => {
                    for u in w.neighbors(v) {
                        reach(Site::Core(u), &mut next, &mut seen);
                    }
                    for cusp in w.cusps_at(v) {
                        reach(Site::Tail { cusp, t: 1 }, &mut next, &mut seen);
                    }
                }
                Site::Tail { cusp, t } => {
                    reach(Site::Tail { cusp, t: t + 1 }, &mut next, &mut seen);
                    if t > 1 {
                        reach(Site::Tail { cusp, t: t - 1 }, &mut next, &mut seen);
                    } else if let Some(a) = w.cusps()[cusp].attach {
                        reach(Site::Core(a), &mut next, &mut seen);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    seen
}

/// Longest finite core distance between two shell vertices.
fn shell_diameter(w: &Wcfg, shell: &[VertexId]) -> u64 {
    let mut diameter = 0;
    for &a in shell {
        let mut dist: BTreeMap<VertexId, u64> = BTreeMap::from([(a, 0)]);
        let mut frontier = vec![a];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &v in &frontier {
                let d = dist[&v];
                for u in w.neighbors(v) {
                    if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(u) {
                        e.insert(d + 1);
                        next.push(u);
                    }
                }
            }
            frontier = next;
        }
        for &b in shell {
            if let Some(&d) = dist.get(&b) {
                diameter = diameter.max(d);
            }
        }
    }
    diameter
}

/// Vertices whose incident weights a perturbation can actually change:
/// the support of the obstruction space on the largest shell.
pub fn bad_set(w: &Wcfg) -> Result<Vec<VertexId>> {
    let shell = candidate_shell(w);
    Ok(obstruction_space(w, &shell)?.support())
}

/// Ordered pairs of vertices between which the carried weights are not
/// determined: the full square of [`bad_set`].
pub fn bad_pairs(w: &Wcfg) -> Result<Vec<(VertexId, VertexId)>> {
    let t = bad_set(w)?;
    Ok(t.iter().flat_map(|&a| t.iter().map(move |&b| (a, b))).collect())
}

/// Characteristic polynomial of the operator compressed to the shell
/// (project every operator column to shell coordinates), exact over ℚ,
/// coefficients lowest degree first. Used by the eigenvector diagnostic:
/// a nontrivial obstruction forces an eigenvector inside the shell.
pub fn projected_char_poly(w: &Wcfg, shell: &[VertexId]) -> Result<Vec<Q>> {
    validate_shell(w, shell)?;
    let m = shell.len();
    let mut block = Mat::zero(m, m);
    for (j, &v) in shell.iter().enumerate() {
        let col = w.apply_operator(&delta(Site::Core(v)));
        for (i, &u) in shell.iter().enumerate() {
            if let Some(c) = col.get(&Site::Core(u)) {
                block[(i, j)] = c.clone();
            }
        }
    }
    Ok(block.char_poly())
}
