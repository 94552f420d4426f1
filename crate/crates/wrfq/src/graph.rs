//! Graphs with explicit edge reversal, finite group actions, barycentric
//! subdivision, fine quotients with weights, and small-graph isomorphism.
//!
//! A graph here is the 5-tuple (V, A, src, tgt, rev): every undirected edge
//! is a pair of mutually reverse arrows, and `rev` is a fixed-point-free
//! involution. Quotients by group actions are always taken after barycentric
//! subdivision, which kills inversions; an inversion leaves a trace in the
//! quotient as a valency-1 virtual vertex (a half edge).

use crate::wcfg::Wcfg;
use crate::{qint, Error, Q, Result};
use std::collections::{BTreeMap, BTreeSet};

pub type VertexId = u32;
pub type EdgeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Actual,
    Virtual,
}

/// Finite graph with reversal involution.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    vertices: BTreeSet<VertexId>,
    src: BTreeMap<EdgeId, VertexId>,
    tgt: BTreeMap<EdgeId, VertexId>,
    rev: BTreeMap<EdgeId, EdgeId>,
    labels: BTreeMap<VertexId, String>,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.vertices.insert(v);
    }

    pub fn set_label(&mut self, v: VertexId, label: impl Into<String>) {
        self.vertices.insert(v);
        self.labels.insert(v, label.into());
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels.get(&v).map(String::as_str)
    }

    /// Adds the arrow pair of one undirected edge v—w and returns (a, rev a).
    pub fn add_edge_pair(&mut self, v: VertexId, w: VertexId) -> (EdgeId, EdgeId) {
        self.vertices.insert(v);
        self.vertices.insert(w);
        let a = self.fresh_edge_id();
        let b = a + 1;
        self.src.insert(a, v);
        self.tgt.insert(a, w);
        self.src.insert(b, w);
        self.tgt.insert(b, v);
        self.rev.insert(a, b);
        self.rev.insert(b, a);
        (a, b)
    }

    fn fresh_edge_id(&self) -> EdgeId {
        self.src.keys().next_back().map_or(0, |m| m + 1)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.src.keys().copied()
    }

    /// Number of arrows (always even).
    pub fn edge_count(&self) -> usize {
        self.src.len()
    }

    pub fn src(&self, a: EdgeId) -> VertexId {
        self.src[&a]
    }

    pub fn tgt(&self, a: EdgeId) -> VertexId {
        self.tgt[&a]
    }

    pub fn rev(&self, a: EdgeId) -> EdgeId {
        self.rev[&a]
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    /// One arrow per undirected edge, the one with the smaller id.
    pub fn edge_pairs(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.src.keys().copied().filter(move |&a| a < self.rev[&a])
    }

    /// Arrows leaving v, in id order. Loops at v appear twice (once per arrow).
    pub fn out_edges(&self, v: VertexId) -> Vec<EdgeId> {
        self.src
            .iter()
            .filter_map(|(&a, &s)| (s == v).then_some(a))
            .collect()
    }

    /// Valency of v: number of arrows leaving v (loops count twice).
    pub fn valency(&self, v: VertexId) -> usize {
        self.src.values().filter(|&&s| s == v).count()
    }

    /// Multiplicity of arrows v → w.
    pub fn adjacency(&self, v: VertexId, w: VertexId) -> usize {
        self.src
            .iter()
            .filter(|(&a, &s)| s == v && self.tgt[&a] == w)
            .count()
    }

    pub fn validate(&self) -> Result<()> {
        for (&a, &b) in &self.rev {
            if a == b {
                return Err(Error::InvalidGraph(format!("rev fixes edge {a}")));
            }
            if self.rev.get(&b) != Some(&a) {
                return Err(Error::InvalidGraph(format!("rev is not an involution at edge {a}")));
            }
            if self.src.get(&b) != self.tgt.get(&a) {
                return Err(Error::InvalidGraph(format!(
                    "src(rev({a})) differs from tgt({a})"
                )));
            }
        }
        for (&a, &v) in &self.src {
            if !self.rev.contains_key(&a) {
                return Err(Error::InvalidGraph(format!("edge {a} has no reverse")));
            }
            if !self.vertices.contains(&v) || !self.vertices.contains(&self.tgt[&a]) {
                return Err(Error::InvalidGraph(format!("edge {a} touches unknown vertex")));
            }
        }
        Ok(())
    }
}

/// Graph whose vertices are split into actual and virtual, bipartite between
/// the two classes; virtual vertices have valency 1 (half edges) or 2
/// (subdivision midpoints).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FineGraph {
    pub graph: Graph,
    pub kind: BTreeMap<VertexId, VertexKind>,
}

impl FineGraph {
    pub fn kind_of(&self, v: VertexId) -> VertexKind {
        self.kind[&v]
    }

    pub fn actual_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.graph
            .vertices()
            .filter(move |v| self.kind[v] == VertexKind::Actual)
    }

    pub fn virtual_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.graph
            .vertices()
            .filter(move |v| self.kind[v] == VertexKind::Virtual)
    }

    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        for v in self.graph.vertices() {
            if !self.kind.contains_key(&v) {
                return Err(Error::InvalidGraph(format!("vertex {v} has no kind")));
            }
        }
        for a in self.graph.edge_ids() {
            let (s, t) = (self.graph.src(a), self.graph.tgt(a));
            if self.kind[&s] == self.kind[&t] {
                return Err(Error::InvalidGraph(format!(
                    "edge {a} joins two {:?} vertices",
                    self.kind[&s]
                )));
            }
        }
        for v in self.virtual_vertices() {
            let val = self.graph.valency(v);
            if val == 0 || val > 2 {
                return Err(Error::InvalidGraph(format!(
                    "virtual vertex {v} has valency {val}"
                )));
            }
        }
        Ok(())
    }
}

/// Finite group acting on a graph, given by explicit permutation tables.
/// Element 0 is the identity; `mul[i][j]` is the element acting as
/// "first j, then i".
#[derive(Debug, Clone)]
pub struct GroupAction {
    mul: Vec<Vec<usize>>,
    vperm: Vec<BTreeMap<VertexId, VertexId>>,
    eperm: Vec<BTreeMap<EdgeId, EdgeId>>,
}

impl GroupAction {
    pub fn new(
        g: &Graph,
        mul: Vec<Vec<usize>>,
        vperm: Vec<BTreeMap<VertexId, VertexId>>,
        eperm: Vec<BTreeMap<EdgeId, EdgeId>>,
    ) -> Result<Self> {
        let act = GroupAction { mul, vperm, eperm };
        act.validate(g)?;
        Ok(act)
    }

    /// Builds the action generated by the given automorphisms (as vertex and
    /// edge permutations), closing under composition.
    pub fn generate(
        g: &Graph,
        generators: Vec<(BTreeMap<VertexId, VertexId>, BTreeMap<EdgeId, EdgeId>)>,
    ) -> Result<Self> {
        let idv: BTreeMap<_, _> = g.vertices().map(|v| (v, v)).collect();
        let ide: BTreeMap<_, _> = g.edge_ids().map(|a| (a, a)).collect();
        let mut vperm = vec![idv];
        let mut eperm = vec![ide];
        let compose_v = |f: &BTreeMap<VertexId, VertexId>, h: &BTreeMap<VertexId, VertexId>| {
            h.iter().map(|(&x, &hx)| (x, f[&hx])).collect::<BTreeMap<_, _>>()
        };
        let compose_e = |f: &BTreeMap<EdgeId, EdgeId>, h: &BTreeMap<EdgeId, EdgeId>| {
            h.iter().map(|(&x, &hx)| (x, f[&hx])).collect::<BTreeMap<_, _>>()
        };
        let mut frontier = vec![0usize];
        while let Some(i) = frontier.pop() {
            for (gv, ge) in &generators {
                let nv = compose_v(gv, &vperm[i]);
                let ne = compose_e(ge, &eperm[i]);
                if !vperm.iter().zip(&eperm).any(|(v, e)| *v == nv && *e == ne) {
                    vperm.push(nv);
                    eperm.push(ne);
                    frontier.push(vperm.len() - 1);
                    if vperm.len() > 4096 {
                        return Err(Error::InvalidAction("generated group too large".into()));
                    }
                }
            }
        }
        let n = vperm.len();
        let mut mul = vec![vec![usize::MAX; n]; n];
        for i in 0..n {
            for j in 0..n {
                let nv = compose_v(&vperm[i], &vperm[j]);
                let ne = compose_e(&eperm[i], &eperm[j]);
                let k = vperm
                    .iter()
                    .zip(&eperm)
                    .position(|(v, e)| *v == nv && *e == ne)
                    .ok_or_else(|| Error::InvalidAction("closure failure".into()))?;
                mul[i][j] = k;
            }
        }
        GroupAction::new(g, mul, vperm, eperm)
    }

    pub fn order(&self) -> usize {
        self.vperm.len()
    }

    pub fn apply_vertex(&self, e: usize, v: VertexId) -> VertexId {
        self.vperm[e][&v]
    }

    pub fn apply_edge(&self, e: usize, a: EdgeId) -> EdgeId {
        self.eperm[e][&a]
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        let n = self.mul.len();
        if n == 0 || self.vperm.len() != n || self.eperm.len() != n {
            return Err(Error::InvalidAction("table sizes disagree".into()));
        }
        // Group axioms on the composition table.
        for row in &self.mul {
            if row.len() != n || row.iter().any(|&k| k >= n) {
                return Err(Error::InvalidAction("composition table out of range".into()));
            }
        }
        for i in 0..n {
            if self.mul[0][i] != i || self.mul[i][0] != i {
                return Err(Error::InvalidAction("element 0 is not an identity".into()));
            }
            if !(0..n).any(|j| self.mul[i][j] == 0 && self.mul[j][i] == 0) {
                return Err(Error::InvalidAction(format!("element {i} has no inverse")));
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.mul[self.mul[i][j]][k] != self.mul[i][self.mul[j][k]] {
                        return Err(Error::InvalidAction("composition is not associative".into()));
                    }
                }
            }
        }
        // Permutations must be total bijections compatible with the table.
        for e in 0..n {
            let vp = &self.vperm[e];
            let ep = &self.eperm[e];
            if vp.len() != g.vertex_count()
                || ep.len() != g.edge_count()
                || !g.vertices().all(|v| vp.contains_key(&v))
                || !g.edge_ids().all(|a| ep.contains_key(&a))
            {
                return Err(Error::InvalidAction(format!("element {e} is not total")));
            }
            let vimg: BTreeSet<_> = vp.values().collect();
            let eimg: BTreeSet<_> = ep.values().collect();
            if vimg.len() != vp.len() || eimg.len() != ep.len() {
                return Err(Error::InvalidAction(format!("element {e} is not injective")));
            }
            for a in g.edge_ids() {
                if g.src(ep[&a]) != vp[&g.src(a)]
                    || g.tgt(ep[&a]) != vp[&g.tgt(a)]
                    || g.rev(ep[&a]) != ep[&g.rev(a)]
                {
                    return Err(Error::InvalidAction(format!(
                        "element {e} does not preserve src/tgt/rev at edge {a}"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let k = self.mul[i][j];
                for v in g.vertices() {
                    if self.vperm[i][&self.vperm[j][&v]] != self.vperm[k][&v] {
                        return Err(Error::InvalidAction(
                            "vertex permutations are incompatible with the table".into(),
                        ));
                    }
                }
                for a in g.edge_ids() {
                    if self.eperm[i][&self.eperm[j][&a]] != self.eperm[k][&a] {
                        return Err(Error::InvalidAction(
                            "edge permutations are incompatible with the table".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    fn vertex_orbit(&self, v: VertexId) -> BTreeSet<VertexId> {
        (0..self.order()).map(|e| self.vperm[e][&v]).collect()
    }

    fn edge_orbit(&self, a: EdgeId) -> BTreeSet<EdgeId> {
        (0..self.order()).map(|e| self.eperm[e][&a]).collect()
    }

    /// Maps each vertex to the smallest member of its orbit.
    pub fn vertex_reps(&self, g: &Graph) -> BTreeMap<VertexId, VertexId> {
        let mut reps = BTreeMap::new();
        for v in g.vertices() {
            let orbit = self.vertex_orbit(v);
            reps.insert(v, *orbit.first().expect("orbit is nonempty"));
        }
        reps
    }
}

/// Result of subdividing: the fine graph plus the maps needed to transport a
/// group action onto it.
struct Subdivision {
    fine: FineGraph,
    /// midpoint vertex of the edge pair, keyed by min(a, rev a)
    mid: BTreeMap<EdgeId, VertexId>,
    /// per original arrow a: (arrow src(a) → mid, its reverse)
    seg: BTreeMap<EdgeId, (EdgeId, EdgeId)>,
}

fn subdivide(g: &Graph) -> Subdivision {
    let mut fine = Graph::new();
    let mut kind = BTreeMap::new();
    for v in g.vertices() {
        fine.add_vertex(v);
        if let Some(l) = g.label(v) {
            fine.set_label(v, l);
        }
        kind.insert(v, VertexKind::Actual);
    }
    let next_v = g.vertices.iter().next_back().map_or(0, |m| m + 1);
    let mut mid = BTreeMap::new();
    for (i, rep) in g.edge_pairs().enumerate() {
        let m = next_v + i as VertexId;
        fine.add_vertex(m);
        kind.insert(m, VertexKind::Virtual);
        mid.insert(rep, m);
    }
    let mut seg = BTreeMap::new();
    // Arrows in id order so the construction is deterministic.
    let arrows: Vec<EdgeId> = g.edge_ids().collect();
    for a in arrows {
        let rep = a.min(g.rev(a));
        let m = mid[&rep];
        let pair = fine.add_edge_pair(g.src(a), m);
        seg.insert(a, pair);
    }
    Subdivision { fine: FineGraph { graph: fine, kind }, mid, seg }
}

/// Barycentric subdivision: one virtual midpoint per undirected edge, each
/// arrow replaced by an actual–virtual segment pair.
pub fn barycentric_subdivision(g: &Graph) -> Result<FineGraph> {
    g.validate()?;
    let sub = subdivide(g);
    sub.fine.validate()?;
    Ok(sub.fine)
}

/// Transports an action on g to the subdivision. The induced action is always
/// inversion free: an element sending a to rev(a) swaps the two segments of
/// the edge instead of reversing either one.
fn induce_on_subdivision(g: &Graph, act: &GroupAction, sub: &Subdivision) -> GroupAction {
    let n = act.order();
    let mut vperm = Vec::with_capacity(n);
    let mut eperm = Vec::with_capacity(n);
    for e in 0..n {
        let mut vp: BTreeMap<VertexId, VertexId> =
            g.vertices().map(|v| (v, act.apply_vertex(e, v))).collect();
        for (&rep, &m) in &sub.mid {
            let img = act.apply_edge(e, rep);
            let img_rep = img.min(g.rev(img));
            vp.insert(m, sub.mid[&img_rep]);
        }
        let mut ep = BTreeMap::new();
        for a in g.edge_ids() {
            let (s0, s1) = sub.seg[&a];
            let (t0, t1) = sub.seg[&act.apply_edge(e, a)];
            ep.insert(s0, t0);
            ep.insert(s1, t1);
        }
        vperm.push(vp);
        eperm.push(ep);
    }
    GroupAction { mul: act.mul.clone(), vperm, eperm }
}

/// Quotient of a graph by an inversion-free action: vertices and arrows become
/// their orbits, named by the smallest member.
fn quotient_inversion_free(g: &Graph, kind: &BTreeMap<VertexId, VertexKind>, act: &GroupAction) -> Result<FineGraph> {
    let mut out = Graph::new();
    let mut out_kind = BTreeMap::new();
    let vrep = act.vertex_reps(g);
    for v in g.vertices() {
        let r = vrep[&v];
        out.add_vertex(r);
        out_kind.insert(r, kind[&v]);
        if v == r {
            if let Some(l) = g.label(v) {
                out.set_label(r, l);
            }
        }
    }
    let mut erep: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();
    for a in g.edge_ids() {
        let orbit = act.edge_orbit(a);
        if orbit.contains(&g.rev(a)) {
            return Err(Error::InvalidAction(format!(
                "inversion at edge {a}; quotient requires an inversion-free action"
            )));
        }
        erep.insert(a, *orbit.first().expect("orbit is nonempty"));
    }
    for a in g.edge_ids() {
        if erep[&a] != a {
            continue;
        }
        out.src.insert(a, vrep[&g.src(a)]);
        out.tgt.insert(a, vrep[&g.tgt(a)]);
        out.rev.insert(a, erep[&g.rev(a)]);
    }
    let fine = FineGraph { graph: out, kind: out_kind };
    fine.graph.validate()?;
    Ok(fine)
}

/// Fine quotient: subdivide, transport the action, quotient. Inversions in
/// the original action become valency-1 virtual vertices (half edges).
pub fn fine_quotient(g: &Graph, act: &GroupAction) -> Result<FineGraph> {
    g.validate()?;
    act.validate(g)?;
    let sub = subdivide(g);
    let induced = induce_on_subdivision(g, act, &sub);
    let fine = quotient_inversion_free(&sub.fine.graph, &sub.fine.kind, &induced)?;
    fine.validate()?;
    Ok(fine)
}

pub type WeightMap = BTreeMap<(VertexId, VertexId), Q>;

/// Weights of the fine quotient: m_{v,w} counts the neighbors of one (any)
/// preimage of v that lie over w, loops counting twice. Checks every preimage
/// and reports a mismatch, which signals that the tables are not an action by
/// automorphisms.
pub fn quotient_weights(g: &Graph, act: &GroupAction) -> Result<WeightMap> {
    g.validate()?;
    act.validate(g)?;
    let vrep = act.vertex_reps(g);
    let mut weights: WeightMap = BTreeMap::new();
    let mut seen_for: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for v in g.vertices() {
        let rv = vrep[&v];
        let mut counts: BTreeMap<VertexId, i64> = BTreeMap::new();
        for a in g.out_edges(v) {
            *counts.entry(vrep[&g.tgt(a)]).or_insert(0) += 1;
        }
        if let Some(&first) = seen_for.get(&rv) {
            // Compare against the counts recorded for the first preimage.
            for (&(s, t), m) in weights.iter() {
                if s != rv {
                    continue;
                }
                if qint(counts.get(&t).copied().unwrap_or(0)) != *m {
                    return Err(Error::WeightMismatch(format!(
                        "preimages {first} and {v} of {rv} disagree over {t}"
                    )));
                }
            }
            for (&t, &c) in &counts {
                if !weights.contains_key(&(rv, t)) && c != 0 {
                    return Err(Error::WeightMismatch(format!(
                        "preimages {first} and {v} of {rv} disagree over {t}"
                    )));
                }
            }
        } else {
            seen_for.insert(rv, v);
            for (t, c) in counts {
                weights.insert((rv, t), qint(c));
            }
        }
    }
    Ok(weights)
}

/// Reduction of a weighted fine quotient: parallel edges between the same
/// actual pair merge, half edges survive as diagonal weight, and the weight
/// map is kept unchanged. The result is the weighted reduced fine quotient,
/// with no cusps (finite data).
pub fn reduction(fg: &FineGraph, weights: &WeightMap) -> Result<Wcfg> {
    fg.validate()?;
    let actual: Vec<VertexId> = fg.actual_vertices().collect();
    let mut labels = BTreeMap::new();
    for &v in &actual {
        if let Some(l) = fg.graph.label(v) {
            labels.insert(v, l.to_string());
        }
    }
    Wcfg::from_parts(actual, labels, weights.clone(), Vec::new(), None)
}

/// Exact graph isomorphism on graphs with at most 64 vertices, by
/// backtracking over degree-compatible assignments. Returns a witness vertex
/// bijection when the graphs are isomorphic.
pub fn is_isomorphic(g1: &Graph, g2: &Graph) -> Result<Option<BTreeMap<VertexId, VertexId>>> {
    g1.validate()?;
    g2.validate()?;
    if g1.vertex_count() > 64 || g2.vertex_count() > 64 {
        return Err(Error::InvalidGraph(
            "isomorphism search is limited to 64 vertices".into(),
        ));
    }
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return Ok(None);
    }
    let vs1: Vec<VertexId> = g1.vertices().collect();
    let vs2: Vec<VertexId> = g2.vertices().collect();
    let deg1: Vec<usize> = vs1.iter().map(|&v| g1.valency(v)).collect();
    let deg2: Vec<usize> = vs2.iter().map(|&v| g2.valency(v)).collect();
    {
        let mut d1 = deg1.clone();
        let mut d2 = deg2.clone();
        d1.sort_unstable();
        d2.sort_unstable();
        if d1 != d2 {
            return Ok(None);
        }
    }
    // Order source vertices by descending degree for earlier pruning.
    let mut order: Vec<usize> = (0..vs1.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(deg1[i]));

    let adj1: Vec<Vec<usize>> = vs1
        .iter()
        .map(|&v| vs1.iter().map(|&w| g1.adjacency(v, w)).collect())
        .collect();
    let adj2: Vec<Vec<usize>> = vs2
        .iter()
        .map(|&v| vs2.iter().map(|&w| g2.adjacency(v, w)).collect())
        .collect();

    fn search(
        pos: usize,
        order: &[usize],
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        deg1: &[usize],
        deg2: &[usize],
        adj1: &[Vec<usize>],
        adj2: &[Vec<usize>],
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let i = order[pos];
        'candidates: for j in 0..deg2.len() {
            if used[j] || deg2[j] != deg1[i] || adj2[j][j] != adj1[i][i] {
                continue;
            }
            for &k in &order[..pos] {
                let mk = map[k].expect("assigned earlier");
                if adj1[i][k] != adj2[j][mk] || adj1[k][i] != adj2[mk][j] {
                    continue 'candidates;
                }
            }
            map[i] = Some(j);
            used[j] = true;
            if search(pos + 1, order, map, used, deg1, deg2, adj1, adj2) {
                return true;
            }
            map[i] = None;
            used[j] = false;
        }
        false
    }

    let mut map: Vec<Option<usize>> = vec![None; vs1.len()];
    let mut used = vec![false; vs2.len()];
    if search(0, &order, &mut map, &mut used, &deg1, &deg2, &adj1, &adj2) {
        let witness = vs1
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, vs2[map[i].expect("complete")]))
            .collect();
        Ok(Some(witness))
    } else {
        Ok(None)
    }
}

/// Builds a plain undirected graph from an edge list (vertices are the ids
/// mentioned). Convenience for reference graphs in tests and verification.
pub fn graph_from_edges(edges: &[(VertexId, VertexId)]) -> Graph {
    let mut g = Graph::new();
    for &(v, w) in edges {
        g.add_edge_pair(v, w);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> Graph {
        let mut g = Graph::new();
        g.add_edge_pair(0, 1);
        g
    }

    fn identity_action(g: &Graph) -> GroupAction {
        GroupAction::generate(g, vec![]).expect("identity action")
    }

    fn swap_action(g: &Graph) -> GroupAction {
        // Swap the endpoints of the single edge 0—1 (an inversion).
        let vp = BTreeMap::from([(0, 1), (1, 0)]);
        let ep = BTreeMap::from([(0, 1), (1, 0)]);
        GroupAction::generate(g, vec![(vp, ep)]).expect("swap action")
    }

    #[test]
    fn subdivision_of_single_edge_is_a_path() {
        let g = single_edge();
        let fine = barycentric_subdivision(&g).unwrap();
        assert_eq!(fine.graph.vertex_count(), 3);
        assert_eq!(fine.graph.edge_count(), 4);
        assert_eq!(fine.actual_vertices().count(), 2);
        let m: Vec<_> = fine.virtual_vertices().collect();
        assert_eq!(m.len(), 1);
        assert_eq!(fine.graph.valency(m[0]), 2);
    }

    #[test]
    fn subdivision_of_loop_gives_double_edge() {
        let mut g = Graph::new();
        g.add_edge_pair(5, 5);
        let fine = barycentric_subdivision(&g).unwrap();
        assert_eq!(fine.graph.vertex_count(), 2);
        assert_eq!(fine.graph.edge_count(), 4);
        let m: Vec<_> = fine.virtual_vertices().collect();
        assert_eq!(fine.graph.adjacency(5, m[0]), 2);
    }

    #[test]
    fn subdivision_of_cycle_alternates() {
        let mut g = Graph::new();
        g.add_edge_pair(0, 1);
        g.add_edge_pair(1, 2);
        g.add_edge_pair(2, 0);
        let fine = barycentric_subdivision(&g).unwrap();
        assert_eq!(fine.graph.vertex_count(), 6);
        assert_eq!(fine.graph.edge_count(), 12);
        fine.validate().unwrap();
        for v in fine.graph.vertices() {
            assert_eq!(fine.graph.valency(v), 2);
        }
    }

    #[test]
    fn inversion_produces_half_edge() {
        let g = single_edge();
        let act = swap_action(&g);
        assert_eq!(act.order(), 2);
        let q = fine_quotient(&g, &act).unwrap();
        assert_eq!(q.actual_vertices().count(), 1);
        let virtuals: Vec<_> = q.virtual_vertices().collect();
        assert_eq!(virtuals.len(), 1);
        assert_eq!(q.graph.valency(virtuals[0]), 1);
        let w = quotient_weights(&g, &act).unwrap();
        assert_eq!(w[&(0, 0)], qint(1));
    }

    #[test]
    fn loop_counts_twice() {
        let mut g = Graph::new();
        g.add_edge_pair(3, 3);
        let act = identity_action(&g);
        let w = quotient_weights(&g, &act).unwrap();
        assert_eq!(w[&(3, 3)], qint(2));
    }

    #[test]
    fn branch_rotation_weights() {
        // Depth-2 ball of the 3-regular tree: center 0, children 1,2,3,
        // grandchildren 2 per child. Rotate the three branches cyclically and
        // swap the two grandchildren within every branch.
        let mut g = Graph::new();
        let mut edges = Vec::new();
        for c in 1..=3u32 {
            edges.push(g.add_edge_pair(0, c));
        }
        let mut grands = Vec::new();
        for c in 1..=3u32 {
            for k in 0..2u32 {
                let gc = 3 + c * 2 + k;
                grands.push(g.add_edge_pair(c, gc));
            }
        }
        let mut vp = BTreeMap::from([(0u32, 0u32)]);
        for c in 1..=3u32 {
            vp.insert(c, c % 3 + 1);
            for k in 0..2u32 {
                vp.insert(3 + c * 2 + k, 3 + (c % 3 + 1) * 2 + k);
            }
        }
        let mut ep = BTreeMap::new();
        for c in 0..3usize {
            let (a, b) = edges[c];
            let (ta, tb) = edges[(c + 1) % 3];
            ep.insert(a, ta);
            ep.insert(b, tb);
            for k in 0..2 {
                let (a, b) = grands[c * 2 + k];
                let (ta, tb) = grands[((c + 1) % 3) * 2 + k];
                ep.insert(a, ta);
                ep.insert(b, tb);
            }
        }
        let mut swap_v = BTreeMap::from([(0u32, 0u32)]);
        let mut swap_e = BTreeMap::new();
        for c in 1..=3u32 {
            swap_v.insert(c, c);
            swap_v.insert(3 + c * 2, 3 + c * 2 + 1);
            swap_v.insert(3 + c * 2 + 1, 3 + c * 2);
            let (a, b) = edges[(c - 1) as usize];
            swap_e.insert(a, a);
            swap_e.insert(b, b);
            let (a0, b0) = grands[(c - 1) as usize * 2];
            let (a1, b1) = grands[(c - 1) as usize * 2 + 1];
            swap_e.insert(a0, a1);
            swap_e.insert(b0, b1);
            swap_e.insert(a1, a0);
            swap_e.insert(b1, b0);
        }
        let act = GroupAction::generate(&g, vec![(vp, ep), (swap_v, swap_e)]).unwrap();
        assert_eq!(act.order(), 6);
        let w = quotient_weights(&g, &act).unwrap();
        assert_eq!(w[&(0, 1)], qint(3));
        assert_eq!(w[&(1, 0)], qint(1));
        assert_eq!(w[&(1, 5)], qint(2));
        assert_eq!(w[&(5, 1)], qint(1));
        // Conservation of valency.
        let q = fine_quotient(&g, &act).unwrap();
        for v in q.actual_vertices() {
            let total: Q = w
                .iter()
                .filter(|((s, _), _)| *s == v)
                .map(|(_, m)| m.clone())
                .fold(Q::from_integer(0.into()), |a, b| a + b);
            assert_eq!(total, qint(g.valency(v) as i64));
        }
    }

    #[test]
    fn inversion_free_quotient_matches_plain_subdivision() {
        // Square 0-1-2-3 rotated by one step; the plain quotient is a loop,
        // whose subdivision is the double edge computed by fine_quotient.
        let mut g = Graph::new();
        let e01 = g.add_edge_pair(0, 1);
        let e12 = g.add_edge_pair(1, 2);
        let e23 = g.add_edge_pair(2, 3);
        let e30 = g.add_edge_pair(3, 0);
        let vp = BTreeMap::from([(0u32, 1u32), (1, 2), (2, 3), (3, 0)]);
        let cyc = [e01, e12, e23, e30];
        let mut ep = BTreeMap::new();
        for i in 0..4 {
            ep.insert(cyc[i].0, cyc[(i + 1) % 4].0);
            ep.insert(cyc[i].1, cyc[(i + 1) % 4].1);
        }
        let act = GroupAction::generate(&g, vec![(vp, ep)]).unwrap();
        assert_eq!(act.order(), 4);
        let q = fine_quotient(&g, &act).unwrap();
        assert_eq!(q.actual_vertices().count(), 1);
        assert_eq!(q.virtual_vertices().count(), 1);
        assert_eq!(q.graph.edge_count(), 4);

        let mut lg = Graph::new();
        lg.add_edge_pair(0, 0);
        let lsub = barycentric_subdivision(&lg).unwrap();
        assert!(is_isomorphic(&q.graph, &lsub.graph).unwrap().is_some());
        let w = quotient_weights(&g, &act).unwrap();
        assert_eq!(w[&(0, 0)], qint(2));
    }

    #[test]
    fn petersen_is_not_the_prism() {
        let petersen = graph_from_edges(&[
            (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
            (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
            (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
        ]);
        let prism = graph_from_edges(&[
            (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
            (5, 6), (6, 7), (7, 8), (8, 9), (9, 5),
            (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
        ]);
        assert!(is_isomorphic(&petersen, &prism).unwrap().is_none());
        assert!(is_isomorphic(&petersen, &petersen).unwrap().is_some());
    }

    #[test]
    fn isomorphism_differs_on_vertex_count() {
        let cube = graph_from_edges(&[
            (0, 1), (1, 2), (2, 3), (3, 0),
            (4, 5), (5, 6), (6, 7), (7, 4),
            (0, 4), (1, 5), (2, 6), (3, 7),
        ]);
        let petersen = graph_from_edges(&[
            (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
            (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
            (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
        ]);
        assert!(is_isomorphic(&cube, &petersen).unwrap().is_none());
    }

    #[test]
    fn bad_group_table_is_rejected() {
        let g = single_edge();
        // Non-involutive "swap" with an identity-claiming table.
        let vp = BTreeMap::from([(0u32, 1u32), (1, 0)]);
        let ep = BTreeMap::from([(0u32, 0u32), (1, 1)]);
        let idv = BTreeMap::from([(0u32, 0u32), (1, 1)]);
        let ide = BTreeMap::from([(0u32, 0u32), (1, 1)]);
        let res = GroupAction::new(
            &g,
            vec![vec![0, 1], vec![1, 0]],
            vec![idv, vp],
            vec![ide, ep],
        );
        assert!(res.is_err());
    }
}
