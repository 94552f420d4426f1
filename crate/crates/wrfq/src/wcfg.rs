//! Weighted combinatorially finite graphs and their matrices.
//!
//! A `Wcfg` is a finite weighted core plus a list of cusp descriptors, each
//! describing an infinite tail of constant weights hanging off an attach
//! vertex. The associated `CfMatrix` is the neighborhood matrix: a dense
//! block over the core (with one extra row per cusp for the step out of the
//! core) plus the periodic tails. Charges are finitely supported rational
//! measures on the infinite vertex set; the transition operator acts on them
//! exactly, materializing tail positions lazily.

use crate::graph::VertexId;
use crate::{Error, Q, Result};
use num::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet};

/// One infinite tail of constant weights: vertices v_1, v_2, … with
/// m_{v_t, v_{t−1}} = inward and m_{v_t, v_{t+1}} = outward for every t.
/// When `attach` is set, v_0 is that core vertex and the weight from it into
/// v_1 equals `outward` (homogeneous boundary); a graph whose true boundary
/// weight differs stores one more core vertex instead. `attach = None` is a
/// free-standing ray whose first vertex v_1 has only the outward neighbor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuspDescriptor {
    pub attach: Option<VertexId>,
    pub inward: Q,
    pub outward: Q,
    pub label_scheme: Option<String>,
}

impl CuspDescriptor {
    pub fn new(attach: Option<VertexId>, inward: Q, outward: Q) -> Self {
        CuspDescriptor { attach, inward, outward, label_scheme: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.inward.is_positive() || !self.outward.is_positive() {
            return Err(Error::InvalidWcfg(format!(
                "cusp weights must be positive, got inward {} outward {}",
                self.inward, self.outward
            )));
        }
        Ok(())
    }

    /// Label of tail vertex t under the scheme: `{}` in the scheme is
    /// replaced by t, otherwise the index is appended.
    pub fn tail_label(&self, t: u64) -> String {
        match &self.label_scheme {
            Some(s) if s.contains("{}") => s.replace("{}", &t.to_string()),
            Some(s) => format!("{s}[{t}]"),
            None => format!("tail {t}"),
        }
    }
}

/// A vertex of the infinite graph: a core vertex, or the t-th vertex of the
/// tail of cusp number c (t ≥ 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Site {
    Core(VertexId),
    Tail { cusp: usize, t: u64 },
}

/// Finitely supported rational measure on sites.
pub type Charge = BTreeMap<Site, Q>;

/// Builds the charge δ_v.
pub fn delta(site: Site) -> Charge {
    BTreeMap::from([(site, Q::one())])
}

fn add_to(mu: &mut Charge, site: Site, value: Q) {
    if value.is_zero() {
        return;
    }
    let slot = mu.entry(site).or_insert_with(Q::zero);
    *slot += value;
    if slot.is_zero() {
        mu.remove(&site);
    }
}

/// Weighted CF graph: finite core with a rational weight on every ordered
/// pair of adjacent vertices (diagonal weight = half-edge weight; a reduced
/// loop carries 2), plus cusp descriptors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wcfg {
    /// Core vertices in input (canonical) order.
    vertices: Vec<VertexId>,
    labels: BTreeMap<VertexId, String>,
    /// Nonzero weights m_{v,w} on ordered pairs of core vertices.
    weights: BTreeMap<(VertexId, VertexId), Q>,
    cusps: Vec<CuspDescriptor>,
    /// Residue field size at the place the graph lives over, when known.
    pub q_param: Option<u64>,
}

impl Wcfg {
    pub fn from_parts(
        vertices: Vec<VertexId>,
        labels: BTreeMap<VertexId, String>,
        weights: BTreeMap<(VertexId, VertexId), Q>,
        cusps: Vec<CuspDescriptor>,
        q_param: Option<u64>,
    ) -> Result<Self> {
        let weights: BTreeMap<_, _> =
            weights.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        let w = Wcfg { vertices, labels, weights, cusps, q_param };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let vset: BTreeSet<VertexId> = self.vertices.iter().copied().collect();
        if vset.len() != self.vertices.len() {
            return Err(Error::InvalidWcfg("duplicate vertex id".into()));
        }
        for &(v, w) in self.weights.keys() {
            if !vset.contains(&v) || !vset.contains(&w) {
                return Err(Error::InvalidWcfg(format!(
                    "weight ({v},{w}) references an unknown vertex"
                )));
            }
        }
        for (&(v, w), m) in &self.weights {
            if v != w && m.is_zero() != self.weight(w, v).is_zero() {
                return Err(Error::InvalidWcfg(format!(
                    "weights are not graphic at ({v},{w})"
                )));
            }
        }
        for c in &self.cusps {
            c.validate()?;
            if let Some(a) = c.attach {
                if !vset.contains(&a) {
                    return Err(Error::InvalidWcfg(format!(
                        "cusp attaches to unknown vertex {a}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn labels(&self) -> &BTreeMap<VertexId, String> {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels.get(&v).map(String::as_str)
    }

    pub fn cusps(&self) -> &[CuspDescriptor] {
        &self.cusps
    }

    pub fn weights(&self) -> &BTreeMap<(VertexId, VertexId), Q> {
        &self.weights
    }

    pub fn weight(&self, v: VertexId, w: VertexId) -> Q {
        self.weights.get(&(v, w)).cloned().unwrap_or_else(Q::zero)
    }

    /// Off-diagonal neighbors of v in id order.
    pub fn neighbors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out: BTreeSet<VertexId> = BTreeSet::new();
        for &(s, t) in self.weights.keys() {
            if s == v && t != v {
                out.insert(t);
            }
            if t == v && s != v {
                out.insert(s);
            }
        }
        out.into_iter().collect()
    }

    /// Diagonal weight at v (half edge / reduced loop weight).
    pub fn half_edge(&self, v: VertexId) -> Q {
        self.weight(v, v)
    }

    /// Indices of the cusps attached at v.
    pub fn cusps_at(&self, v: VertexId) -> Vec<usize> {
        self.cusps
            .iter()
            .enumerate()
            .filter_map(|(i, c)| (c.attach == Some(v)).then_some(i))
            .collect()
    }

    /// Full column sum of v in the infinite matrix: core weights, the
    /// diagonal, and one outward step per attached cusp.
    pub fn column_sum(&self, v: VertexId) -> Q {
        let mut s = Q::zero();
        for (&(x, _), m) in &self.weights {
            if x == v {
                s += m;
            }
        }
        for i in self.cusps_at(v) {
            s += &self.cusps[i].outward;
        }
        s
    }

    /// A WCFG is regular when every stored weight is positive.
    pub fn is_regular(&self) -> bool {
        self.weights.values().all(|m| m.is_positive())
            && self.cusps.iter().all(|c| c.inward.is_positive() && c.outward.is_positive())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.weights.values().all(|m| !m.is_negative())
    }

    /// Checks the quotient-derived column-sum law Σ_w m_{v,w} = q_param + 1.
    pub fn check_quotient_column_sums(&self) -> Result<()> {
        let Some(q) = self.q_param else {
            return Err(Error::InvalidWcfg("q_param is not set".into()));
        };
        let expect = Q::from_integer((q + 1).into());
        for &v in &self.vertices {
            let s = self.column_sum(v);
            if s != expect {
                return Err(Error::InvalidWcfg(format!(
                    "column {v} sums to {s}, expected {expect}"
                )));
            }
        }
        for c in &self.cusps {
            if &c.inward + &c.outward != expect {
                return Err(Error::InvalidWcfg(format!(
                    "cusp column sums to {}, expected {expect}",
                    &c.inward + &c.outward
                )));
            }
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Result<CfMatrix> {
        self.validate()?;
        let n = self.vertices.len();
        let k = self.cusps.len();
        let mut block = vec![vec![Q::zero(); n]; n + k];
        for (ci, &v) in self.vertices.iter().enumerate() {
            for (ri, &w) in self.vertices.iter().enumerate() {
                block[ri][ci] = self.weight(v, w);
            }
            for (i, c) in self.cusps.iter().enumerate() {
                if c.attach == Some(v) {
                    block[n + i][ci] = c.outward.clone();
                }
            }
        }
        Ok(CfMatrix {
            core: self.vertices.clone(),
            labels: self.labels.clone(),
            block,
            cusps: self.cusps.clone(),
            q_param: self.q_param,
        })
    }

    /// Applies the (un-normalized) neighborhood operator to a charge: the
    /// image of δ_v is Σ_w m_{v,w} δ_w over core targets plus one first-tail
    /// term per cusp attached at v; tail sites step inward and outward with
    /// the descriptor weights.
    pub fn apply_operator(&self, mu: &Charge) -> Charge {
        let mut out = Charge::new();
        for (site, value) in mu {
            if value.is_zero() {
                continue;
            }
            match *site {
                Site::Core(v) => {
                    for (&(s, t), m) in &self.weights {
                        if s == v {
                            add_to(&mut out, Site::Core(t), m * value);
                        }
                    }
                    for i in self.cusps_at(v) {
                        add_to(
                            &mut out,
                            Site::Tail { cusp: i, t: 1 },
                            &self.cusps[i].outward * value,
                        );
                    }
                }
                Site::Tail { cusp, t } => {
                    let c = &self.cusps[cusp];
                    add_to(&mut out, Site::Tail { cusp, t: t + 1 }, &c.outward * value);
                    if t > 1 {
                        add_to(&mut out, Site::Tail { cusp, t: t - 1 }, &c.inward * value);
                    } else if let Some(a) = c.attach {
                        add_to(&mut out, Site::Core(a), &c.inward * value);
                    }
                }
            }
        }
        out
    }

    /// Moves the first `depth` tail vertices of every cusp into the core,
    /// with fresh ids, shifting the descriptors deeper. The infinite object
    /// is unchanged.
    pub fn materialize(&self, depth: u64) -> Wcfg {
        if depth == 0 || self.cusps.is_empty() {
            return self.clone();
        }
        let mut next = self.vertices.iter().copied().max().map_or(0, |m| m + 1);
        let mut vertices = self.vertices.clone();
        let mut labels = self.labels.clone();
        let mut weights = self.weights.clone();
        let mut cusps = Vec::new();
        for c in &self.cusps {
            let mut prev = c.attach;
            let mut ids = Vec::new();
            for t in 1..=depth {
                let id = next;
                next += 1;
                vertices.push(id);
                labels.insert(id, c.tail_label(t));
                if let Some(p) = prev {
                    weights.insert((id, p), c.inward.clone());
                    weights.insert((p, id), c.outward.clone());
                }
                prev = Some(id);
                ids.push(id);
            }
            let scheme = c.label_scheme.as_ref().map(|s| {
                if s.contains("{}") {
                    // Indices restart at 1 on the shifted descriptor; keep the
                    // scheme but offset the substituted index.
                    format!("{}+{}", s.clone(), depth)
                } else {
                    s.clone()
                }
            });
            cusps.push(CuspDescriptor {
                attach: Some(*ids.last().expect("depth >= 1")),
                inward: c.inward.clone(),
                outward: c.outward.clone(),
                label_scheme: scheme,
            });
        }
        Wcfg { vertices, labels, weights, cusps, q_param: self.q_param }
    }

    /// Weighted-graph equality up to isomorphism of the underlying infinite
    /// objects: both sides are canonicalized, materialized to a common depth,
    /// and compared as finite weighted graphs with boundary markers.
    pub fn equivalent(&self, other: &Wcfg) -> bool {
        let a = detect_cusps(self).0;
        let b = detect_cusps(other).0;
        let depth = 2 + a.vertices.len().max(b.vertices.len()) as u64;
        let ma = a.materialize(depth);
        let mb = b.materialize(depth);
        weighted_isomorphic(&ma, &mb)
    }
}

/// Neighborhood matrix of a WCFG: dense block over the core, one extra row
/// per cusp for the attach → first-tail entry, then periodic tails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfMatrix {
    /// Canonical column order (core vertices in input order).
    pub core: Vec<VertexId>,
    pub labels: BTreeMap<VertexId, String>,
    /// `(core.len() + cusps.len()) × core.len()`; entry `[w][v] = m_{v,w}`,
    /// row `core.len() + i` is the first tail vertex of cusp i.
    pub block: Vec<Vec<Q>>,
    pub cusps: Vec<CuspDescriptor>,
    pub q_param: Option<u64>,
}

impl CfMatrix {
    fn col_index(&self, v: VertexId) -> Option<usize> {
        self.core.iter().position(|&x| x == v)
    }

    pub fn column_sum(&self, ci: usize) -> Q {
        self.block.iter().map(|row| row[ci].clone()).fold(Q::zero(), |a, b| a + b)
    }

    /// Rebuilds the WCFG. Requires homogeneous boundaries (the attach-row
    /// entry equals the descriptor's outward weight); a matrix whose boundary
    /// was scaled differently (see [`CfMatrix::normalize`]) is first brought
    /// back to that shape by materializing one tail step.
    pub fn to_wcfg(&self) -> Result<Wcfg> {
        let n = self.core.len();
        if self.block.len() != n + self.cusps.len() || self.block.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidWcfg("block shape mismatch".into()));
        }
        for (i, c) in self.cusps.iter().enumerate() {
            let row = &self.block[n + i];
            for (ci, entry) in row.iter().enumerate() {
                let is_attach = c.attach == Some(self.core[ci]);
                if is_attach && *entry != c.outward {
                    return self.materialize_boundary()?.to_wcfg();
                }
                if !is_attach && !entry.is_zero() {
                    return Err(Error::InvalidWcfg(format!(
                        "cusp {i} has an entry off its attach column"
                    )));
                }
            }
            if c.attach.is_some() && !row.iter().any(|e| !e.is_zero()) {
                return Err(Error::InvalidWcfg(format!(
                    "cusp {i} attach column has no outward entry"
                )));
            }
        }
        let mut weights = BTreeMap::new();
        for (ci, &v) in self.core.iter().enumerate() {
            for (ri, &w) in self.core.iter().enumerate() {
                let m = &self.block[ri][ci];
                if !m.is_zero() {
                    weights.insert((v, w), m.clone());
                }
            }
        }
        Wcfg::from_parts(
            self.core.clone(),
            self.labels.clone(),
            weights,
            self.cusps.clone(),
            self.q_param,
        )
    }

    /// Moves each cusp's first tail vertex into the core. This absorbs an
    /// inhomogeneous attach-row entry (kept in the block) so that the
    /// remaining descriptor is homogeneous again.
    pub fn materialize_boundary(&self) -> Result<CfMatrix> {
        let n = self.core.len();
        let mut next = self.core.iter().copied().max().map_or(0, |m| m + 1);
        let mut core = self.core.clone();
        let mut labels = self.labels.clone();
        let mut cusps = Vec::new();
        let mut new_ids = Vec::new();
        for c in &self.cusps {
            let id = next;
            next += 1;
            core.push(id);
            labels.insert(id, c.tail_label(1));
            new_ids.push(id);
            cusps.push(CuspDescriptor {
                attach: Some(id),
                inward: c.inward.clone(),
                outward: c.outward.clone(),
                label_scheme: c.label_scheme.clone(),
            });
        }
        let m = core.len();
        let mut block = vec![vec![Q::zero(); m]; m + cusps.len()];
        for ci in 0..n {
            for ri in 0..n {
                block[ri][ci] = self.block[ri][ci].clone();
            }
            // attach → first tail entries move into the square part
            for (i, _) in self.cusps.iter().enumerate() {
                block[n + i][ci] = self.block[n + i][ci].clone();
            }
        }
        for (i, c) in self.cusps.iter().enumerate() {
            let ci = n + i;
            if let Some(a) = c.attach {
                let ri = self
                    .col_index(a)
                    .ok_or_else(|| Error::InvalidWcfg("attach vertex not in core".into()))?;
                block[ri][ci] = c.inward.clone();
            }
            block[m + i][ci] = c.outward.clone();
        }
        Ok(CfMatrix { core, labels, block, cusps, q_param: self.q_param })
    }

    /// Divides every column (including the tail columns) by its sum, giving
    /// a column-stochastic transition matrix.
    pub fn normalize(&self) -> Result<CfMatrix> {
        let n = self.core.len();
        for row in &self.block {
            for e in row {
                if e.is_negative() {
                    return Err(Error::NotNormalizable("negative entry".into()));
                }
            }
        }
        let mut out = self.clone();
        for ci in 0..n {
            let s = self.column_sum(ci);
            if s.is_zero() {
                return Err(Error::NotNormalizable(format!(
                    "column of vertex {} is zero",
                    self.core[ci]
                )));
            }
            for row in out.block.iter_mut() {
                let v = &row[ci] / &s;
                row[ci] = v;
            }
        }
        for c in out.cusps.iter_mut() {
            let s = &c.inward + &c.outward;
            if s.is_zero() {
                return Err(Error::NotNormalizable("zero cusp column".into()));
            }
            c.inward = &c.inward / &s;
            c.outward = &c.outward / &s;
        }
        Ok(out)
    }

    /// Applies the operator this matrix represents to a charge; tails extend
    /// lazily so the result is exact on the infinite graph.
    pub fn apply_operator(&self, mu: &Charge) -> Charge {
        let n = self.core.len();
        let mut out = Charge::new();
        for (site, value) in mu {
            if value.is_zero() {
                continue;
            }
            match *site {
                Site::Core(v) => {
                    let ci = self
                        .col_index(v)
                        .expect("charge supported outside the represented region");
                    for (ri, &w) in self.core.iter().enumerate() {
                        add_to(&mut out, Site::Core(w), &self.block[ri][ci] * value);
                    }
                    for i in 0..self.cusps.len() {
                        add_to(
                            &mut out,
                            Site::Tail { cusp: i, t: 1 },
                            &self.block[n + i][ci] * value,
                        );
                    }
                }
                Site::Tail { cusp, t } => {
                    let c = &self.cusps[cusp];
                    add_to(&mut out, Site::Tail { cusp, t: t + 1 }, &c.outward * value);
                    if t > 1 {
                        add_to(&mut out, Site::Tail { cusp, t: t - 1 }, &c.inward * value);
                    } else if let Some(a) = c.attach {
                        add_to(&mut out, Site::Core(a), &c.inward * value);
                    }
                }
            }
        }
        out
    }

    /// CSV of the block: header row of column ids, then one row per block row
    /// (core vertex or cusp first-tail), followed by a descriptor list.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let name = |v: VertexId| {
            self.labels.get(&v).cloned().unwrap_or_else(|| v.to_string())
        };
        s.push_str("row");
        for &v in &self.core {
            s.push(',');
            s.push_str(&name(v));
        }
        s.push('\n');
        for (ri, row) in self.block.iter().enumerate() {
            if ri < self.core.len() {
                s.push_str(&name(self.core[ri]));
            } else {
                s.push_str(&format!("cusp{}", ri - self.core.len()));
            }
            for e in row {
                s.push(',');
                s.push_str(&e.to_string());
            }
            s.push('\n');
        }
        for (i, c) in self.cusps.iter().enumerate() {
            s.push_str(&format!(
                "# cusp {i}: attach {:?}, inward {}, outward {}\n",
                c.attach, c.inward, c.outward
            ));
        }
        s
    }
}

struct TailCandidate {
    leaf: VertexId,
    /// Deepest first: tail[0] is the leaf, tail.last() is adjacent to attach.
    tail: Vec<VertexId>,
    attach: VertexId,
    inward: Q,
    outward: Q,
}

/// From a leaf, walks the unique simple path of tail-like vertices and finds
/// the longest terminal chain with constant weights whose attach vertex sends
/// exactly the outward weight into it. A truncation cuts the outward side, so
/// the leaf is read as the deep end of the tail.
fn tail_candidate(g: &Wcfg, leaf: VertexId) -> Option<TailCandidate> {
    let mut walk = vec![leaf];
    let mut prev = leaf;
    let mut cur = leaf;
    let mut stop = None;
    loop {
        let nb: Vec<VertexId> = g.neighbors(cur).into_iter().filter(|&x| x != prev).collect();
        if walk.len() > 1
            && (g.neighbors(cur).len() != 2
                || !g.half_edge(cur).is_zero()
                || !g.cusps_at(cur).is_empty())
        {
            walk.pop();
            stop = Some(cur);
            break;
        }
        match nb[..] {
            [next] => {
                prev = cur;
                cur = next;
                walk.push(cur);
            }
            _ => break,
        }
    }
    if walk.len() < 2 {
        return None;
    }
    let inward = g.weight(walk[0], walk[1]);
    let outward = g.weight(walk[1], walk[0]);
    if !inward.is_positive() || !outward.is_positive() {
        return None;
    }
    // Largest k such that the chain walk[0..=k] with attach walk[k+1] (or the
    // stop vertex) has the constant-weight pattern.
    let k_max = match stop {
        Some(_) => walk.len() - 1,
        None => walk.len().checked_sub(2)?,
    };
    let attach_of = |k: usize| -> VertexId {
        if k + 1 < walk.len() { walk[k + 1] } else { stop.expect("k_max bound") }
    };
    let mut good = None;
    for i in 0..=k_max {
        if g.weight(walk[i], attach_of(i)) != inward {
            break;
        }
        if i > 0 && g.weight(walk[i], walk[i - 1]) != outward {
            break;
        }
        good = Some(i);
    }
    let mut k = good?;
    loop {
        if k < 1 {
            return None;
        }
        if g.weight(attach_of(k), walk[k]) == outward {
            break;
        }
        k -= 1;
    }
    Some(TailCandidate {
        leaf,
        tail: walk[..=k].to_vec(),
        attach: attach_of(k),
        inward,
        outward,
    })
}

/// Detects maximal terminal chains of constant weights in the finite part of
/// a WCFG and absorbs them into cusp descriptors; also pushes existing
/// descriptors inward over core vertices that continue their pattern, and
/// stores free-standing rays as a singleton core vertex carrying the ray.
/// Returns the canonicalized graph and diagnostics for chains that look like
/// tails but have non-constant weights (left untouched). Where a chain is
/// symmetric, the reading with the larger inward weight is preferred.
pub fn detect_cusps(w: &Wcfg) -> (Wcfg, Vec<String>) {
    let mut g = w.clone();
    let mut diagnostics = Vec::new();
    let mut next_id = g.vertices.iter().copied().max().map_or(0, |m| m + 1);
    for i in 0..g.cusps.len() {
        if g.cusps[i].attach.is_none() {
            let v = next_id;
            next_id += 1;
            g.vertices.push(v);
            g.labels.insert(v, g.cusps[i].tail_label(1));
            g.cusps[i].attach = Some(v);
        }
    }
    // Absorb terminal chains, best candidate first, rescanning after each.
    loop {
        let mut candidates = Vec::new();
        let mut rejected = Vec::new();
        for &v in &g.vertices {
            let is_leaf = g.neighbors(v).len() == 1
                && g.half_edge(v).is_zero()
                && g.cusps_at(v).is_empty();
            if !is_leaf {
                continue;
            }
            match tail_candidate(&g, v) {
                Some(c) => candidates.push(c),
                None => rejected.push(v),
            }
        }
        let Some(best) = candidates
            .into_iter()
            .max_by(|a, b| a.inward.cmp(&b.inward).then(b.leaf.cmp(&a.leaf)))
        else {
            for v in rejected {
                diagnostics.push(format!(
                    "terminal chain ending at vertex {v} has non-constant weights; descriptor omitted"
                ));
            }
            break;
        };
        let scheme = g.labels.get(best.tail.last().expect("nonempty tail")).cloned();
        for &t in &best.tail {
            g.vertices.retain(|&x| x != t);
            g.labels.remove(&t);
            g.weights.retain(|&(a, b), _| a != t && b != t);
        }
        g.cusps.push(CuspDescriptor {
            attach: Some(best.attach),
            inward: best.inward,
            outward: best.outward,
            label_scheme: scheme,
        });
    }
    // Push descriptors inward over core vertices continuing the pattern.
    loop {
        let mut changed = false;
        for i in 0..g.cusps.len() {
            let Some(v) = g.cusps[i].attach else { continue };
            let nb = g.neighbors(v);
            if nb.len() != 1 || !g.half_edge(v).is_zero() || g.cusps_at(v).len() != 1 {
                continue;
            }
            let u = nb[0];
            if g.weight(v, u) == g.cusps[i].inward && g.weight(u, v) == g.cusps[i].outward {
                g.cusps[i].attach = Some(u);
                g.vertices.retain(|&x| x != v);
                g.labels.remove(&v);
                g.weights.retain(|&(a, b), _| a != v && b != v);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (g, diagnostics)
}

/// Exact weighted isomorphism of two finite WCFGs (cusps must agree as
/// boundary markers on the mapped attach vertices).
pub fn weighted_isomorphic(a: &Wcfg, b: &Wcfg) -> bool {
    if a.vertices.len() != b.vertices.len() || a.cusps.len() != b.cusps.len() {
        return false;
    }
    let va = a.vertices.clone();
    let vb = b.vertices.clone();
    // Per-vertex invariant: (diagonal, sorted multiset of (out, in) weights,
    // sorted multiset of attached-cusp (inward, outward)).
    let profile = |g: &Wcfg, v: VertexId| {
        let mut adj: Vec<(String, String)> = g
            .neighbors(v)
            .into_iter()
            .map(|w| (g.weight(v, w).to_string(), g.weight(w, v).to_string()))
            .collect();
        adj.sort();
        let mut cu: Vec<(String, String)> = g
            .cusps_at(v)
            .into_iter()
            .map(|i| (g.cusps[i].inward.to_string(), g.cusps[i].outward.to_string()))
            .collect();
        cu.sort();
        (g.half_edge(v).to_string(), adj, cu)
    };
    let pa: Vec<_> = va.iter().map(|&v| profile(a, v)).collect();
    let pb: Vec<_> = vb.iter().map(|&v| profile(b, v)).collect();
    {
        let mut sa = pa.clone();
        let mut sb = pb.clone();
        sa.sort();
        sb.sort();
        if sa != sb {
            return false;
        }
    }

    fn search(
        pos: usize,
        a: &Wcfg,
        b: &Wcfg,
        va: &[VertexId],
        vb: &[VertexId],
        pa: &[(String, Vec<(String, String)>, Vec<(String, String)>)],
        pb: &[(String, Vec<(String, String)>, Vec<(String, String)>)],
        map: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
    ) -> bool {
        if pos == va.len() {
            return true;
        }
        'cand: for j in 0..vb.len() {
            if used[j] || pa[pos] != pb[j] {
                continue;
            }
            for k in 0..pos {
                let mk = map[k].expect("assigned");
                if a.weight(va[pos], va[k]) != b.weight(vb[j], vb[mk])
                    || a.weight(va[k], va[pos]) != b.weight(vb[mk], vb[j])
                {
                    continue 'cand;
                }
            }
            map[pos] = Some(j);
            used[j] = true;
            if search(pos + 1, a, b, va, vb, pa, pb, map, used) {
                return true;
            }
            map[pos] = None;
            used[j] = false;
        }
        false
    }

    let mut map = vec![None; va.len()];
    let mut used = vec![false; vb.len()];
    search(0, a, b, &va, &vb, &pa, &pb, &mut map, &mut used)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::two_cusp_path;
    use crate::{qint, qrat};

    #[test]
    fn column_sums_of_the_five_vertex_path() {
        let w = two_cusp_path();
        let m = w.to_matrix().unwrap();
        assert_eq!(m.block.len(), 7);
        for ci in 0..5 {
            assert_eq!(m.column_sum(ci), qint(3), "column {ci}");
        }
        w.check_quotient_column_sums().unwrap();
    }

    #[test]
    fn single_vertex_with_half_edges() {
        let w = Wcfg::from_parts(
            vec![7],
            BTreeMap::new(),
            BTreeMap::from([((7, 7), qint(3))]),
            vec![],
            Some(2),
        )
        .unwrap();
        let m = w.to_matrix().unwrap();
        assert_eq!(m.block, vec![vec![qint(3)]]);
    }

    #[test]
    fn round_trip_is_identity() {
        let w = two_cusp_path();
        let back = w.to_matrix().unwrap().to_wcfg().unwrap();
        assert_eq!(w, back);
    }

    #[test]
    fn normalize_divides_by_column_sums() {
        let w = two_cusp_path();
        let n = w.to_matrix().unwrap().normalize().unwrap();
        for ci in 0..5 {
            assert_eq!(n.column_sum(ci), qint(1));
        }
        assert_eq!(n.cusps[0].inward, qrat(2, 3));
        assert_eq!(n.cusps[0].outward, qrat(1, 3));
        // Idempotence.
        let again = n.normalize().unwrap();
        assert_eq!(n, again);
    }

    #[test]
    fn normalize_rejects_negatives_and_zero_columns() {
        let w = Wcfg::from_parts(
            vec![0, 1],
            BTreeMap::new(),
            BTreeMap::from([((0, 1), qint(-1)), ((1, 0), qint(1))]),
            vec![],
            None,
        )
        .unwrap();
        assert!(w.to_matrix().unwrap().normalize().is_err());
        let z = Wcfg::from_parts(vec![0], BTreeMap::new(), BTreeMap::new(), vec![], None).unwrap();
        assert!(z.to_matrix().unwrap().normalize().is_err());
    }

    #[test]
    fn operator_on_pure_cusp_steps_both_ways() {
        let w = Wcfg::from_parts(
            vec![],
            BTreeMap::new(),
            BTreeMap::new(),
            vec![CuspDescriptor::new(None, qint(2), qint(1))],
            None,
        )
        .unwrap();
        let mu = delta(Site::Tail { cusp: 0, t: 2 });
        let out = w.apply_operator(&mu);
        assert_eq!(out[&Site::Tail { cusp: 0, t: 1 }], qint(2));
        assert_eq!(out[&Site::Tail { cusp: 0, t: 3 }], qint(1));
        assert_eq!(out.len(), 2);
        assert!(w.apply_operator(&Charge::new()).is_empty());
    }

    #[test]
    fn cubed_operator_on_center() {
        let w = two_cusp_path();
        let c = Site::Core(2);
        let mut mu = delta(c);
        for _ in 0..3 {
            mu = w.apply_operator(&mu);
        }
        let expect = BTreeMap::from([
            (Site::Core(1), qint(8)),
            (Site::Core(3), qint(16)),
            (Site::Tail { cusp: 0, t: 1 }, qint(1)),
            (Site::Tail { cusp: 1, t: 1 }, qint(2)),
        ]);
        assert_eq!(mu, expect);
    }

    #[test]
    fn matrix_and_wcfg_operators_agree() {
        let w = two_cusp_path();
        let m = w.to_matrix().unwrap();
        let mut mu = delta(Site::Core(0));
        add_to(&mut mu, Site::Tail { cusp: 1, t: 3 }, qrat(1, 2));
        assert_eq!(w.apply_operator(&mu), m.apply_operator(&mu));
    }

    #[test]
    fn cusp_propagation_is_unbounded() {
        let w = two_cusp_path();
        let mut mu = delta(Site::Tail { cusp: 0, t: 1 });
        let deepest = |mu: &Charge| {
            mu.keys()
                .filter_map(|s| match s {
                    Site::Tail { cusp: 0, t } => Some(*t),
                    _ => None,
                })
                .max()
                .unwrap_or(0)
        };
        let mut last = deepest(&mu);
        for _ in 0..8 {
            mu = w.apply_operator(&mu);
            let d = deepest(&mu);
            assert!(d > last);
            last = d;
        }
    }

    #[test]
    fn detect_cusps_on_alternating_path() {
        // 0—1—2—3—4 with inward 2 toward 0, outward 1, plus leaf weights.
        let mut weights = BTreeMap::new();
        for i in 0..4u32 {
            weights.insert((i + 1, i), qint(2));
            weights.insert((i, i + 1), qint(1));
        }
        let w = Wcfg::from_parts((0..5).collect(), BTreeMap::new(), weights, vec![], None).unwrap();
        let (canon, diags) = detect_cusps(&w);
        assert!(diags.is_empty());
        assert_eq!(canon.cusps().len(), 1);
        let c = &canon.cusps()[0];
        assert_eq!(c.inward, qint(2));
        assert_eq!(c.outward, qint(1));
        assert_eq!(canon.vertices().len(), 1);
        assert_eq!(c.attach, Some(0));
    }

    #[test]
    fn detect_cusps_leaves_cycles_alone() {
        let mut weights = BTreeMap::new();
        for i in 0..4u32 {
            let j = (i + 1) % 4;
            weights.insert((i, j), qint(1));
            weights.insert((j, i), qint(1));
        }
        let w = Wcfg::from_parts((0..4).collect(), BTreeMap::new(), weights, vec![], None).unwrap();
        let (canon, diags) = detect_cusps(&w);
        assert!(diags.is_empty());
        assert!(canon.cusps().is_empty());
        assert_eq!(canon.vertices().len(), 4);
    }

    #[test]
    fn detect_cusps_reports_non_constant_chains() {
        let mut weights = BTreeMap::new();
        let seq = [(1u32, 0u32, 2i64, 1i64), (2, 1, 3, 1), (3, 2, 2, 1)];
        for (v, u, inw, outw) in seq {
            weights.insert((v, u), qint(inw));
            weights.insert((u, v), qint(outw));
        }
        let w = Wcfg::from_parts((0..4).collect(), BTreeMap::new(), weights, vec![], None).unwrap();
        let (canon, diags) = detect_cusps(&w);
        assert!(!diags.is_empty());
        assert_eq!(canon.vertices().len(), 4);
    }

    #[test]
    fn materialization_preserves_the_infinite_object() {
        let w = two_cusp_path();
        for depth in 1..4 {
            let m = w.materialize(depth);
            m.validate().unwrap();
            assert!(w.equivalent(&m));
        }
        assert!(w.equivalent(&w));
    }

    #[test]
    fn equivalence_distinguishes_weights() {
        let w = two_cusp_path();
        let mut other = w.clone();
        other.weights.insert((2, 1), qint(2));
        other.weights.insert((1, 2), qint(2));
        assert!(!w.equivalent(&other));
    }

    #[test]
    fn operator_agrees_with_dense_product_on_truncation() {
        let w = two_cusp_path();
        let deep = w.materialize(4);
        let m = deep.to_matrix().unwrap();
        // N applied to δ_c computed densely over the materialized core.
        let c = Site::Core(2);
        let lazy = w.apply_operator(&delta(c));
        let dense = m.apply_operator(&delta(c));
        for (site, val) in &lazy {
            match site {
                Site::Core(v) => assert_eq!(dense[&Site::Core(*v)], *val),
                Site::Tail { .. } => {}
            }
        }
    }
}
