//! Transfer of a weighted quotient from one place to another along the
//! polynomials f_1 = x, f_2 = x^2 - 2q, f_{n+2} = x f_{n+1} - q f_n.
//!
//! When the operator N is the neighborhood operator of a quotient at a place
//! of degree one over a field with q elements, f_n(N) is the candidate
//! neighborhood matrix at a place of degree n: the defining identity
//! f_n(x + q/x) = x^n + (q/x)^n makes f_n carry the local spectral picture
//! from q to q^n. Columns of f_n(N) are computed exactly on the lazy infinite
//! graph, so there is no truncation anywhere; the cusp rays reproduce the
//! deeper pattern on the nose and the finite core plus new descriptors is
//! returned as a candidate graph.
//!
//! The candidate is only determined up to the obstruction space of the input,
//! and it may have negative entries. [`resolve_ambiguity`] searches the
//! affine family candidate + span(basis) for corrections that restore a
//! plausible quotient: entries nonnegative, bounded by the column sum,
//! integral when requested, and zero exactly in symmetric pairs.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigInt, One, Signed, Zero};

use crate::graph::VertexId;
use crate::linalg::poly_mul;
use crate::obstruction::{candidate_shell, obstruction_space, ObstructionBasis};
use crate::wcfg::{delta, CuspDescriptor, Site, Wcfg};
use crate::{Charge, Error, Q, Result};

/// The degree-n transfer polynomial over a field with q elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferPolynomial {
    pub n: u32,
    pub q: u64,
    /// Coefficients, constant term first. All integers.
    pub coefficients: Vec<BigInt>,
}

impl TransferPolynomial {
    pub fn coefficients_q(&self) -> Vec<Q> {
        self.coefficients.iter().cloned().map(Q::from_integer).collect()
    }
}

/// Builds f_n for the field size q and verifies the defining identity
/// f_n(x + q/x) x^n = x^{2n} + q^n symbolically before returning.
pub fn build_fn(n: u32, q: u64) -> Result<TransferPolynomial> {
    if n < 1 {
        return Err(Error::TransferNotApplicable(
            "the transfer step n must be at least 1".into(),
        ));
    }
    if q < 2 {
        return Err(Error::TransferNotApplicable(
            "the residue field size q must be at least 2".into(),
        ));
    }
    let qi = BigInt::from(q);
    let mut prev = vec![BigInt::zero(), BigInt::one()];
    let mut cur = vec![-(BigInt::from(2u8) * &qi), BigInt::zero(), BigInt::one()];
    let coefficients = match n {
        1 => prev,
        2 => cur,
        _ => {
            for _ in 3..=n {
                let mut next = vec![BigInt::zero()];
                next.extend(cur.iter().cloned());
                for (i, c) in prev.iter().enumerate() {
                    next[i] -= &qi * c;
                }
                prev = std::mem::replace(&mut cur, next);
            }
            cur
        }
    };
    let p = TransferPolynomial { n, q, coefficients };
    check_laurent_identity(&p)?;
    Ok(p)
}

fn poly_add(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut out = vec![Q::zero(); a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        out[i] += c;
    }
    for (i, c) in b.iter().enumerate() {
        out[i] += c;
    }
    out
}

/// Expands sum_k c_k (x^2 + q)^k x^{n-k} and compares it with x^{2n} + q^n.
fn check_laurent_identity(p: &TransferPolynomial) -> Result<()> {
    let n = p.n as usize;
    let base = vec![Q::from_integer(p.q.into()), Q::zero(), Q::one()];
    let mut acc: Vec<Q> = Vec::new();
    for (k, c) in p.coefficients.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let mut term = vec![Q::from_integer(c.clone())];
        for _ in 0..k {
            term = poly_mul(&term, &base);
        }
        let mut shifted = vec![Q::zero(); n - k];
        shifted.extend(term);
        acc = poly_add(&acc, &shifted);
    }
    let mut qn = BigInt::one();
    for _ in 0..p.n {
        qn *= p.q;
    }
    let mut expected = vec![Q::zero(); 2 * n + 1];
    expected[0] = Q::from_integer(qn);
    expected[2 * n] = Q::one();
    if acc != expected {
        return Err(Error::Arithmetic(format!(
            "transfer polynomial n={} q={} fails its defining identity",
            p.n, p.q
        )));
    }
    Ok(())
}

fn add_scaled(acc: &mut Charge, mu: &Charge, c: &Q) {
    for (site, value) in mu {
        let entry = acc.entry(*site).or_insert_with(Q::zero);
        *entry += c * value;
    }
}

/// One column of p(N) on the infinite graph, computed exactly: the operator
/// is iterated on the lazy charge, so tails are followed as far as the degree
/// of p requires and no further.
fn poly_column(w: &Wcfg, coeffs: &[Q], x: Site) -> Charge {
    let mut acc = Charge::new();
    let mut power = delta(x);
    if let Some(c0) = coeffs.first() {
        add_scaled(&mut acc, &power, c0);
    }
    for c in &coeffs[1..] {
        power = w.apply_operator(&power);
        if !c.is_zero() {
            add_scaled(&mut acc, &power, c);
        }
    }
    acc.retain(|_, v| !v.is_zero());
    acc
}

/// Evaluates p(N) columnwise on the requested sites. Exact on the infinite
/// graph; the result lists each requested column as a finite charge.
pub fn evaluate_poly(
    p: &TransferPolynomial,
    w: &Wcfg,
    columns: &[Site],
) -> Vec<(Site, Charge)> {
    let coeffs = p.coefficients_q();
    columns.iter().map(|&x| (x, poly_column(w, &coeffs, x))).collect()
}

/// Descriptors of the cusps the transferred quotient must carry: every cusp
/// with pattern (q, 1) at the source becomes n interleaved cusps with pattern
/// (q^n, 1), rooted at tail offsets 0..n of the source cusp. Returns, per
/// source cusp, the descriptors indexed by offset; only the offset-0
/// descriptor keeps the original attach vertex.
pub fn predict_cusps_at_q(
    cusps: &[CuspDescriptor],
    n: u32,
    q: u64,
) -> Result<Vec<Vec<CuspDescriptor>>> {
    if n < 1 {
        return Err(Error::TransferNotApplicable(
            "the transfer step n must be at least 1".into(),
        ));
    }
    let qn = q.checked_pow(n).ok_or_else(|| {
        Error::Arithmetic(format!("q^n overflows for q = {q}, n = {n}"))
    })?;
    let q_rat = Q::from_integer(q.into());
    let qn_rat = Q::from_integer(qn.into());
    let mut out = Vec::new();
    for (i, c) in cusps.iter().enumerate() {
        if c.inward != q_rat || !c.outward.is_one() {
            return Err(Error::TransferNotApplicable(format!(
                "cusp {i} has weight pattern ({}, {}); transfer needs ({q}, 1)",
                c.inward, c.outward
            )));
        }
        let mut per_cusp = Vec::new();
        for offset in 0..n {
            per_cusp.push(CuspDescriptor::new(
                if offset == 0 { c.attach } else { None },
                qn_rat.clone(),
                Q::one(),
            ));
        }
        out.push(per_cusp);
    }
    Ok(out)
}

/// Where a transfer stands after assembly or resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferStatus {
    /// No negative entries and an empty obstruction support: the candidate
    /// is the transferred quotient.
    Clean,
    /// The candidate is assembled but corrections have not been searched.
    Unresolved,
    /// Exactly one feasible correction exists; `resolution` holds the graph.
    Resolved,
    /// Several feasible corrections exist.
    Ambiguous,
    /// No feasible correction exists under the given constraints.
    Infeasible,
}

/// The outcome of transferring a quotient n steps.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub candidate: Wcfg,
    /// Pairs of source vertices carrying the obstruction space of the input.
    pub bad_pairs: Vec<(VertexId, VertexId)>,
    /// Weight keys of the candidate with negative value.
    pub negative_entries: Vec<((VertexId, VertexId), Q)>,
    /// Coefficient vectors (against the obstruction basis) of the feasible
    /// corrections found by [`resolve_ambiguity`].
    pub feasible: Vec<Vec<Q>>,
    pub resolution: Option<Wcfg>,
    pub status: TransferStatus,
    pub notes: Vec<String>,
}

/// Assembles the candidate quotient f_n(N) together with its uncertainty:
/// the obstruction support of the input and any negative entries.
///
/// The input must record its residue field size, carry only (q, 1) cusps with
/// attach vertices, and have positive weights on its support. The candidate
/// keeps the source vertex ids, adds the first n-1 tail vertices of every
/// source cusp to the core, and roots n cusps with pattern (q^n, 1) on every
/// source cusp ray. Negative entries are reported, never clamped.
pub fn assemble_candidate(wp: &Wcfg, n: u32) -> Result<TransferReport> {
    let q = wp.q_param.ok_or_else(|| {
        Error::TransferNotApplicable(
            "the input graph does not record its residue field size".into(),
        )
    })?;
    if !wp.is_regular() {
        return Err(Error::TransferNotApplicable(
            "the input graph must have positive weights on its support".into(),
        ));
    }
    for (i, c) in wp.cusps().iter().enumerate() {
        if c.attach.is_none() {
            return Err(Error::TransferNotApplicable(format!(
                "cusp {i} is not attached to a core vertex"
            )));
        }
    }
    let p = build_fn(n, q)?;
    let predicted = predict_cusps_at_q(wp.cusps(), n, q)?;
    let qn = q.checked_pow(n).ok_or_else(|| {
        Error::Arithmetic(format!("q^n overflows for q = {q}, n = {n}"))
    })?;
    let coeffs = p.coefficients_q();

    // The new core: source vertices, then tail offsets 1..n of each cusp.
    let mut sites: Vec<Site> = wp.vertices().iter().map(|&v| Site::Core(v)).collect();
    for ci in 0..wp.cusps().len() {
        for t in 1..u64::from(n) {
            sites.push(Site::Tail { cusp: ci, t });
        }
    }
    let mut next_id = wp.vertices().iter().copied().max().map_or(0, |m| m + 1);
    let mut site_id: BTreeMap<Site, VertexId> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut labels = wp.labels().clone();
    for &s in &sites {
        let id = match s {
            Site::Core(v) => v,
            Site::Tail { cusp, t } => {
                let id = next_id;
                next_id += 1;
                labels.insert(id, wp.cusps()[cusp].tail_label(t));
                id
            }
        };
        site_id.insert(s, id);
        vertices.push(id);
    }

    let pos_on = |x: Site, ci: usize| -> Option<u64> {
        match x {
            Site::Core(v) => (wp.cusps()[ci].attach == Some(v)).then_some(0),
            Site::Tail { cusp, t } => (cusp == ci).then_some(t),
        }
    };

    let mut weights: BTreeMap<(VertexId, VertexId), Q> = BTreeMap::new();
    for &x in &sites {
        let col = poly_column(wp, &coeffs, x);
        let xv = site_id[&x];
        for (site, value) in col {
            if let Some(&sv) = site_id.get(&site) {
                weights.insert((xv, sv), value);
                continue;
            }
            // Support past the new core is only legal as the outward unit
            // step of the rebuilt cusp pattern: from offset j to offset j+n.
            let legal = match site {
                Site::Tail { cusp, t } => {
                    t >= u64::from(n)
                        && pos_on(x, cusp) == Some(t - u64::from(n))
                        && value.is_one()
                }
                Site::Core(_) => false,
            };
            if !legal {
                return Err(Error::Arithmetic(format!(
                    "transfer column at {x:?} has unexpected support {site:?} = {value}"
                )));
            }
        }
    }

    // Deeper tail columns must reproduce the shifted cusp pattern exactly:
    // f_n at offset t >= n is q^n at offset t-n and 1 at offset t+n.
    let qn_rat = Q::from_integer(qn.into());
    for ci in 0..wp.cusps().len() {
        for t in u64::from(n)..u64::from(n) + 2 {
            let col = poly_column(wp, &coeffs, Site::Tail { cusp: ci, t });
            let near = if t == u64::from(n) {
                Site::Core(wp.cusps()[ci].attach.expect("checked above"))
            } else {
                Site::Tail { cusp: ci, t: t - u64::from(n) }
            };
            let mut expected = Charge::new();
            expected.insert(near, qn_rat.clone());
            expected.insert(Site::Tail { cusp: ci, t: t + u64::from(n) }, Q::one());
            if col != expected {
                return Err(Error::Arithmetic(format!(
                    "tail column {t} of cusp {ci} does not reproduce the cusp pattern"
                )));
            }
        }
    }

    let mut cusps = Vec::new();
    for (ci, per_cusp) in predicted.iter().enumerate() {
        for (offset, d) in per_cusp.iter().enumerate() {
            let root = if offset == 0 {
                Site::Core(wp.cusps()[ci].attach.expect("checked above"))
            } else {
                Site::Tail { cusp: ci, t: offset as u64 }
            };
            cusps.push(CuspDescriptor::new(
                Some(site_id[&root]),
                d.inward.clone(),
                d.outward.clone(),
            ));
        }
    }

    let candidate = Wcfg::from_parts(vertices, labels, weights, cusps, Some(qn))?;

    let negative_entries: Vec<((VertexId, VertexId), Q)> = candidate
        .weights()
        .iter()
        .filter(|(_, m)| m.is_negative())
        .map(|(&k, m)| (k, m.clone()))
        .collect();

    let shell = candidate_shell(wp);
    let basis = obstruction_space(wp, &shell)?;
    let bad = basis.support();
    let mut bad_pairs = Vec::new();
    for &v in &bad {
        for &w in &bad {
            bad_pairs.push((v, w));
        }
    }

    let mut notes = vec![format!(
        "transfer step n = {n} from field size {q} to {qn}; {} new core vertices, {} cusps",
        candidate.vertices().len(),
        candidate.cusps().len()
    )];
    let status = if negative_entries.is_empty() && bad_pairs.is_empty() {
        TransferStatus::Clean
    } else {
        if !negative_entries.is_empty() {
            notes.push(format!(
                "{} negative entries await correction",
                negative_entries.len()
            ));
        }
        if !bad_pairs.is_empty() {
            notes.push(format!(
                "obstruction space of the input has dimension {} over {} vertices",
                basis.dimension(),
                bad.len()
            ));
        }
        TransferStatus::Unresolved
    };
    let resolution =
        if status == TransferStatus::Clean { Some(candidate.clone()) } else { None };

    Ok(TransferReport {
        candidate,
        bad_pairs,
        negative_entries,
        feasible: Vec::new(),
        resolution,
        status,
        notes,
    })
}

/// Bounds and filters for the correction search.
#[derive(Debug, Clone)]
pub struct ResolveOptions {
    /// Corrections are searched on the grid (1/denominator) * Z.
    pub denominator: u32,
    /// Coefficient magnitude bound; defaults to the column sum q^n + 1.
    pub magnitude: Option<Q>,
    /// Require corrected entries to be integers.
    pub integral: bool,
    /// Restrict the constraints to the weight rows of these vertices (the
    /// columns of the neighborhood matrix). None checks the whole graph;
    /// restricting reproduces a columnwise partial analysis, and the
    /// resulting report can never be resolved, only narrowed.
    pub columns: Option<Vec<VertexId>>,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions { denominator: 2, magnitude: None, integral: true, columns: None }
    }
}

const NODE_BUDGET: u64 = 5_000_000;

struct EntryCon {
    key: (VertexId, VertexId),
    base: Q,
    /// Coefficients against the active basis elements.
    coeffs: Vec<Q>,
}

struct Search<'a> {
    entries: &'a [EntryCon],
    by_key: &'a BTreeMap<(VertexId, VertexId), usize>,
    fallback: &'a Wcfg,
    in_scope: &'a dyn Fn(VertexId) -> bool,
    step_denom: BigInt,
    bound: Q,
    upper: Option<Q>,
    integral: bool,
    assigned: Vec<Option<Q>>,
    value: Vec<Q>,
    nodes: u64,
    solutions: BTreeMap<Vec<Q>, Vec<Q>>,
}

impl Search<'_> {
    fn grid_values(&self, lo: &Q, hi: &Q) -> Vec<Q> {
        let lo_i = (lo * Q::from_integer(self.step_denom.clone())).ceil().to_integer();
        let hi_i = (hi * Q::from_integer(self.step_denom.clone())).floor().to_integer();
        let mut out = Vec::new();
        let mut i = lo_i;
        while i <= hi_i {
            out.push(Q::new(i.clone(), self.step_denom.clone()));
            i += 1;
        }
        out
    }

    fn explore(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return Err(Error::Arithmetic(
                "the correction search exceeded its node budget".into(),
            ));
        }
        // Narrow every unassigned coordinate against the box constraints,
        // then branch on the narrowest one.
        let mut best: Option<(usize, Vec<Q>)> = None;
        for k in 0..self.assigned.len() {
            if self.assigned[k].is_some() {
                continue;
            }
            let mut lo = -self.bound.clone();
            let mut hi = self.bound.clone();
            for (ei, e) in self.entries.iter().enumerate() {
                let c = &e.coeffs[k];
                if c.is_zero() {
                    continue;
                }
                let mut slack = Q::zero();
                for (k2, c2) in e.coeffs.iter().enumerate() {
                    if k2 != k && self.assigned[k2].is_none() && !c2.is_zero() {
                        slack += c2.abs() * &self.bound;
                    }
                }
                // value + c*x + r >= 0 with |r| <= slack.
                let need = -(&self.value[ei]) - &slack;
                if c.is_positive() {
                    let b = &need / c;
                    if b > lo {
                        lo = b;
                    }
                } else {
                    let b = &need / c;
                    if b < hi {
                        hi = b;
                    }
                }
                if let Some(up) = &self.upper {
                    // value + c*x - r <= up.
                    let need = up - &self.value[ei] + &slack;
                    if c.is_positive() {
                        let b = &need / c;
                        if b < hi {
                            hi = b;
                        }
                    } else {
                        let b = &need / c;
                        if b > lo {
                            lo = b;
                        }
                    }
                }
            }
            if lo > hi {
                return Ok(());
            }
            let vals = self.grid_values(&lo, &hi);
            if vals.is_empty() {
                return Ok(());
            }
            let better = best.as_ref().map_or(true, |(_, b)| vals.len() < b.len());
            if better {
                best = Some((k, vals));
            }
        }
        let Some((k, vals)) = best else {
            self.record_leaf();
            return Ok(());
        };
        for x in vals {
            self.assigned[k] = Some(x.clone());
            let mut undo = Vec::new();
            for (ei, e) in self.entries.iter().enumerate() {
                if !e.coeffs[k].is_zero() {
                    undo.push((ei, self.value[ei].clone()));
                    self.value[ei] += &e.coeffs[k] * &x;
                }
            }
            self.explore()?;
            for (ei, old) in undo {
                self.value[ei] = old;
            }
            self.assigned[k] = None;
        }
        self.assigned[k] = None;
        Ok(())
    }

    fn record_leaf(&mut self) {
        for (ei, e) in self.entries.iter().enumerate() {
            let v = &self.value[ei];
            if v.is_negative() {
                return;
            }
            if let Some(up) = &self.upper {
                if v > up {
                    return;
                }
            }
            if self.integral && !v.is_integer() {
                return;
            }
            let (a, b) = e.key;
            if a != b && (self.in_scope)(b) {
                // A corrected weight vanishes exactly when its reverse does.
                let partner = match self.by_key.get(&(b, a)) {
                    Some(&pj) => self.value[pj].clone(),
                    None => self.fallback.weight(b, a),
                };
                if v.is_zero() != partner.is_zero() {
                    return;
                }
            }
        }
        let valuation: Vec<Q> = self.value.clone();
        let coeffs: Vec<Q> = self
            .assigned
            .iter()
            .map(|a| a.clone().expect("leaf has all coordinates assigned"))
            .collect();
        self.solutions.entry(valuation).or_insert(coeffs);
    }
}

/// The corrected graph candidate + sum coeffs[k] * basis[k], with the
/// correction added entrywise on the shell block.
pub fn apply_correction(
    candidate: &Wcfg,
    basis: &ObstructionBasis,
    coeffs: &[Q],
) -> Result<Wcfg> {
    if coeffs.len() != basis.basis.len() {
        return Err(Error::InvalidShell(format!(
            "correction has {} coefficients for a basis of dimension {}",
            coeffs.len(),
            basis.basis.len()
        )));
    }
    let mut weights = candidate.weights().clone();
    for (i, &v) in basis.shell.iter().enumerate() {
        for (j, &w) in basis.shell.iter().enumerate() {
            let mut adj = Q::zero();
            for (k, f) in basis.basis.iter().enumerate() {
                adj += &coeffs[k] * &f[(j, i)];
            }
            if !adj.is_zero() {
                *weights.entry((v, w)).or_insert_with(Q::zero) += adj;
            }
        }
    }
    Wcfg::from_parts(
        candidate.vertices().to_vec(),
        candidate.labels().clone(),
        weights,
        candidate.cusps().to_vec(),
        candidate.q_param,
    )
}

/// Searches the affine family candidate + span(basis) for corrections that
/// make the candidate a plausible quotient, on the grid and within the bounds
/// of `opts`. Feasible corrections are recorded as coefficient vectors; a
/// unique one resolves the transfer and its graph is stored.
pub fn resolve_ambiguity(
    report: &TransferReport,
    basis: &ObstructionBasis,
    opts: &ResolveOptions,
) -> Result<TransferReport> {
    if opts.denominator == 0 {
        return Err(Error::TransferNotApplicable(
            "the denominator bound must be positive".into(),
        ));
    }
    let cand = &report.candidate;
    let upper: Option<Q> =
        cand.q_param.map(|qn| Q::from_integer(BigInt::from(qn) + 1));
    let bound = match &opts.magnitude {
        Some(m) => m.clone(),
        None => upper.clone().ok_or_else(|| {
            Error::TransferNotApplicable(
                "no magnitude bound: the candidate does not record its field size"
                    .into(),
            )
        })?,
    };
    let scoped = opts.columns.is_some();
    let in_scope = |v: VertexId| {
        opts.columns.as_ref().map_or(true, |cols| cols.contains(&v))
    };

    let pos: BTreeMap<VertexId, usize> =
        basis.shell.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let kdim = basis.basis.len();
    let mut key_coeffs: BTreeMap<(VertexId, VertexId), Vec<Q>> = BTreeMap::new();
    for (k, f) in basis.basis.iter().enumerate() {
        for (&v, &i) in &pos {
            if !in_scope(v) {
                continue;
            }
            for (&w, &j) in &pos {
                let c = &f[(j, i)];
                if !c.is_zero() {
                    key_coeffs
                        .entry((v, w))
                        .or_insert_with(|| vec![Q::zero(); kdim])[k] = c.clone();
                }
            }
        }
    }
    let active: Vec<usize> = (0..kdim)
        .filter(|&k| key_coeffs.values().any(|cs| !cs[k].is_zero()))
        .collect();

    let mut keys: BTreeSet<(VertexId, VertexId)> = key_coeffs.keys().copied().collect();
    for &(v, w) in cand.weights().keys() {
        if in_scope(v) {
            keys.insert((v, w));
        }
    }
    let entries: Vec<EntryCon> = keys
        .iter()
        .map(|&key| EntryCon {
            key,
            base: cand.weight(key.0, key.1),
            coeffs: match key_coeffs.get(&key) {
                Some(cs) => active.iter().map(|&k| cs[k].clone()).collect(),
                None => vec![Q::zero(); active.len()],
            },
        })
        .collect();
    let by_key: BTreeMap<(VertexId, VertexId), usize> =
        entries.iter().enumerate().map(|(i, e)| (e.key, i)).collect();

    let mut search = Search {
        entries: &entries,
        by_key: &by_key,
        fallback: cand,
        in_scope: &in_scope,
        step_denom: BigInt::from(opts.denominator),
        bound,
        upper,
        integral: opts.integral,
        assigned: vec![None; active.len()],
        value: entries.iter().map(|e| e.base.clone()).collect(),
        nodes: 0,
        solutions: BTreeMap::new(),
    };
    search.explore()?;
    let nodes = search.nodes;

    let mut out = report.clone();
    out.feasible = search
        .solutions
        .into_values()
        .map(|partial| {
            let mut full = vec![Q::zero(); kdim];
            for (slot, &k) in active.iter().enumerate() {
                full[k] = partial[slot].clone();
            }
            full
        })
        .collect();
    out.notes.push(format!(
        "correction search over {} active of {} basis coordinates visited {} nodes and found {} feasible corrections",
        active.len(),
        kdim,
        nodes,
        out.feasible.len()
    ));
    out.status = if out.feasible.is_empty() {
        TransferStatus::Infeasible
    } else if scoped {
        out.notes.push(
            "the search was restricted to selected columns; feasibility is partial"
                .into(),
        );
        TransferStatus::Ambiguous
    } else if out.feasible.len() == 1 {
        out.resolution = Some(apply_correction(cand, basis, &out.feasible[0])?);
        if report.negative_entries.is_empty() && report.bad_pairs.is_empty() {
            TransferStatus::Clean
        } else {
            TransferStatus::Resolved
        }
    } else {
        TransferStatus::Ambiguous
    };
    Ok(out)
}
