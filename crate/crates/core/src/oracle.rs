//! One-pass streaming oracles: dual-threshold greedy matching, weight-class
//! rounding for weighted mode, and odd-set separation on fractional supports.
//!
//! The solver prices vertices by the current dual distribution scaled by its
//! running dual-value estimate; an edge is admissible when its price leaves
//! room under lambda times its (class-rounded) weight. A single greedy pass
//! over the stream then returns a maximal matching among admissible edges.

use crate::error::Error;
use crate::lp::{DualState, FractionalMatching, ObjectiveMode, OddSet};
use crate::scalar::{lift, Real, Scalar};
use crate::stream::Edge;
use crate::Result;

/// Admissibility threshold and weight handling for one oracle pass.
#[derive(Debug, Clone)]
pub struct AdmissibilityRule<R> {
    /// Price threshold lambda; an edge is admissible while
    /// price(e) <= lambda * rounded_weight(e).
    pub lambda: R,
    pub mode: ObjectiveMode,
    /// Accuracy parameter driving the weight-class grid.
    pub epsilon: f64,
    /// Weight classes past this index are dropped (weights so small they
    /// cannot matter at the target accuracy). None disables dropping.
    pub max_class: Option<u32>,
}

impl<R: Real> AdmissibilityRule<R> {
    pub fn cardinality(lambda: R) -> Self {
        AdmissibilityRule { lambda, mode: ObjectiveMode::Cardinality, epsilon: 0.0, max_class: None }
    }

    pub fn weighted(lambda: R, epsilon: f64, n: u32) -> Self {
        AdmissibilityRule {
            lambda,
            mode: ObjectiveMode::Weighted,
            epsilon,
            // classes below eps/n of the top weight can never matter
            max_class: Some(max_weight_class(epsilon, n)),
        }
    }

    /// Class-rounded weight used by admissibility and value accounting.
    /// None when the edge's class is dropped. Weights must be normalized
    /// into (0, 1] before rounding.
    pub fn rounded_weight(&self, w: R) -> Option<R> {
        match self.mode {
            ObjectiveMode::Cardinality => Some(R::one()),
            ObjectiveMode::Weighted => {
                let i = weight_class(w.to_f64().unwrap_or(0.0), self.epsilon)?;
                if let Some(cap) = self.max_class {
                    if i > cap {
                        return None;
                    }
                }
                Some(lift::<R>((1.0 + self.epsilon).powi(-(i as i32))))
            }
        }
    }
}

/// Index i of the weight class (1+eps)^-i containing w, for w in (0, 1].
/// Returns None for nonpositive weights. The small nudge keeps exact powers
/// of (1+eps) in their own class under float log.
pub fn weight_class(w: f64, epsilon: f64) -> Option<u32> {
    if !(w > 0.0) || w > 1.0 + 1e-12 {
        return None;
    }
    let i = ((1.0 / w).ln() / (1.0 + epsilon).ln() + 1e-9).floor();
    Some(i as u32)
}

/// Largest tracked class index: ceil(log_{1+eps}(n / eps)).
pub fn max_weight_class(epsilon: f64, n: u32) -> u32 {
    ((n as f64 / epsilon).ln() / (1.0 + epsilon).ln()).ceil() as u32
}

/// Surcharge sum p_U / capacity(U) over the sets containing both endpoints.
pub fn odd_surcharge<'a, R: Real>(
    sets: impl Iterator<Item = (&'a OddSet, R)>,
    u: u32,
    v: u32,
) -> R {
    sets.filter(|(s, _)| s.contains_edge(u, v))
        .fold(R::zero(), |acc, (s, p)| acc + p / lift::<R>(s.capacity() as f64))
}

/// Dual prices for one pass: the expert distribution scaled by the current
/// dual-value estimate.
pub struct Pricing<'a, R> {
    pub duals: &'a DualState<R>,
    /// Current dual-value estimate multiplying the distribution.
    pub scale: R,
}

impl<R: Real> Pricing<'_, R> {
    /// Normalized price p_u + p_v + surcharges, before scaling.
    pub fn normalized_price(&self, u: u32, v: u32) -> R {
        let base = self.duals.p_vertex(u) + self.duals.p_vertex(v);
        let total = self.duals.total();
        base + odd_surcharge(self.duals.odd_sets().iter().map(|(s, w)| (s, *w / total)), u, v)
    }

    pub fn edge_price(&self, u: u32, v: u32) -> R {
        self.scale * self.normalized_price(u, v)
    }

    /// Admissibility test; returns the rounded weight on success so callers
    /// can account value in the same grid.
    pub fn admit(&self, rule: &AdmissibilityRule<R>, e: &Edge<R>) -> Option<R> {
        let rounded = rule.rounded_weight(e.w)?;
        if self.edge_price(e.u, e.v) <= rule.lambda * rounded {
            Some(rounded)
        } else {
            None
        }
    }
}

/// Outcome of one greedy oracle pass.
#[derive(Debug, Clone)]
pub struct OracleResult<R> {
    /// Selected matching, original weights.
    pub edges: Vec<Edge<R>>,
    /// Sum of true weights (the cardinality in unit mode).
    pub value: R,
    /// Sum of class-rounded weights.
    pub rounded_value: R,
}

impl<R: Real> OracleResult<R> {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// One greedy pass: takes every admissible edge whose endpoints are free.
/// The result is maximal among admissible edges by construction. `matched`
/// is caller-owned workspace of length n, cleared here; `inspect` sees every
/// edge with its rounded weight (None when the class is dropped), which the
/// solver uses to evaluate certificate candidates on the same pass.
pub fn greedy_pass<R: Real>(
    edges: impl Iterator<Item = Edge<R>>,
    pricing: &Pricing<'_, R>,
    rule: &AdmissibilityRule<R>,
    matched: &mut [bool],
    mut inspect: impl FnMut(&Edge<R>, Option<R>),
) -> OracleResult<R> {
    matched.fill(false);
    let mut out = OracleResult { edges: Vec::new(), value: R::zero(), rounded_value: R::zero() };
    for e in edges {
        let rounded = rule.rounded_weight(e.w);
        inspect(&e, rounded);
        let Some(rw) = rounded else { continue };
        if matched[e.u as usize] || matched[e.v as usize] {
            continue;
        }
        if pricing.edge_price(e.u, e.v) <= rule.lambda * rw {
            matched[e.u as usize] = true;
            matched[e.v as usize] = true;
            out.value = out.value + e.w;
            out.rounded_value = out.rounded_value + rw;
            out.edges.push(e);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Odd-set separation
// ---------------------------------------------------------------------------

/// Enumerates connected odd sets U (3 <= |U| <= k_max) on the support of `x`
/// with x(E(U)) > capacity(U) - slack, stopping after `cap` finds. A slack of
/// zero (or a small negative tolerance) finds violated sets; positive slack
/// finds near-tight sets worth tracking as dual experts.
///
/// Requires per-vertex loads at most 1. Under that precondition restricting
/// to connected sets loses nothing: a violated odd set always contains a
/// violated connected odd subset (the even part of any split carries at most
/// |W|/2 mass, so the odd part inherits the violation). With overloaded
/// vertices that argument fails, but those are degree violations, not
/// odd-set ones.
pub fn find_odd_sets<S: Scalar>(
    x: &FractionalMatching<S>,
    k_max: usize,
    slack: S,
    cap: usize,
) -> Vec<(OddSet, S)> {
    // support adjacency
    let mut verts: Vec<u32> = Vec::new();
    for ((u, v), _, _) in x.iter() {
        verts.push(u);
        verts.push(v);
    }
    verts.sort_unstable();
    verts.dedup();
    let index = |v: u32| verts.binary_search(&v).unwrap();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); verts.len()];
    for ((u, v), _, _) in x.iter() {
        let (iu, iv) = (index(u), index(v));
        adj[iu].push(iv);
        adj[iv].push(iu);
    }

    // Each connected subset is enumerated exactly once: it is grown from its
    // minimum vertex, and every offered candidate is either included (opening
    // its neighbors) or banned for the rest of that subtree, so one decision
    // path leads to each set. Sets are emitted at the moment of their last
    // inclusion.
    let mut out: Vec<(OddSet, S)> = Vec::new();
    let mut state = Grow {
        x,
        verts: &verts,
        adj: &adj,
        cur: Vec::new(),
        in_cur: vec![false; verts.len()],
        banned: vec![false; verts.len()],
        k_max,
        slack,
        cap,
        out: &mut out,
    };
    for root in 0..verts.len() {
        state.cur.push(root);
        state.in_cur[root] = true;
        let candidates: Vec<usize> = adj[root].iter().copied().filter(|&w| w > root).collect();
        state.expand(candidates);
        state.in_cur[root] = false;
        state.cur.pop();
        state.banned[root] = true;
        if state.out.len() >= cap {
            break;
        }
    }
    out
}

struct Grow<'a, S> {
    x: &'a FractionalMatching<S>,
    verts: &'a [u32],
    adj: &'a [Vec<usize>],
    cur: Vec<usize>,
    in_cur: Vec<bool>,
    banned: Vec<bool>,
    k_max: usize,
    slack: S,
    cap: usize,
    out: &'a mut Vec<(OddSet, S)>,
}

impl<S: Scalar> Grow<'_, S> {
    fn emit_current(&mut self) {
        if self.cur.len() < 3 || self.cur.len() % 2 == 0 {
            return;
        }
        let members: Vec<u32> = self.cur.iter().map(|&i| self.verts[i]).collect();
        let set = OddSet::new(members).expect("grown set has odd size >= 3");
        let load = self.x.mass_inside(&set);
        let bound = lift::<S>(set.capacity() as f64);
        if load > bound - self.slack {
            self.out.push((set, load));
        }
    }

    fn expand(&mut self, mut candidates: Vec<usize>) {
        self.emit_current();
        if self.out.len() >= self.cap || self.cur.len() == self.k_max {
            return;
        }
        let mut banned_here: Vec<usize> = Vec::new();
        while let Some(w) = candidates.pop() {
            if self.banned[w] || self.in_cur[w] {
                continue;
            }
            self.cur.push(w);
            self.in_cur[w] = true;
            let mut ext = candidates.clone();
            for &z in &self.adj[w] {
                if !self.in_cur[z] && !self.banned[z] && !ext.contains(&z) {
                    ext.push(z);
                }
            }
            self.expand(ext);
            self.in_cur[w] = false;
            self.cur.pop();
            if self.out.len() >= self.cap {
                break;
            }
            // the exclude branch continues this loop with w banned
            self.banned[w] = true;
            banned_here.push(w);
        }
        for w in banned_here {
            self.banned[w] = false;
        }
    }
}

/// All violated odd sets (x(E(U)) > capacity + tol) up to the size cap,
/// erroring when more than `cap` exist.
pub fn enumerate_violated_odd_sets<S: Scalar>(
    x: &FractionalMatching<S>,
    k_max: usize,
    tol: S,
    cap: usize,
) -> Result<Vec<OddSet>> {
    let found = find_odd_sets(x, k_max, S::zero() - tol, cap + 1);
    if found.len() > cap {
        return Err(Error::OddSetCapExceeded { cap, found: found.len() });
    }
    Ok(found.into_iter().map(|(s, _)| s).collect())
}
