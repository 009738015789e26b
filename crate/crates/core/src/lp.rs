//! The matching LP: instance parameters, fractional/integral solutions,
//! dual state, and feasibility checks.
//!
//! Primal: maximize sum w_e x_e subject to per-vertex loads at most 1, and in
//! general mode x(E(U)) <= (|U|-1)/2 for odd sets U up to a size cap. Duals
//! are vertex potentials plus odd-set charges; a feasible dual upper-bounds
//! every feasible primal (weak duality), which is what every certificate in
//! this crate leans on.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::Error;
use crate::scalar::{lift, Real, Scalar};
use crate::stream::Edge;
use crate::Result;

/// Graph class the LP is instantiated for. The left-side size is retained
/// when the source declared it; no solver component consumes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphClass {
    Bipartite { left: Option<u32> },
    General,
}

/// Objective mode: unit weights or stream-supplied weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveMode {
    Cardinality,
    Weighted,
}

/// Instance parameters shared by the solver, oracles, and checkers.
#[derive(Debug, Clone)]
pub struct MatchingLp {
    pub n: u32,
    pub class: GraphClass,
    pub mode: ObjectiveMode,
    pub epsilon: f64,
    /// Largest odd-set size the general-mode machinery tracks.
    pub k_max: usize,
}

impl MatchingLp {
    pub fn new(n: u32, class: GraphClass, mode: ObjectiveMode, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1/2], got {epsilon}"
            )));
        }
        if let GraphClass::Bipartite { left: Some(l) } = class {
            if l == 0 || l >= n {
                return Err(Error::InvalidParameter(format!(
                    "bipartite left size {l} out of range for n={n}"
                )));
            }
        }
        let k_max = 2 * (1.0 / epsilon).ceil() as usize + 1;
        debug_assert!(k_max % 2 == 1 && k_max >= 3);
        Ok(MatchingLp { n, class, mode, epsilon, k_max })
    }

    pub fn bipartite(n: u32, left: Option<u32>, mode: ObjectiveMode, epsilon: f64) -> Result<Self> {
        Self::new(n, GraphClass::Bipartite { left }, mode, epsilon)
    }

    pub fn general(n: u32, mode: ObjectiveMode, epsilon: f64) -> Result<Self> {
        Self::new(n, GraphClass::General, mode, epsilon)
    }

    pub fn is_bipartite(&self) -> bool {
        matches!(self.class, GraphClass::Bipartite { .. })
    }
}

// ---------------------------------------------------------------------------
// Odd sets
// ---------------------------------------------------------------------------

/// An odd vertex set, |U| odd and >= 3; its matching capacity is (|U|-1)/2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OddSet {
    members: Vec<u32>,
}

impl OddSet {
    pub fn new(mut members: Vec<u32>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if members.len() < 3 || members.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "odd set must have odd size >= 3, got {}",
                members.len()
            )));
        }
        Ok(OddSet { members })
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Matching capacity (|U|-1)/2 of the set.
    pub fn capacity(&self) -> usize {
        (self.members.len() - 1) / 2
    }

    pub fn contains(&self, v: u32) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn contains_edge(&self, u: u32, v: u32) -> bool {
        self.contains(u) && self.contains(v)
    }
}

// ---------------------------------------------------------------------------
// Fractional matchings
// ---------------------------------------------------------------------------

/// Sparse fractional assignment on edges, keyed by normalized endpoint pair.
/// Each entry keeps the edge weight so the objective is self-contained.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalMatching<S> {
    n: u32,
    entries: BTreeMap<(u32, u32), (S, S)>,
}

impl<S: Scalar> FractionalMatching<S> {
    pub fn new(n: u32) -> Self {
        FractionalMatching { n, entries: BTreeMap::new() }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds mass `x` on edge (u, v) with weight `w`; accumulates on repeats.
    pub fn add(&mut self, u: u32, v: u32, x: S, w: S) {
        let key = Edge::new(u, v, w).key();
        let entry = self.entries.entry(key).or_insert((S::zero(), w));
        entry.0 = entry.0 + x;
        entry.1 = w;
    }

    pub fn set(&mut self, u: u32, v: u32, x: S, w: S) {
        let key = Edge::new(u, v, w).key();
        if x == S::zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, (x, w));
        }
    }

    pub fn get(&self, u: u32, v: u32) -> S {
        let key = if u <= v { (u, v) } else { (v, u) };
        self.entries.get(&key).map(|&(x, _)| x).unwrap_or_else(S::zero)
    }

    pub fn remove(&mut self, u: u32, v: u32) {
        let key = if u <= v { (u, v) } else { (v, u) };
        self.entries.remove(&key);
    }

    /// Iterates `((u, v), x, w)` in key order.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), S, S)> + '_ {
        self.entries.iter().map(|(&k, &(x, w))| (k, x, w))
    }

    /// Multiplies every mass by `c`.
    pub fn scale(&mut self, c: S) {
        for (x, _) in self.entries.values_mut() {
            *x = *x * c;
        }
    }

    /// Objective value sum x_e w_e. Exact over exact scalars.
    pub fn value(&self) -> S {
        self.entries
            .values()
            .fold(S::zero(), |acc, &(x, w)| acc + x * w)
    }

    /// Total mass sum x_e (the cardinality objective).
    pub fn mass(&self) -> S {
        self.entries.values().fold(S::zero(), |acc, &(x, _)| acc + x)
    }

    /// Per-vertex loads sum_{e in delta(v)} x_e.
    pub fn degree_loads(&self) -> Vec<S> {
        let mut load = vec![S::zero(); self.n as usize];
        for (&(u, v), &(x, _)) in &self.entries {
            load[u as usize] = load[u as usize] + x;
            load[v as usize] = load[v as usize] + x;
        }
        load
    }

    /// Mass inside an odd set, x(E(U)).
    pub fn mass_inside(&self, set: &OddSet) -> S {
        self.entries
            .iter()
            .filter(|(&(u, v), _)| set.contains_edge(u, v))
            .fold(S::zero(), |acc, (_, &(x, _))| acc + x)
    }
}

/// A feasibility violation found by [`check_feasible`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation<S> {
    Negative { u: u32, v: u32, x: S },
    DegreeLoad { v: u32, load: S },
    OddSetLoad { set: OddSet, load: S, capacity: usize },
}

/// Checks LP feasibility of `x` up to additive `tol` per constraint.
///
/// Degree constraints are checked exactly from the support. Odd-set
/// constraints (general mode only) are checked by exhaustive enumeration of
/// odd subsets up to `lp.k_max` within the support's connected components,
/// so this is intended for small instances and tests.
pub fn check_feasible<S: Scalar>(
    lp: &MatchingLp,
    x: &FractionalMatching<S>,
    tol: S,
) -> Vec<Violation<S>> {
    let mut out = Vec::new();
    for ((u, v), xe, _) in x.iter() {
        if xe < S::zero() {
            out.push(Violation::Negative { u, v, x: xe });
        }
    }
    let one = S::one();
    for (v, load) in x.degree_loads().into_iter().enumerate() {
        if load > one + tol {
            out.push(Violation::DegreeLoad { v: v as u32, load });
        }
    }
    if lp.class == GraphClass::General {
        for set in enumerate_odd_sets_on_support(x, lp.k_max) {
            let load = x.mass_inside(&set);
            let cap = set.capacity();
            if load > lift::<S>(cap as f64) + tol {
                out.push(Violation::OddSetLoad { set, load, capacity: cap });
            }
        }
    }
    out
}

/// Enumerates every odd set of size 3..=k_max whose vertices all touch the
/// support of `x`. Exponential in the support vertex count; test-sized only.
pub fn enumerate_odd_sets_on_support<S: Scalar>(
    x: &FractionalMatching<S>,
    k_max: usize,
) -> Vec<OddSet> {
    let mut verts: Vec<u32> = Vec::new();
    for ((u, v), _, _) in x.iter() {
        verts.push(u);
        verts.push(v);
    }
    verts.sort_unstable();
    verts.dedup();
    let mut out = Vec::new();
    let mut stack: Vec<u32> = Vec::new();
    subsets(&verts, 0, &mut stack, k_max, &mut out);
    out
}

fn subsets(verts: &[u32], from: usize, cur: &mut Vec<u32>, k_max: usize, out: &mut Vec<OddSet>) {
    if cur.len() >= 3 && cur.len() % 2 == 1 {
        out.push(OddSet { members: cur.clone() });
    }
    if cur.len() == k_max {
        return;
    }
    for i in from..verts.len() {
        cur.push(verts[i]);
        subsets(verts, i + 1, cur, k_max, out);
        cur.pop();
    }
}

// ---------------------------------------------------------------------------
// Integral matchings
// ---------------------------------------------------------------------------

/// An integral matching: vertex-disjoint edges with their weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching<S> {
    n: u32,
    edges: Vec<(u32, u32, S)>,
}

impl<S: Scalar> Matching<S> {
    pub fn new(n: u32) -> Self {
        Matching { n, edges: Vec::new() }
    }

    pub fn from_edges(n: u32, edges: Vec<(u32, u32, S)>) -> Result<Self> {
        let m = Matching { n, edges };
        m.validate()?;
        Ok(m)
    }

    pub fn push(&mut self, u: u32, v: u32, w: S) {
        self.edges.push((u.min(v), u.max(v), w));
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[(u32, u32, S)] {
        &self.edges
    }

    pub fn weight(&self) -> S {
        self.edges.iter().fold(S::zero(), |acc, &(_, _, w)| acc + w)
    }

    /// Errors unless the edges are pairwise vertex-disjoint and in range.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n as usize];
        for &(u, v, _) in &self.edges {
            if u == v || u >= self.n || v >= self.n {
                return Err(Error::Precondition(format!("invalid matching edge {u} {v}")));
            }
            for t in [u, v] {
                if seen[t as usize] {
                    return Err(Error::Precondition(format!(
                        "vertex {t} matched more than once"
                    )));
                }
                seen[t as usize] = true;
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Dual state
// ---------------------------------------------------------------------------

/// Multiplicative-weights state over the dual experts: one weight per vertex
/// plus one per tracked odd set. Raw weights are kept unnormalized with a
/// cached total, so reads are O(1) and updates renormalize lazily.
#[derive(Debug, Clone)]
pub struct DualState<R> {
    vertex_w: Vec<R>,
    odd: Vec<(OddSet, R)>,
    total: R,
    /// Completed MWU rounds.
    pub t: u32,
}

impl<R: Real> DualState<R> {
    pub fn new(n: u32) -> Self {
        let vertex_w = vec![R::one(); n as usize];
        let total = lift::<R>(n as f64);
        DualState { vertex_w, odd: Vec::new(), total, t: 0 }
    }

    pub fn n(&self) -> usize {
        self.vertex_w.len()
    }

    pub fn total(&self) -> R {
        self.total
    }

    /// Normalized vertex probability p_v = w_v / total.
    pub fn p_vertex(&self, v: u32) -> R {
        self.vertex_w[v as usize] / self.total
    }

    pub fn vertex_weight(&self, v: u32) -> R {
        self.vertex_w[v as usize]
    }

    pub fn odd_sets(&self) -> &[(OddSet, R)] {
        &self.odd
    }

    /// Normalized odd-set probability for expert index `i`.
    pub fn p_odd(&self, i: usize) -> R {
        self.odd[i].1 / self.total
    }

    /// Adds an odd-set expert at the mean vertex weight so it starts neutral.
    pub fn add_odd_set(&mut self, set: OddSet) {
        if self.odd.iter().any(|(s, _)| *s == set) {
            return;
        }
        let w = self.total / lift::<R>((self.vertex_w.len() + self.odd.len()) as f64);
        self.total = self.total + w;
        self.odd.push((set, w));
    }

    /// Multiplies expert weights pointwise; `vf` and `of` give the factors.
    pub fn rescale(
        &mut self,
        mut vf: impl FnMut(u32) -> R,
        mut of: impl FnMut(usize, &OddSet) -> R,
    ) {
        let mut total = R::zero();
        for (v, w) in self.vertex_w.iter_mut().enumerate() {
            *w = *w * vf(v as u32);
            total = total + *w;
        }
        for (i, (set, w)) in self.odd.iter_mut().enumerate() {
            *w = *w * of(i, set);
            total = total + *w;
        }
        self.total = total;
    }

    /// Divides all weights by the current total, restoring total = 1 exactly.
    /// Probabilities are unchanged; this guards against float overflow after
    /// many multiplicative updates.
    pub fn renormalize(&mut self) {
        let t = self.total;
        let mut total = R::zero();
        for w in self.vertex_w.iter_mut() {
            *w = *w / t;
            total = total + *w;
        }
        for (_, w) in self.odd.iter_mut() {
            *w = *w / t;
            total = total + *w;
        }
        self.total = total;
    }
}

// ---------------------------------------------------------------------------
// Duals as covers
// ---------------------------------------------------------------------------

/// A frozen dual solution: vertex potentials and odd-set charges. Feasible
/// when y_u + y_v + sum_{U containing both} z_U >= w_e on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution<S> {
    pub y: Vec<S>,
    pub z: Vec<(OddSet, S)>,
}

impl<S: Scalar> DualSolution<S> {
    pub fn vertex_only(y: Vec<S>) -> Self {
        DualSolution { y, z: Vec::new() }
    }

    /// Dual objective sum y_v + sum z_U (|U|-1)/2.
    pub fn objective(&self) -> S {
        let ys = self.y.iter().fold(S::zero(), |a, &b| a + b);
        self.z.iter().fold(ys, |acc, (set, zu)| {
            acc + *zu * lift::<S>(set.capacity() as f64)
        })
    }

    /// Coverage of edge (u, v): y_u + y_v plus charges of containing sets.
    pub fn coverage(&self, u: u32, v: u32) -> S {
        let base = self.y[u as usize] + self.y[v as usize];
        self.z
            .iter()
            .filter(|(set, _)| set.contains_edge(u, v))
            .fold(base, |acc, (_, zu)| acc + *zu)
    }

    /// Checks y_u + y_v + charges >= w on one edge, up to additive slack.
    pub fn covers(&self, u: u32, v: u32, w: S, slack: S) -> bool {
        self.coverage(u, v) + slack >= w
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Writes `frac <n> <k>` then `u v x [w]` lines (w omitted when 1).
pub fn write_fractional<S: Scalar>(path: &Path, x: &FractionalMatching<S>) -> Result<()> {
    let mut body = String::new();
    let _ = writeln!(body, "frac {} {}", x.n(), x.support_size());
    for ((u, v), xe, w) in x.iter() {
        let xf = xe.to_f64().unwrap_or(f64::NAN);
        if w == S::one() {
            let _ = writeln!(body, "{u} {v} {xf}");
        } else {
            let _ = writeln!(body, "{u} {v} {xf} {}", w.to_f64().unwrap_or(f64::NAN));
        }
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Reads the format written by [`write_fractional`].
pub fn parse_fractional<S: Scalar>(path: &Path) -> Result<FractionalMatching<S>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut header: Option<(u32, usize)> = None;
    let mut x: Option<FractionalMatching<S>> = None;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if header.is_none() {
            if toks.len() != 3 || toks[0] != "frac" {
                return Err(Error::parse(path, lineno, "expected header 'frac <n> <k>'"));
            }
            let n: u32 = toks[1]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad vertex count"))?;
            let k: usize = toks[2]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad support size"))?;
            header = Some((n, k));
            x = Some(FractionalMatching::new(n));
            continue;
        }
        if toks.len() != 3 && toks.len() != 4 {
            return Err(Error::parse(path, lineno, "expected 'u v x [w]'"));
        }
        let u: u32 = toks[0]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad endpoint"))?;
        let v: u32 = toks[1]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad endpoint"))?;
        let xv: f64 = toks[2]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad mass"))?;
        let wv: f64 = match toks.get(3) {
            Some(s) => s
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad weight"))?,
            None => 1.0,
        };
        let (n, _) = header.unwrap();
        if u == v || u >= n || v >= n {
            return Err(Error::parse(path, lineno, format!("invalid edge {u} {v}")));
        }
        let xs = S::from_f64(xv).ok_or_else(|| Error::parse(path, lineno, "bad mass"))?;
        let ws = S::from_f64(wv).ok_or_else(|| Error::parse(path, lineno, "bad weight"))?;
        x.as_mut().unwrap().add(u, v, xs, ws);
    }
    let (_, k) = header.ok_or_else(|| Error::parse(path, 0, "missing header"))?;
    let x = x.unwrap();
    if x.support_size() != k {
        return Err(Error::parse(
            path,
            0,
            format!("header declares {k} support edges, file has {}", x.support_size()),
        ));
    }
    Ok(x)
}

/// Writes `matching <n> <k> <weight>` then `u v [w]` lines.
pub fn write_matching<S: Scalar>(path: &Path, m: &Matching<S>) -> Result<()> {
    let mut body = String::new();
    let _ = writeln!(
        body,
        "matching {} {} {}",
        m.n(),
        m.len(),
        m.weight().to_f64().unwrap_or(f64::NAN)
    );
    for &(u, v, w) in m.edges() {
        if w == S::one() {
            let _ = writeln!(body, "{u} {v}");
        } else {
            let _ = writeln!(body, "{u} {v} {}", w.to_f64().unwrap_or(f64::NAN));
        }
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Reads the format written by [`write_matching`], revalidating disjointness.
pub fn parse_matching<S: Scalar>(path: &Path) -> Result<Matching<S>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut header: Option<(u32, usize)> = None;
    let mut edges: Vec<(u32, u32, S)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if header.is_none() {
            if toks.len() != 4 || toks[0] != "matching" {
                return Err(Error::parse(path, lineno, "expected 'matching <n> <k> <weight>'"));
            }
            let n: u32 = toks[1]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad vertex count"))?;
            let k: usize = toks[2]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad edge count"))?;
            header = Some((n, k));
            continue;
        }
        if toks.len() != 2 && toks.len() != 3 {
            return Err(Error::parse(path, lineno, "expected 'u v [w]'"));
        }
        let u: u32 = toks[0]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad endpoint"))?;
        let v: u32 = toks[1]
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad endpoint"))?;
        let w: S = match toks.get(2) {
            Some(s) => {
                let wf: f64 = s
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad weight"))?;
                S::from_f64(wf).ok_or_else(|| Error::parse(path, lineno, "bad weight"))?
            }
            None => S::one(),
        };
        edges.push((u, v, w));
    }
    let (n, k) = header.ok_or_else(|| Error::parse(path, 0, "missing header"))?;
    if edges.len() != k {
        return Err(Error::parse(
            path,
            0,
            format!("header declares {k} edges, file has {}", edges.len()),
        ));
    }
    Matching::from_edges(n, edges)
}
