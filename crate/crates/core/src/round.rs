//! Rounding fractional matchings to integral ones on their support.
//!
//! The support of an averaged solution is small, so it can be held in
//! memory and reshaped exactly. Cycles are removed first: alternating
//! +delta / -delta around a cycle keeps every vertex load unchanged, and
//! picking the sign pattern whose weight sum is nonnegative never lowers
//! the objective. An even cycle always dies this way. Odd cycles cannot be
//! alternated, so general supports keep at most one per component and the
//! final extraction tries every cycle edge's removal, which is exact for
//! unicyclic components. On the resulting forests a tree DP finds the
//! maximum-weight matching outright; forest matchings have an integral LP,
//! so the DP value is never below the fractional value it replaced.
//!
//! Everything here is generic over [`Scalar`]: run it on rationals and the
//! cancel/DP chain is exact arithmetic end to end.

use crate::error::Error;
use crate::lp::{FractionalMatching, Matching};
use crate::scalar::Scalar;
use crate::stream::EDGE_RECORD_BYTES;
use crate::Result;

/// Support entries below eps / (4n) are discarded before rounding.
pub fn default_support_threshold(n: u32, eps: f64) -> f64 {
    eps / (4.0 * n.max(1) as f64)
}

/// In-memory copy of a fractional matching's support, mutable per edge.
#[derive(Debug, Clone)]
pub struct SupportGraph<S> {
    n: u32,
    us: Vec<u32>,
    vs: Vec<u32>,
    xs: Vec<S>,
    ws: Vec<S>,
    alive: Vec<bool>,
}

impl<S: Scalar> SupportGraph<S> {
    /// Copies every entry with x above `tau`.
    pub fn extract(x: &FractionalMatching<S>, tau: S) -> Self {
        let mut sg = SupportGraph {
            n: x.n(),
            us: Vec::new(),
            vs: Vec::new(),
            xs: Vec::new(),
            ws: Vec::new(),
            alive: Vec::new(),
        };
        for ((u, v), xe, we) in x.iter() {
            if xe > tau {
                sg.us.push(u);
                sg.vs.push(v);
                sg.xs.push(xe);
                sg.ws.push(we);
                sg.alive.push(true);
            }
        }
        sg
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn live_edges(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    /// Logical size in stream records, for space accounting.
    pub fn record_bytes(&self) -> usize {
        self.us.len() * EDGE_RECORD_BYTES
    }

    /// Objective of the surviving support.
    pub fn value(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.us.len() {
            if self.alive[i] {
                acc = acc + self.xs[i] * self.ws[i];
            }
        }
        acc
    }

    pub fn to_fractional(&self) -> FractionalMatching<S> {
        let mut x = FractionalMatching::new(self.n);
        for i in 0..self.us.len() {
            if self.alive[i] {
                x.set(self.us[i], self.vs[i], self.xs[i], self.ws[i]);
            }
        }
        x
    }

    fn adjacency(&self, frozen: Option<&[bool]>) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n as usize];
        for i in 0..self.us.len() {
            if !self.alive[i] {
                continue;
            }
            if let Some(f) = frozen {
                if f[i] {
                    continue;
                }
            }
            adj[self.us[i] as usize].push(i);
            adj[self.vs[i] as usize].push(i);
        }
        adj
    }

    fn other(&self, edge: usize, v: u32) -> u32 {
        if self.us[edge] == v {
            self.vs[edge]
        } else {
            self.us[edge]
        }
    }

    /// Finds a simple cycle among live, unfrozen edges; returns its edges in
    /// traversal order.
    fn find_cycle(&self, frozen: Option<&[bool]>) -> Option<Vec<usize>> {
        let adj = self.adjacency(frozen);
        let n = self.n as usize;
        // parent_edge[v]: edge used to reach v; depth for cycle extraction
        let mut state = vec![0u8; n]; // 0 unseen, 1 on stack path, 2 done
        let mut parent_edge = vec![usize::MAX; n];
        for root in 0..n {
            if state[root] != 0 || adj[root].is_empty() {
                continue;
            }
            let mut stack: Vec<(u32, usize)> = vec![(root as u32, 0)];
            state[root] = 1;
            while let Some(&mut (v, ref mut next)) = stack.last_mut() {
                let vi = v as usize;
                if *next >= adj[vi].len() {
                    state[vi] = 2;
                    stack.pop();
                    continue;
                }
                let e = adj[vi][*next];
                *next += 1;
                if e == parent_edge[vi] {
                    continue;
                }
                let w = self.other(e, v);
                let wi = w as usize;
                match state[wi] {
                    0 => {
                        state[wi] = 1;
                        parent_edge[wi] = e;
                        stack.push((w, 0));
                    }
                    1 => {
                        // back edge: walk the tree path v -> w
                        let mut cycle = vec![e];
                        let mut cur = v;
                        while cur != w {
                            let pe = parent_edge[cur as usize];
                            cycle.push(pe);
                            cur = self.other(pe, cur);
                        }
                        return Some(cycle);
                    }
                    _ => {}
                }
            }
        }
        None
    }

    /// Alternates +delta / -delta around an even cycle, zeroing at least one
    /// edge. The sign pattern with the larger weight sum is applied, so the
    /// objective never decreases; vertex loads are untouched either way.
    fn cancel_cycle(&mut self, cycle: &[usize]) {
        debug_assert!(cycle.len() % 2 == 0 && cycle.len() >= 2);
        let mut gain = S::zero();
        for (k, &e) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                gain = gain + self.ws[e];
            } else {
                gain = gain - self.ws[e];
            }
        }
        // plus on even positions when the gain favors them
        let plus_even = gain >= S::zero();
        let mut delta: Option<S> = None;
        for (k, &e) in cycle.iter().enumerate() {
            let on_minus = (k % 2 == 0) != plus_even;
            if on_minus {
                delta = Some(match delta {
                    Some(d) if d < self.xs[e] => d,
                    _ => self.xs[e],
                });
            }
        }
        let delta = delta.unwrap();
        for (k, &e) in cycle.iter().enumerate() {
            if (k % 2 == 0) == plus_even {
                self.xs[e] = self.xs[e] + delta;
            } else {
                self.xs[e] = self.xs[e] - delta;
                if !(self.xs[e] > tiny_threshold::<S>()) {
                    self.alive[e] = false;
                }
            }
        }
    }

    fn drop_edge(&mut self, e: usize) {
        self.alive[e] = false;
    }

    /// Component of `start` over live, unfrozen edges: (vertices, edges).
    fn component(&self, start: u32, frozen: Option<&[bool]>) -> (Vec<u32>, Vec<usize>) {
        let adj = self.adjacency(frozen);
        let mut seen = vec![false; self.n as usize];
        let mut verts = vec![start];
        let mut edges = Vec::new();
        seen[start as usize] = true;
        let mut head = 0;
        while head < verts.len() {
            let v = verts[head];
            head += 1;
            for &e in &adj[v as usize] {
                let w = self.other(e, v);
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    verts.push(w);
                }
            }
        }
        for i in 0..self.us.len() {
            if self.alive[i]
                && frozen.map_or(true, |f| !f[i])
                && seen[self.us[i] as usize]
            {
                edges.push(i);
            }
        }
        (verts, edges)
    }
}

/// Cancellation kill threshold: float dust for inexact scalars, exact zero
/// when 1e-12 has no representation (rationals with bounded denominators).
fn tiny_threshold<S: Scalar>() -> S {
    S::from_f64(1e-12).unwrap_or_else(S::zero)
}

/// Cancels every cycle of a bipartite support. Fails on an odd cycle, which
/// cannot occur in a two-colorable support.
pub fn cancel_cycles_bipartite<S: Scalar>(sg: &mut SupportGraph<S>) -> Result<()> {
    while let Some(cycle) = sg.find_cycle(None) {
        if cycle.len() % 2 != 0 {
            return Err(Error::Precondition(format!(
                "odd cycle of length {} in bipartite support",
                cycle.len()
            )));
        }
        sg.cancel_cycle(&cycle);
    }
    Ok(())
}

/// Reduces a general support: even cycles cancel; components keep at most
/// one odd cycle (frozen out of further search), extra cycles lose their
/// cheapest edge.
fn reduce_general<S: Scalar>(sg: &mut SupportGraph<S>) {
    let mut frozen = vec![false; sg.us.len()];
    while let Some(cycle) = sg.find_cycle(Some(&frozen)) {
        if cycle.len() % 2 == 0 {
            sg.cancel_cycle(&cycle);
            continue;
        }
        let (verts, edges) = sg.component(sg.us[cycle[0]], Some(&frozen));
        if edges.len() == verts.len() {
            // exactly one independent cycle: leave it for exact extraction
            for e in edges {
                frozen[e] = true;
            }
        } else {
            // two or more cycles: shed the cheapest mass on this one
            let &min_e = cycle
                .iter()
                .min_by(|&&a, &&b| {
                    self_cmp(sg.xs[a] * sg.ws[a], sg.xs[b] * sg.ws[b])
                })
                .unwrap();
            sg.drop_edge(min_e);
        }
    }
}

fn self_cmp<S: Scalar>(a: S, b: S) -> std::cmp::Ordering {
    a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
}

// ---------------------------------------------------------------------------
// Forest DP
// ---------------------------------------------------------------------------

/// Maximum-weight matching on a forest by subtree DP. `restrict` limits the
/// graph to the given live edges; vertices outside stay unmatched.
fn forest_dp<S: Scalar>(
    sg: &SupportGraph<S>,
    edges: &[usize],
    skip: Option<usize>,
) -> (S, Vec<usize>) {
    let n = sg.n as usize;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &e in edges {
        if Some(e) == skip || !sg.alive[e] {
            continue;
        }
        adj[sg.us[e] as usize].push(e);
        adj[sg.vs[e] as usize].push(e);
    }
    let mut visited = vec![false; n];
    let mut total = S::zero();
    let mut picked: Vec<usize> = Vec::new();

    for &e0 in edges {
        if Some(e0) == skip || !sg.alive[e0] {
            continue;
        }
        let root = sg.us[e0];
        if visited[root as usize] {
            continue;
        }
        // post-order over the tree rooted here
        let mut order: Vec<u32> = Vec::new();
        let mut parent_edge: Vec<usize> = vec![usize::MAX; n];
        let mut stack = vec![root];
        visited[root as usize] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            for &e in &adj[v as usize] {
                if e == parent_edge[v as usize] {
                    continue;
                }
                let w = sg.other(e, v);
                debug_assert!(!visited[w as usize], "cycle fed to forest DP");
                visited[w as usize] = true;
                parent_edge[w as usize] = e;
                stack.push(w);
            }
        }
        // dp0: v unmatched, children free; dp1: v matched to the best child
        let mut dp0 = vec![S::zero(); n];
        let mut dp1: Vec<Option<S>> = vec![None; n];
        let mut choice: Vec<usize> = vec![usize::MAX; n];
        for &v in order.iter().rev() {
            let vi = v as usize;
            let mut free_sum = S::zero();
            for &e in &adj[vi] {
                if e == parent_edge[vi] {
                    continue;
                }
                let c = sg.other(e, v) as usize;
                let best_c = match dp1[c] {
                    Some(m1) if m1 > dp0[c] => m1,
                    _ => dp0[c],
                };
                free_sum = free_sum + best_c;
            }
            dp0[vi] = free_sum;
            for &e in &adj[vi] {
                if e == parent_edge[vi] {
                    continue;
                }
                let c = sg.other(e, v) as usize;
                let best_c = match dp1[c] {
                    Some(m1) if m1 > dp0[c] => m1,
                    _ => dp0[c],
                };
                // swap c's contribution for dp0[c] and add the edge
                let cand = free_sum - best_c + dp0[c] + sg.ws[e];
                if dp1[vi].map_or(true, |cur| cand > cur) {
                    dp1[vi] = Some(cand);
                    choice[vi] = e;
                }
            }
        }
        // walk down, honoring each vertex's best state
        let ri = root as usize;
        let root_val = match dp1[ri] {
            Some(m1) if m1 > dp0[ri] => m1,
            _ => dp0[ri],
        };
        total = total + root_val;
        // (vertex, may_match_down)
        let mut walk: Vec<(u32, bool)> = vec![(root, true)];
        while let Some((v, may)) = walk.pop() {
            let vi = v as usize;
            let take = may && matches!(dp1[vi], Some(m1) if m1 > dp0[vi]);
            let taken_edge = if take { choice[vi] } else { usize::MAX };
            if take {
                picked.push(taken_edge);
            }
            for &e in &adj[vi] {
                if e == parent_edge[vi] {
                    continue;
                }
                let c = sg.other(e, v);
                if e == taken_edge {
                    // c is matched upward: its children become free agents
                    walk.push((c, false));
                } else {
                    walk.push((c, true));
                }
            }
        }
    }
    (total, picked)
}

/// Extracts the exact maximum-weight matching from a forest support.
pub fn round_forest<S: Scalar>(sg: &SupportGraph<S>) -> Result<Matching<S>> {
    let edges: Vec<usize> = (0..sg.us.len()).filter(|&i| sg.alive[i]).collect();
    if sg.find_cycle(None).is_some() {
        return Err(Error::Precondition("support still contains a cycle".into()));
    }
    let (_, picked) = forest_dp(sg, &edges, None);
    let mut m = Matching::new(sg.n);
    for e in picked {
        m.push(sg.us[e], sg.vs[e], sg.ws[e]);
    }
    m.validate()?;
    Ok(m)
}

/// Bipartite rounding chain: threshold, cancel all cycles, forest DP.
pub fn round_bipartite<S: Scalar>(x: &FractionalMatching<S>, tau: S) -> Result<Matching<S>> {
    let mut sg = SupportGraph::extract(x, tau);
    cancel_cycles_bipartite(&mut sg)?;
    round_forest(&sg)
}

/// General rounding chain: threshold, cancel even cycles, reduce every
/// component to at most one odd cycle, then extract exactly; a unicyclic
/// component is solved by trying each cycle edge's removal.
pub fn round_general<S: Scalar>(x: &FractionalMatching<S>, tau: S) -> Result<Matching<S>> {
    let mut sg = SupportGraph::extract(x, tau);
    reduce_general(&mut sg);

    let mut m = Matching::new(sg.n);
    let mut claimed = vec![false; sg.n as usize];
    let mut seen_comp = vec![false; sg.n as usize];
    for i in 0..sg.us.len() {
        if !sg.alive[i] || seen_comp[sg.us[i] as usize] {
            continue;
        }
        let (verts, edges) = sg.component(sg.us[i], None);
        for &v in &verts {
            seen_comp[v as usize] = true;
        }
        let cyclomatic = (edges.len() + 1).saturating_sub(verts.len());
        let picked = if cyclomatic == 0 {
            forest_dp(&sg, &edges, None).1
        } else {
            // one odd cycle: the best matching omits at least one cycle edge
            let cycle = cycle_within(&sg, &edges).ok_or_else(|| {
                Error::Internal("cyclomatic component without a cycle".into())
            })?;
            let mut best: Option<(S, Vec<usize>)> = None;
            for &e in &cycle {
                let (val, picked) = forest_dp(&sg, &edges, Some(e));
                if best.as_ref().map_or(true, |(bv, _)| val > *bv) {
                    best = Some((val, picked));
                }
            }
            best.unwrap().1
        };
        for e in picked {
            let (u, v) = (sg.us[e], sg.vs[e]);
            debug_assert!(!claimed[u as usize] && !claimed[v as usize]);
            claimed[u as usize] = true;
            claimed[v as usize] = true;
            m.push(u, v, sg.ws[e]);
        }
    }
    m.validate()?;
    Ok(m)
}

/// A cycle using only the given edges, if one exists.
fn cycle_within<S: Scalar>(sg: &SupportGraph<S>, edges: &[usize]) -> Option<Vec<usize>> {
    let mut mask = vec![true; sg.us.len()];
    for &e in edges {
        mask[e] = false;
    }
    // frozen mask semantics: true means excluded
    sg.find_cycle(Some(&mask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use num_traits::{One, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Q = Ratio<i64>;

    /// Exhaustive maximum-weight matching over every edge subset.
    fn brute_best<S: Scalar>(n: u32, edges: &[(u32, u32, S)]) -> S {
        assert!(edges.len() <= 22, "brute force cap");
        let mut best = S::zero();
        for mask in 0u32..(1 << edges.len()) {
            let mut used = vec![false; n as usize];
            let mut ok = true;
            let mut val = S::zero();
            for (i, &(u, v, w)) in edges.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    if used[u as usize] || used[v as usize] {
                        ok = false;
                        break;
                    }
                    used[u as usize] = true;
                    used[v as usize] = true;
                    val = val + w;
                }
            }
            if ok && val > best {
                best = val;
            }
        }
        best
    }

    fn frac<S: Scalar>(n: u32, entries: &[(u32, u32, S, S)]) -> FractionalMatching<S> {
        let mut x = FractionalMatching::new(n);
        for &(u, v, xe, we) in entries {
            x.set(u, v, xe, we);
        }
        x
    }

    #[test]
    fn four_cycle_cancels_to_value_two() {
        let h = Q::new(1, 2);
        let one = Q::one();
        let x = frac(4, &[(0, 1, h, one), (1, 2, h, one), (2, 3, h, one), (0, 3, h, one)]);
        let mut sg = SupportGraph::extract(&x, Q::zero());
        assert_eq!(sg.value(), Q::from_integer(2));
        cancel_cycles_bipartite(&mut sg).unwrap();
        assert!(sg.find_cycle(None).is_none());
        assert_eq!(sg.value(), Q::from_integer(2), "cancel must preserve the tie");
        let m = round_forest(&sg).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weight(), Q::from_integer(2));
    }

    #[test]
    fn cancel_prefers_the_heavier_alternation() {
        // C4 with one heavy edge: the +delta side must absorb it
        let h = 0.5f64;
        let x = frac(4, &[(0, 1, h, 5.0), (1, 2, h, 1.0), (2, 3, h, 1.0), (0, 3, h, 1.0)]);
        let mut sg = SupportGraph::extract(&x, 0.0);
        let before = sg.value();
        cancel_cycles_bipartite(&mut sg).unwrap();
        assert!(sg.value() >= before - 1e-9);
        assert!(sg.value() > before + 1.0, "heavy edge should gain mass");
        let m = round_forest(&sg).unwrap();
        assert!(m.weight() >= 6.0 - 1e-9); // 5 + 1 on the opposite side
    }

    #[test]
    fn triangle_support_fails_bipartite_precondition() {
        let t = 1.0f64 / 3.0;
        let x = frac(3, &[(0, 1, t, 1.0), (1, 2, t, 1.0), (0, 2, t, 1.0)]);
        let mut sg = SupportGraph::extract(&x, 0.0);
        let err = cancel_cycles_bipartite(&mut sg).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn general_rounding_handles_odd_cycles_exactly() {
        // C5 at x = 2/5: fractional value 2, integral optimum 2
        let f = Q::new(2, 5);
        let one = Q::one();
        let x = frac(
            5,
            &[
                (0, 1, f, one),
                (1, 2, f, one),
                (2, 3, f, one),
                (3, 4, f, one),
                (0, 4, f, one),
            ],
        );
        let m = round_general(&x, Q::zero()).unwrap();
        assert_eq!(m.len(), 2);

        // triangle with one heavy edge: dropping a light edge must keep it
        let t = 1.0f64 / 3.0;
        let x = frac(3, &[(0, 1, t, 5.0), (1, 2, t, 1.0), (0, 2, t, 1.0)]);
        let m = round_general(&x, 0.0).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m.weight() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn forest_dp_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let n: u32 = rng.random_range(4..14);
            // random forest: attach each vertex to an earlier one with prob
            let mut edges: Vec<(u32, u32, f64)> = Vec::new();
            for v in 1..n {
                if rng.random::<f64>() < 0.8 {
                    let u = rng.random_range(0..v);
                    edges.push((u, v, rng.random::<f64>()));
                }
            }
            if edges.is_empty() {
                continue;
            }
            let entries: Vec<(u32, u32, f64, f64)> =
                edges.iter().map(|&(u, v, w)| (u, v, 0.5, w)).collect();
            let x = frac(n, &entries);
            let sg = SupportGraph::extract(&x, 0.0);
            let m = round_forest(&sg).unwrap();
            let brute = brute_best(n, &edges);
            assert!(
                (m.weight() - brute).abs() < 1e-9,
                "dp {} vs brute {brute} on {edges:?}",
                m.weight()
            );
        }
    }

    #[test]
    fn bipartite_chain_random_inputs_end_to_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for round in 0..200 {
            let l: u32 = rng.random_range(2..7);
            let r: u32 = rng.random_range(2..7);
            let n = l + r;
            let mut entries: Vec<(u32, u32, f64, f64)> = Vec::new();
            for u in 0..l {
                for v in l..n {
                    if rng.random::<f64>() < 0.5 {
                        entries.push((u, v, rng.random::<f64>(), rng.random::<f64>()));
                    }
                }
            }
            if entries.is_empty() {
                continue;
            }
            // scale into the degree polytope so cancellation stays feasible
            let mut x = frac(n, &entries);
            let max_load = x
                .degree_loads()
                .into_iter()
                .fold(0.0f64, f64::max);
            if max_load > 1.0 {
                x.scale(1.0 / max_load);
            }
            let before = x.value();
            let mut sg = SupportGraph::extract(&x, 0.0);
            cancel_cycles_bipartite(&mut sg).unwrap();
            assert!(sg.find_cycle(None).is_none(), "round {round}: not a forest");
            assert!(
                sg.value() >= before - 1e-9,
                "round {round}: value dropped from {before} to {}",
                sg.value()
            );
            let m = round_forest(&sg).unwrap();
            assert!(
                m.weight() >= sg.value() - 1e-9,
                "round {round}: integral {} below fractional {}",
                m.weight(),
                sg.value()
            );
            m.validate().unwrap();
        }
    }

    #[test]
    fn general_chain_never_loses_to_the_fractional_value_on_unicyclic_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            // random odd cycle plus pendant trees, x small enough to be
            // feasible for the odd-set relaxation
            let k = 2 * rng.random_range(1..4u32) + 1; // 3, 5, or 7
            let extra: u32 = rng.random_range(0..4);
            let n = k + extra;
            let cap = (k - 1) as f64 / 2.0;
            let per_edge = cap / k as f64;
            let mut entries: Vec<(u32, u32, f64, f64)> = Vec::new();
            for i in 0..k {
                entries.push((i, (i + 1) % k, per_edge, rng.random::<f64>() + 0.1));
            }
            for v in k..n {
                let u = rng.random_range(0..k);
                entries.push((u, v, rng.random::<f64>() * 0.3, rng.random::<f64>() + 0.1));
            }
            let x = frac(n, &entries);
            let m = round_general(&x, 0.0).unwrap();
            let flat: Vec<(u32, u32, f64)> =
                entries.iter().map(|&(u, v, _, w)| (u, v, w)).collect();
            let brute = brute_best(n, &flat);
            assert!(
                (m.weight() - brute).abs() < 1e-9,
                "unicyclic extraction should be exact: {} vs {brute}",
                m.weight()
            );
        }
    }

    #[test]
    fn rational_chain_is_exact() {
        // two squares sharing a corner, rational thirds everywhere
        let t = Q::new(1, 3);
        let one = Q::one();
        let x = frac(
            7,
            &[
                (0, 1, t, one),
                (1, 2, t, one),
                (2, 3, t, one),
                (0, 3, t, one),
                (3, 4, t, one),
                (4, 5, t, one),
                (5, 6, t, one),
                (3, 6, t, one),
            ],
        );
        let before = x.value();
        let mut sg = SupportGraph::extract(&x, Q::zero());
        cancel_cycles_bipartite(&mut sg).unwrap();
        assert!(sg.value() >= before, "rational cancel cannot lose value");
        let m = round_forest(&sg).unwrap();
        assert!(m.weight() >= sg.value());
        assert_eq!(m.weight(), Q::from_integer(3)); // three disjoint edges exist
    }

    #[test]
    fn threshold_drops_dust_entries() {
        let x = frac(4, &[(0, 1, 1e-6, 1.0), (2, 3, 0.9, 1.0)]);
        let sg = SupportGraph::extract(&x, default_support_threshold(4, 0.1));
        assert_eq!(sg.live_edges(), 1);
        assert_eq!(sg.record_bytes(), EDGE_RECORD_BYTES);
    }

    #[test]
    fn empty_and_single_edge_supports_round_cleanly() {
        let x: FractionalMatching<f64> = FractionalMatching::new(3);
        let m = round_general(&x, 0.0).unwrap();
        assert!(m.is_empty());
        let x = frac(2, &[(0, 1, 0.7, 2.0)]);
        let m = round_bipartite(&x, 0.0).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.weight(), 2.0);
    }
}
