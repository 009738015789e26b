//! Maximum-weight bipartite matching via successive shortest augmenting
//! paths with node potentials.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use matchstream_core::error::Error;
use matchstream_core::lp::Matching;

use crate::Graph;

struct Arc {
    to: u32,
    cap: u32,
    cost: f64,
    /// Index of the original edge for matching extraction; usize::MAX otherwise.
    edge: usize,
}

struct Network {
    adj: Vec<Vec<usize>>,
    arcs: Vec<Arc>,
}

impl Network {
    fn new(nodes: usize) -> Self {
        Network { adj: vec![Vec::new(); nodes], arcs: Vec::new() }
    }

    fn add(&mut self, from: u32, to: u32, cap: u32, cost: f64, edge: usize) {
        self.adj[from as usize].push(self.arcs.len());
        self.arcs.push(Arc { to, cap, cost, edge });
        self.adj[to as usize].push(self.arcs.len());
        self.arcs.push(Arc { to: from, cap: 0, cost: -cost, edge });
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, u32);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want smallest distance first
        other.0.total_cmp(&self.0)
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Computes a maximum-weight (not necessarily maximum-cardinality) matching.
/// Augmenting paths are taken in order of decreasing gain and the search
/// stops at the first non-positive gain. Errors on non-bipartite input.
pub fn max_weight_bipartite_matching(g: &Graph) -> Result<Matching<f64>, Error> {
    let color = g.two_color()?;
    let n = g.n as usize;
    let (source, sink) = (n as u32, n as u32 + 1);
    let mut net = Network::new(n + 2);
    for v in 0..n as u32 {
        if !color[v as usize] {
            net.add(source, v, 1, 0.0, usize::MAX);
        } else {
            net.add(v, sink, 1, 0.0, usize::MAX);
        }
    }
    for (i, &(u, v, w)) in g.edges.iter().enumerate() {
        let (l, r) = if color[u as usize] { (v, u) } else { (u, v) };
        net.add(l, r, 1, -w, i);
    }

    let nodes = n + 2;
    // the initial residual graph is a DAG (source, left, right, sink); one
    // sweep in that order yields exact shortest distances as potentials
    let mut pot = vec![0.0f64; nodes];
    for &(u, v, w) in &g.edges {
        let r = if color[u as usize] { u } else { v } as usize;
        pot[r] = pot[r].min(-w);
    }
    pot[sink as usize] = pot.iter().take(n).cloned().fold(0.0, f64::min);

    let mut dist = vec![f64::INFINITY; nodes];
    let mut prev_arc = vec![usize::MAX; nodes];
    loop {
        // Dijkstra over reduced costs
        dist.fill(f64::INFINITY);
        dist[source as usize] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem(0.0, source));
        while let Some(HeapItem(d, u)) = heap.pop() {
            if d > dist[u as usize] {
                continue;
            }
            for &ai in &net.adj[u as usize] {
                let arc = &net.arcs[ai];
                if arc.cap == 0 {
                    continue;
                }
                let rc = (arc.cost + pot[u as usize] - pot[arc.to as usize]).max(0.0);
                let nd = d + rc;
                if nd < dist[arc.to as usize] {
                    dist[arc.to as usize] = nd;
                    prev_arc[arc.to as usize] = ai;
                    heap.push(HeapItem(nd, arc.to));
                }
            }
        }
        if dist[sink as usize].is_infinite() {
            break;
        }
        let path_cost = dist[sink as usize] - pot[source as usize] + pot[sink as usize];
        if path_cost >= -1e-12 {
            break;
        }
        for v in 0..nodes {
            if dist[v].is_finite() {
                pot[v] += dist[v];
            }
        }
        // augment one unit along the recorded path
        let mut v = sink;
        while v != source {
            let ai = prev_arc[v as usize];
            net.arcs[ai].cap -= 1;
            net.arcs[ai ^ 1].cap += 1;
            v = net.arcs[ai ^ 1].to;
        }
    }

    let mut m = Matching::new(g.n);
    for arc in net.arcs.iter().skip(1).step_by(2) {
        // a reverse arc with capacity means its forward edge carries flow
        if arc.edge != usize::MAX && arc.cap == 1 {
            let (u, v, w) = g.edges[arc.edge];
            m.push(u, v, w);
        }
    }
    m.validate()?;
    Ok(m)
}
