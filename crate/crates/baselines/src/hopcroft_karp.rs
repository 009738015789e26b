//! Maximum-cardinality bipartite matching via Hopcroft-Karp.

use matchstream_core::error::Error;
use matchstream_core::lp::Matching;

use crate::Graph;

const NIL: u32 = u32::MAX;
const INF: u32 = u32::MAX;

/// Computes a maximum-cardinality matching. The bipartition is recovered by
/// 2-coloring; errors if the graph contains an odd cycle.
pub fn maximum_bipartite_matching(g: &Graph) -> Result<Matching<f64>, Error> {
    let color = g.two_color()?;
    let n = g.n as usize;
    // adjacency from the false-colored side only; every edge crosses
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in &g.edges {
        let (l, r) = if color[u as usize] { (v, u) } else { (u, v) };
        adj[l as usize].push(r);
    }
    let lefts: Vec<u32> = (0..g.n).filter(|&v| !color[v as usize]).collect();

    let mut pair_l = vec![NIL; n];
    let mut pair_r = vec![NIL; n];
    let mut dist = vec![INF; n];
    let mut queue = std::collections::VecDeque::new();

    loop {
        // BFS from free left vertices builds the layer structure
        queue.clear();
        let mut found_free = false;
        for &l in &lefts {
            if pair_l[l as usize] == NIL {
                dist[l as usize] = 0;
                queue.push_back(l);
            } else {
                dist[l as usize] = INF;
            }
        }
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l as usize] {
                let next = pair_r[r as usize];
                if next == NIL {
                    found_free = true;
                } else if dist[next as usize] == INF {
                    dist[next as usize] = dist[l as usize] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found_free {
            break;
        }
        // DFS augments along the layers
        for &l in &lefts {
            if pair_l[l as usize] == NIL {
                augment(l, &adj, &mut pair_l, &mut pair_r, &mut dist);
            }
        }
    }

    let mut m = Matching::new(g.n);
    for &l in &lefts {
        if pair_l[l as usize] != NIL {
            m.push(l, pair_l[l as usize], 1.0);
        }
    }
    m.validate()?;
    Ok(m)
}

fn augment(
    l: u32,
    adj: &[Vec<u32>],
    pair_l: &mut [u32],
    pair_r: &mut [u32],
    dist: &mut [u32],
) -> bool {
    for &r in &adj[l as usize] {
        let next = pair_r[r as usize];
        let ok = next == NIL
            || (dist[next as usize] == dist[l as usize] + 1
                && augment(next, adj, pair_l, pair_r, dist));
        if ok {
            pair_l[l as usize] = r;
            pair_r[r as usize] = l;
            return true;
        }
    }
    dist[l as usize] = INF;
    false
}
