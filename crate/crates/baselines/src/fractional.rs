//! Exact optimum of the degree-constrained fractional matching LP.

use matchstream_core::error::Error;

use crate::{max_weight_bipartite_matching, maximum_bipartite_matching, Graph};

/// Optimal value of max sum w_e x_e subject to per-vertex loads at most 1
/// (no odd-set constraints), for any graph.
///
/// The LP optimum is half the maximum-weight integral matching of the
/// bipartite double cover: each vertex v splits into v+ and v-, each edge uv
/// into u+v- and u-v+. Halving a double-cover matching gives a feasible x of
/// half its weight, and every half-integral LP vertex lifts back, so the two
/// optima coincide.
pub fn fractional_lp_opt(g: &Graph) -> Result<f64, Error> {
    let n = g.n;
    let mut edges = Vec::with_capacity(2 * g.m());
    for &(u, v, w) in &g.edges {
        edges.push((u, n + v, w));
        edges.push((v, n + u, w));
    }
    let cover = Graph::new(2 * n, edges);
    let unit = g.edges.iter().all(|&(_, _, w)| w == 1.0);
    let total = if unit {
        maximum_bipartite_matching(&cover)?.len() as f64
    } else {
        max_weight_bipartite_matching(&cover)?.weight()
    };
    Ok(total / 2.0)
}
