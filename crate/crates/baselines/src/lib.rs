//! Exact offline baselines: non-streaming reference algorithms the streaming
//! pipeline is measured against. Nothing here is space-metered or pass-bound,
//! and nothing in the streaming side depends on this crate at run time.

mod brute;
mod fractional;
mod hopcroft_karp;
mod weighted;

pub use brute::{brute_force_max_matching, brute_force_max_weight_matching};
pub use fractional::fractional_lp_opt;
pub use hopcroft_karp::maximum_bipartite_matching;
pub use weighted::max_weight_bipartite_matching;

use matchstream_core::error::Error;
use matchstream_core::scalar::Scalar;
use matchstream_core::stream::EdgeStream;

/// Materialized graph view for the offline algorithms.
#[derive(Debug, Clone)]
pub struct Graph {
    pub n: u32,
    pub edges: Vec<(u32, u32, f64)>,
}

impl Graph {
    pub fn new(n: u32, edges: Vec<(u32, u32, f64)>) -> Self {
        Graph { n, edges }
    }

    pub fn unit(n: u32, pairs: &[(u32, u32)]) -> Self {
        Graph { n, edges: pairs.iter().map(|&(u, v)| (u, v, 1.0)).collect() }
    }

    /// Reads the whole stream once. Offline by design.
    pub fn from_stream<S: Scalar>(stream: &EdgeStream<S>) -> Self {
        let mut edges = Vec::with_capacity(stream.m());
        stream.for_each_edge(|e| {
            edges.push((e.u, e.v, e.w.to_f64().unwrap_or(f64::NAN)));
        });
        Graph { n: stream.n(), edges }
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Adjacency lists over edge indices.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n as usize];
        for (i, &(u, v, _)) in self.edges.iter().enumerate() {
            adj[u as usize].push(i);
            adj[v as usize].push(i);
        }
        adj
    }

    /// Splits vertices into two color classes by BFS, or reports an odd cycle.
    pub fn two_color(&self) -> Result<Vec<bool>, Error> {
        let adj = self.adjacency();
        let n = self.n as usize;
        let mut color = vec![None; n];
        let mut queue = std::collections::VecDeque::new();
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(false);
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                let cu = color[u].unwrap();
                for &ei in &adj[u] {
                    let (a, b, _) = self.edges[ei];
                    let w = if a as usize == u { b as usize } else { a as usize };
                    match color[w] {
                        None => {
                            color[w] = Some(!cu);
                            queue.push_back(w);
                        }
                        Some(cw) if cw == cu => {
                            return Err(Error::Precondition(format!(
                                "graph is not bipartite: odd cycle through {u} and {w}"
                            )));
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        Ok(color.into_iter().map(|c| c.unwrap_or(false)).collect())
    }
}
