//! Exhaustive matching search for test-sized instances.

use matchstream_core::error::Error;
use matchstream_core::lp::Matching;

use crate::Graph;

const MAX_EDGES: usize = 26;

/// Maximum-cardinality matching by branching on every edge.
pub fn brute_force_max_matching(g: &Graph) -> Result<Matching<f64>, Error> {
    search(g, |_| 1.0)
}

/// Maximum-weight matching by branching on every edge.
pub fn brute_force_max_weight_matching(g: &Graph) -> Result<Matching<f64>, Error> {
    search(g, |w| w)
}

fn search(g: &Graph, gain: impl Fn(f64) -> f64) -> Result<Matching<f64>, Error> {
    if g.n > 64 {
        return Err(Error::Unsupported(format!(
            "brute force capped at 64 vertices, got {}",
            g.n
        )));
    }
    if g.m() > MAX_EDGES {
        return Err(Error::Unsupported(format!(
            "brute force capped at {MAX_EDGES} edges, got {}",
            g.m()
        )));
    }
    // suffix[i] bounds the gain attainable from edges i..
    let gains: Vec<f64> = g.edges.iter().map(|&(_, _, w)| gain(w).max(0.0)).collect();
    let mut suffix = vec![0.0; g.m() + 1];
    for i in (0..g.m()).rev() {
        suffix[i] = suffix[i + 1] + gains[i];
    }

    struct Ctx<'a> {
        g: &'a Graph,
        gains: &'a [f64],
        suffix: &'a [f64],
        best: f64,
        best_set: Vec<usize>,
        cur_set: Vec<usize>,
    }

    fn rec(ctx: &mut Ctx<'_>, i: usize, used: u64, cur: f64) {
        if cur > ctx.best {
            ctx.best = cur;
            ctx.best_set = ctx.cur_set.clone();
        }
        if i == ctx.g.m() || cur + ctx.suffix[i] <= ctx.best {
            return;
        }
        let (u, v, _) = ctx.g.edges[i];
        if used & (1 << u) == 0 && used & (1 << v) == 0 {
            ctx.cur_set.push(i);
            rec(ctx, i + 1, used | (1 << u) | (1 << v), cur + ctx.gains[i]);
            ctx.cur_set.pop();
        }
        rec(ctx, i + 1, used, cur);
    }

    let mut ctx = Ctx {
        g,
        gains: &gains,
        suffix: &suffix,
        best: 0.0,
        best_set: Vec::new(),
        cur_set: Vec::new(),
    };
    rec(&mut ctx, 0, 0, 0.0);

    let mut m = Matching::new(g.n);
    for &i in &ctx.best_set {
        let (u, v, w) = g.edges[i];
        m.push(u, v, w);
    }
    m.validate()?;
    Ok(m)
}
