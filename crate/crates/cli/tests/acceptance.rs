//! Acceptance gate: ten pipeline-level checks, printed one line each as
//! `[criterion N] PASS/FAIL`. Run with `--nocapture` to see the lines on
//! success; they print automatically when the gate fails.

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use matchstream_baselines::{
    brute_force_max_matching, fractional_lp_opt, max_weight_bipartite_matching,
    maximum_bipartite_matching, Graph,
};
use matchstream_core::lp::{
    parse_fractional, write_fractional, DualState, FractionalMatching, GraphClass, MatchingLp,
    ObjectiveMode, OddSet,
};
use matchstream_core::mwu::{
    duality_gap, parse_dual, solve_fractional, verify_dual_feasibility, write_dual, MwuConfig,
    SolveOutcome,
};
use matchstream_core::oracle::{
    enumerate_violated_odd_sets, greedy_pass, max_weight_class, weight_class, AdmissibilityRule,
    Pricing,
};
use matchstream_core::round::{
    cancel_cycles_bipartite, default_support_threshold, round_bipartite, round_forest,
    round_general, SupportGraph,
};
use matchstream_core::stream::{Edge, EdgeOrder, EdgeStream, GenSpec, SpaceMeter};

type Crit = (bool, String);

fn ctx(base: String, bad: &[String]) -> String {
    match bad.first() {
        Some(first) => format!("{base}; first: {first}"),
        None => base,
    }
}

fn gen_stream(spec: &str, order: EdgeOrder) -> EdgeStream<f64> {
    EdgeStream::from_generator(GenSpec::parse(spec).unwrap(), order).unwrap()
}

fn solve(
    stream: &EdgeStream<f64>,
    class: GraphClass,
    mode: ObjectiveMode,
    eps: f64,
) -> (SolveOutcome<f64>, MwuConfig<f64>) {
    let lp = MatchingLp::new(stream.n(), class, mode, eps).unwrap();
    let cfg = MwuConfig::for_lp(&lp);
    let mut meter = SpaceMeter::with_default_budget(stream.n(), eps);
    let out = solve_fractional(&lp, stream, &cfg, &mut meter).unwrap();
    (out, cfg)
}

// Criteria 1, 2, 4, 9: the 100-run bipartite suite (20 instances x 5 orders).
fn bipartite_suite() -> [Crit; 4] {
    let eps = 0.1;
    let t0 = Instant::now();
    let orders = [
        EdgeOrder::Identity,
        EdgeOrder::SortedByEndpoint,
        EdgeOrder::BipartiteBlock,
        EdgeOrder::Interleaved,
        EdgeOrder::Seeded(7),
    ];
    let mut specs: Vec<String> = Vec::new();
    for seed in 1..=7u64 {
        specs.push(format!("random-bipartite:n=100,l=50,p=0.15,seed={seed}"));
    }
    for seed in 1..=7u64 {
        specs.push(format!("random-bipartite:n=200,l=100,p=0.08,seed={seed}"));
    }
    for seed in 1..=6u64 {
        specs.push(format!("random-bipartite:n=400,l=200,p=0.04,seed={seed}"));
    }
    assert_eq!(specs.len(), 20);

    let dir = tempfile::tempdir().unwrap();
    let mut runs = 0usize;
    let mut c1_bad: Vec<String> = Vec::new();
    let mut c2_bad: Vec<String> = Vec::new();
    let mut c4_bad: Vec<String> = Vec::new();
    let mut c9_bad: Vec<String> = Vec::new();

    for spec in &specs {
        let hk = {
            let s = gen_stream(spec, EdgeOrder::Identity);
            maximum_bipartite_matching(&Graph::from_stream(&s)).unwrap().len() as f64
        };
        let mut objectives: Vec<f64> = Vec::new();
        for &order in &orders {
            runs += 1;
            let tag = format!("{spec} order {order}");
            let stream = gen_stream(spec, order);
            let class = GraphClass::Bipartite { left: stream.bipartite_left() };
            let (out, cfg) = solve(&stream, class, ObjectiveMode::Cardinality, eps);
            let cursor = stream.passes();

            if out.stats.passes != cursor || out.stats.passes > cfg.t_max + 3 {
                c4_bad.push(format!(
                    "{tag}: reported {} cursor {cursor} cap {}",
                    out.stats.passes,
                    cfg.t_max + 3
                ));
            }

            let m = round_bipartite(&out.x, default_support_threshold(stream.n(), eps)).unwrap();
            let size = m.len() as f64;
            objectives.push(size);
            if size < (1.0 - eps) * hk - 1e-9 {
                c1_bad.push(format!("{tag}: size {size} < (1-eps)*{hk}"));
            }

            if let Err(e) =
                verify_dual_feasibility(&stream, &out.dual, ObjectiveMode::Cardinality, 1e-9)
            {
                c2_bad.push(format!("{tag}: {e}"));
            }
            if !out.stats.converged || out.stats.certificate_gap > eps + 1e-12 {
                c2_bad.push(format!(
                    "{tag}: gap {} converged {}",
                    out.stats.certificate_gap, out.stats.converged
                ));
            }
            let fx = dir.path().join("x.txt");
            let fd = dir.path().join("d.txt");
            write_fractional(&fx, &out.x).unwrap();
            write_dual(&fd, stream.n(), &out.dual).unwrap();
            let px: FractionalMatching<f64> = parse_fractional(&fx).unwrap();
            let (_, pd) = parse_dual::<f64>(&fd).unwrap();
            let recomputed = duality_gap(px.value(), pd.value);
            if (recomputed - out.stats.certificate_gap).abs() > 1e-6 {
                c2_bad.push(format!(
                    "{tag}: artifact gap {recomputed} vs reported {}",
                    out.stats.certificate_gap
                ));
            }
        }
        let hi = objectives.iter().cloned().fold(f64::MIN, f64::max);
        let lo = objectives.iter().cloned().fold(f64::MAX, f64::min);
        if hi - lo > 2.0 * eps * hk + 1e-9 {
            c9_bad.push(format!("{spec}: spread {} > 2*eps*{hk}", hi - lo));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    [
        (
            c1_bad.is_empty() && runs >= 100 && secs < 120.0,
            ctx(format!("{runs} runs in {secs:.1}s"), &c1_bad),
        ),
        (c2_bad.is_empty(), ctx(format!("{runs} certificates"), &c2_bad)),
        (c4_bad.is_empty(), ctx(format!("{runs} pass counts"), &c4_bad)),
        (
            c9_bad.is_empty(),
            ctx(format!("{} instances x {} orders", specs.len(), orders.len()), &c9_bad),
        ),
    ]
}

// Criterion 3: peak metered space on dense instances (m >= 50n).
fn space_regime() -> Crit {
    let eps = 0.1;
    let cases: [(&str, bool, ObjectiveMode); 5] = [
        ("random-bipartite:n=400,l=200,p=0.75,seed=1", false, ObjectiveMode::Cardinality),
        ("complete-bipartite:a=100,b=100", false, ObjectiveMode::Cardinality),
        (
            "random-bipartite:n=400,l=200,p=0.75,seed=2,w=uniform",
            false,
            ObjectiveMode::Weighted,
        ),
        ("random-general:n=300,p=0.65,seed=1", true, ObjectiveMode::Cardinality),
        ("random-general:n=300,p=0.65,seed=3,w=uniform", true, ObjectiveMode::Weighted),
    ];
    let mut bad: Vec<String> = Vec::new();
    for (spec, general, mode) in cases {
        let stream = gen_stream(spec, EdgeOrder::Identity);
        let n = stream.n() as usize;
        let m = stream.m();
        assert!(m >= 50 * n, "{spec}: m {m} below the dense regime");
        let class = if general {
            GraphClass::General
        } else {
            GraphClass::Bipartite { left: stream.bipartite_left() }
        };
        let (out, _) = solve(&stream, class, mode, eps);
        let budget = SpaceMeter::default_budget(stream.n(), eps);
        let tenth = 16 * m / 10;
        if out.stats.peak_bytes > budget || out.stats.peak_bytes > tenth {
            bad.push(format!(
                "{spec}: peak {} vs budget {budget}, m/10 {tenth}",
                out.stats.peak_bytes
            ));
        }
    }
    (bad.is_empty(), ctx("5 dense instances".to_string(), &bad))
}

// Criterion 5: greedy oracle output is a maximal admissible matching on 500
// randomized (graph, duals, order) triples, checked independently.
fn oracle_suite() -> Crit {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut bad: Vec<String> = Vec::new();
    let mut runs = 0usize;
    for t in 0..500u64 {
        let n = rng.random_range(6..=40u32);
        let p = rng.random_range(0.05..0.5);
        let weighted = t % 3 == 1;
        let eps = 0.15;
        let mut edges: Vec<Edge<f64>> = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < p {
                    let w = if weighted { rng.random_range(0.05..1.0) } else { 1.0 };
                    edges.push(Edge::new(u, v, w));
                }
            }
        }
        edges.shuffle(&mut rng);
        let stream = EdgeStream::from_edges(n, edges.clone(), None).unwrap();

        let mut ds = DualState::<f64>::new(n);
        if t % 2 == 0 && n >= 5 {
            for _ in 0..rng.random_range(1..=3usize) {
                let k = if rng.random::<bool>() { 3 } else { 5 };
                let mut mem: Vec<u32> = (0..n).collect();
                mem.shuffle(&mut rng);
                mem.truncate(k);
                ds.add_odd_set(OddSet::new(mem).unwrap());
            }
        }
        let vf: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..2.0)).collect();
        let of: Vec<f64> = (0..ds.odd_sets().len()).map(|_| rng.random_range(0.05..2.0)).collect();
        ds.rescale(|v| vf[v as usize], |i, _| of[i]);
        let scale = rng.random_range(0.3..3.0);
        let lambda = 1.0 + rng.random_range(0.01..0.5);
        let rule = if weighted {
            AdmissibilityRule::weighted(lambda, eps, n)
        } else {
            AdmissibilityRule::cardinality(lambda)
        };
        let pricing = Pricing { duals: &ds, scale };
        let mut matched = vec![false; n as usize];
        let result = greedy_pass(stream.begin_pass(), &pricing, &rule, &mut matched, |_, _| {});
        runs += 1;

        // independent price and class arithmetic
        let price = |u: u32, v: u32| -> f64 {
            let mut raw = ds.vertex_weight(u) + ds.vertex_weight(v);
            for (set, w) in ds.odd_sets() {
                if set.contains_edge(u, v) {
                    raw += *w / set.capacity() as f64;
                }
            }
            scale * raw / ds.total()
        };
        let rounded = |w: f64| -> Option<f64> {
            if !weighted {
                return Some(1.0);
            }
            let i = weight_class(w, eps)?;
            if i > max_weight_class(eps, n) {
                return None;
            }
            Some((1.0 + eps).powi(-(i as i32)))
        };

        let mut used: HashSet<u32> = HashSet::new();
        let mut broken = false;
        for e in &result.edges {
            if !used.insert(e.u) || !used.insert(e.v) {
                bad.push(format!("triple {t}: width above 1"));
                broken = true;
                break;
            }
        }
        if broken {
            continue;
        }
        for e in &result.edges {
            match rounded(e.w) {
                Some(rw) if price(e.u, e.v) <= lambda * rw + 1e-9 => {}
                _ => {
                    bad.push(format!("triple {t}: picked inadmissible edge ({},{})", e.u, e.v));
                    break;
                }
            }
        }
        for e in &edges {
            if used.contains(&e.u) || used.contains(&e.v) {
                continue;
            }
            if let Some(rw) = rounded(e.w) {
                if price(e.u, e.v) <= lambda * rw - 1e-9 {
                    bad.push(format!("triple {t}: not maximal at ({},{})", e.u, e.v));
                    break;
                }
            }
        }
    }
    (bad.is_empty() && runs == 500, ctx(format!("{runs} triples"), &bad))
}

fn uf_find(parent: &mut [u32], mut v: u32) -> u32 {
    while parent[v as usize] != v {
        let g = parent[parent[v as usize] as usize];
        parent[v as usize] = g;
        v = g;
    }
    v
}

// Criterion 6: cycle canceling preserves unit-weight objectives and yields
// forests; forest DP matches brute force exactly on small supports.
fn rounding_chain() -> Crit {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bad: Vec<String> = Vec::new();
    let mut runs = 0usize;
    while runs < 200 {
        let l = rng.random_range(2..=5u32);
        let r = rng.random_range(2..=5u32);
        let n = l + r;
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for u in 0..l {
            for v in l..n {
                if rng.random::<f64>() < 0.5 {
                    pairs.push((u, v));
                }
            }
        }
        if pairs.is_empty() || pairs.len() > 20 {
            continue;
        }
        runs += 1;
        let mut x = FractionalMatching::<f64>::new(n);
        for &(u, v) in &pairs {
            x.set(u, v, rng.random_range(0.05..0.9), 1.0);
        }
        let maxload = x.degree_loads().into_iter().fold(0.0, f64::max);
        if maxload > 1.0 {
            x.scale(1.0 / (maxload * (1.0 + 1e-9)));
        }
        let before = x.value();

        let mut sg = SupportGraph::extract(&x, 0.0);
        cancel_cycles_bipartite(&mut sg).unwrap();
        let after = sg.value();
        if (after - before).abs() > 1e-9 {
            bad.push(format!("run {runs}: value {before} -> {after}"));
            continue;
        }

        let live = sg.to_fractional();
        let mut parent: Vec<u32> = (0..n).collect();
        let mut is_forest = true;
        for ((u, v), _, _) in live.iter() {
            let (ru, rv) = (uf_find(&mut parent, u), uf_find(&mut parent, v));
            if ru == rv {
                is_forest = false;
                break;
            }
            parent[ru as usize] = rv;
        }
        if !is_forest {
            bad.push(format!("run {runs}: cycle survives canceling"));
            continue;
        }

        let m = round_forest(&sg).unwrap();
        let forest_edges: Vec<(u32, u32, f64)> =
            live.iter().map(|((u, v), _, w)| (u, v, w)).collect();
        let brute = brute_force_max_matching(&Graph::new(n, forest_edges)).unwrap();
        if m.len() != brute.len() {
            bad.push(format!("run {runs}: dp {} vs brute {}", m.len(), brute.len()));
        }
        if (m.len() as f64) < (after - 1e-6).ceil() {
            bad.push(format!("run {runs}: dp {} below fractional {after}", m.len()));
        }
    }
    (bad.is_empty(), ctx(format!("{runs} inputs"), &bad))
}

fn connected_within(members: &[u32], adj: &[Vec<u32>]) -> bool {
    let inside: HashSet<u32> = members.iter().copied().collect();
    let mut seen: HashSet<u32> = HashSet::new();
    let mut stack = vec![members[0]];
    seen.insert(members[0]);
    while let Some(v) = stack.pop() {
        for &w in &adj[v as usize] {
            if inside.contains(&w) && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == members.len()
}

// Criterion 7: general-mode pipeline vs brute force on n <= 12, plus the
// odd-set separation oracle vs full subset enumeration.
fn general_suite() -> Crit {
    let eps = 0.2;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut bad: Vec<String> = Vec::new();
    let mut sep_bad: Vec<String> = Vec::new();
    let mut count = 0usize;
    let mut seed = 0u64;
    while count < 200 {
        seed += 1;
        let n = 4 + (seed % 9) as u32;
        let p = 0.2 + 0.05 * ((seed % 4) as f64);
        let spec = format!("random-general:n={n},p={p},seed={seed}");
        let stream = gen_stream(&spec, EdgeOrder::Identity);
        if stream.m() > 26 {
            continue;
        }
        count += 1;

        let (out, _) = solve(&stream, GraphClass::General, ObjectiveMode::Cardinality, eps);
        let m = round_general(&out.x, default_support_threshold(n, eps)).unwrap();
        let brute = brute_force_max_matching(&Graph::from_stream(&stream)).unwrap();
        if (m.len() as f64) < (1.0 - eps) * (brute.len() as f64) - 1.0 - 1e-9 {
            bad.push(format!("{spec}: |M| {} vs brute {}", m.len(), brute.len()));
        }

        // random degree-feasible x on the same support
        let mut x = FractionalMatching::<f64>::new(n);
        stream.for_each_edge(|e| {
            // placeholder value; filled below so rng stays outside the pass
            x.set(e.u, e.v, 1.0, 1.0);
        });
        let entries: Vec<(u32, u32)> = x.iter().map(|((u, v), _, _)| (u, v)).collect();
        for (u, v) in entries {
            x.set(u, v, rng.random_range(0.05..0.6), 1.0);
        }
        let maxload = x.degree_loads().into_iter().fold(0.0, f64::max);
        if maxload > 1.0 {
            x.scale(1.0 / (maxload * (1.0 + 1e-9)));
        }
        let k_max = MatchingLp::new(n, GraphClass::General, ObjectiveMode::Cardinality, eps)
            .unwrap()
            .k_max;

        let mine = enumerate_violated_odd_sets(&x, k_max, 1e-9, 1_000_000).unwrap();
        let mine_keys: HashSet<Vec<u32>> =
            mine.iter().map(|s| s.members().to_vec()).collect();

        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
        let sup: Vec<(u32, u32, f64)> = x.iter().map(|((u, v), xe, _)| (u, v, xe)).collect();
        for &(u, v, _) in &sup {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        let mut brute_connected: HashSet<Vec<u32>> = HashSet::new();
        let mut brute_any = false;
        for mask in 1u32..(1 << n) {
            let k = mask.count_ones() as usize;
            if k < 3 || k % 2 == 0 || k > k_max {
                continue;
            }
            let mut mass = 0.0;
            for &(u, v, xe) in &sup {
                if mask & (1 << u) != 0 && mask & (1 << v) != 0 {
                    mass += xe;
                }
            }
            if mass > (k / 2) as f64 + 1e-9 {
                brute_any = true;
                let members: Vec<u32> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
                if connected_within(&members, &adj) {
                    brute_connected.insert(members);
                }
            }
        }
        if mine_keys != brute_connected {
            sep_bad.push(format!(
                "{spec}: oracle found {} sets, enumeration {} connected sets",
                mine_keys.len(),
                brute_connected.len()
            ));
        }
        if brute_any != !mine.is_empty() {
            sep_bad.push(format!("{spec}: violation decision mismatch"));
        }
    }
    bad.extend(sep_bad);
    (bad.is_empty(), ctx(format!("{count} instances"), &bad))
}

// Criterion 8: weighted bipartite quality on 100 seeded n=12 runs.
fn weighted_suite() -> Crit {
    let eps = 0.1;
    let mut bad: Vec<String> = Vec::new();
    let mut runs = 0usize;
    for seed in 0..100u64 {
        let spec = format!("random-bipartite:n=12,l=6,p=0.5,seed={seed},w=uniform");
        let stream = gen_stream(&spec, EdgeOrder::Identity);
        let class = GraphClass::Bipartite { left: stream.bipartite_left() };
        let (out, _) = solve(&stream, class, ObjectiveMode::Weighted, eps);
        let m = round_bipartite(&out.x, default_support_threshold(stream.n(), eps)).unwrap();
        let opt = max_weight_bipartite_matching(&Graph::from_stream(&stream)).unwrap().weight();
        runs += 1;
        if m.weight() < (1.0 - 3.0 * eps) * opt - 1e-9 {
            bad.push(format!("{spec}: weight {} below 0.7 * {opt}", m.weight()));
        }
    }
    (bad.is_empty() && runs == 100, ctx(format!("{runs} runs"), &bad))
}

// Criterion 10: exact fixed points.
fn fixed_points() -> Crit {
    let mut bad: Vec<String> = Vec::new();

    let k3 = Graph::unit(3, &[(0, 1), (1, 2), (0, 2)]);
    let lpv = fractional_lp_opt(&k3).unwrap();
    if (lpv - 1.5).abs() > 1e-9 {
        bad.push(format!("K3 degree-only LP {lpv} != 3/2"));
    }

    let mut pet: Vec<(u32, u32)> = Vec::new();
    for i in 0..5u32 {
        pet.push((i, (i + 1) % 5));
        pet.push((i, i + 5));
        pet.push((5 + i, 5 + (i + 2) % 5));
    }
    let pm = brute_force_max_matching(&Graph::unit(10, &pet)).unwrap();
    if pm.len() != 5 {
        bad.push(format!("Petersen matching {} != 5", pm.len()));
    }

    let mut x = FractionalMatching::<f64>::new(4);
    for (u, v) in [(0u32, 1u32), (1, 2), (2, 3), (0, 3)] {
        x.set(u, v, 0.5, 1.0);
    }
    let mut sg = SupportGraph::extract(&x, 0.0);
    cancel_cycles_bipartite(&mut sg).unwrap();
    let val = sg.value();
    if (val - 2.0).abs() > 1e-12 {
        bad.push(format!("C4 cancel value {val} != 2"));
    } else if round_forest(&sg).unwrap().len() != 2 {
        bad.push("C4 does not round to two edges".to_string());
    }

    (bad.is_empty(), ctx("3 identities".to_string(), &bad))
}

#[test]
fn acceptance() {
    let suite = bipartite_suite();
    let [c1, c2, c4, c9] = suite;
    let results: Vec<(usize, Crit)> = vec![
        (1, c1),
        (2, c2),
        (3, space_regime()),
        (4, c4),
        (5, oracle_suite()),
        (6, rounding_chain()),
        (7, general_suite()),
        (8, weighted_suite()),
        (9, c9),
        (10, fixed_points()),
    ];
    let mut failed: Vec<String> = Vec::new();
    for (idx, (ok, ctx)) in &results {
        if *ok {
            println!("[criterion {idx}] PASS ({ctx})");
        } else {
            println!("[criterion {idx}] FAIL ({ctx})");
            failed.push(format!("criterion {idx}: {ctx}"));
        }
    }
    assert!(failed.is_empty(), "acceptance failures: {failed:#?}");
}
