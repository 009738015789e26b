//! The multiplicative-weights solver: iterated one-pass oracles, certificate
//! tracking, and duality-gap stopping.
//!
//! Each iteration streams one pass, extracting a maximal matching among
//! edges the current scaled duals leave admissible, then multiplies the
//! weight of every loaded expert (vertex or odd set) by (1 + eta * load).
//! The primal answer is the running average of the matchings.
//!
//! Certificates ride along on the same passes: a frozen expert distribution
//! c scaled by D is a feasible dual iff D >= w_e / price_c(e) on every edge,
//! so tracking the max of that ratio while the pass streams yields, for
//! free, the least feasible dual value each candidate distribution can
//! certify. The candidates are the pass's own distribution, the running
//! average distribution, and a cover built from the first matching. The best
//! certified dual both drives the admissibility scale downward and, against
//! the averaged primal, decides the stop rule. A pass where the oracle finds
//! nothing still helps: it proves every edge is priced out, which shrinks
//! the certified dual by a factor lambda.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::time::Instant;

use crate::error::Error;
use crate::lp::{
    DualSolution, DualState, FractionalMatching, GraphClass, MatchingLp, ObjectiveMode, OddSet,
};
use crate::oracle::{find_odd_sets, greedy_pass, AdmissibilityRule, Pricing};
use crate::scalar::{lift, Real, Scalar};
use crate::stream::{Edge, EdgeStream, RunStats, SpaceMeter, DUAL_RECORD_BYTES, EDGE_RECORD_BYTES};
use crate::Result;

const MODULE: &str = "mwu";
/// Logical bytes per support-map entry: endpoint key, count, weight.
const COUNT_RECORD_BYTES: usize = 20;

/// Loop termination policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Stop once the certified duality gap is at most epsilon.
    CertificateGap,
    /// Run exactly `t_max` iterations.
    FixedIterations,
}

/// Solver parameters. `for_lp` fills the standard defaults.
#[derive(Debug, Clone)]
pub struct MwuConfig<R> {
    pub epsilon: f64,
    /// Multiplicative step size, default epsilon / 4.
    pub eta: f64,
    /// Oracle width bound; matchings have width 1.
    pub rho: f64,
    /// Iteration cap, default ceil(4 * rho * ln(n) / epsilon^2).
    pub t_max: u32,
    pub stop: StopRule,
    /// Admissibility threshold, default 1 + epsilon.
    pub lambda: R,
    /// Cap on tracked odd-set experts (general class only).
    pub max_odd_experts: usize,
    /// Run odd-set discovery every this many iterations.
    pub odd_period: u32,
    /// Rescale the averaged primal by this factor before export. Averages of
    /// matchings are feasible as-is, so the exact default is 1.
    pub feasibility_rescale: R,
    /// Passes without certified-gap improvement before the loop gives up
    /// early (still reported as not converged). Two multiplicative drift
    /// phases by default; 0 disables.
    pub stall_window: u32,
}

impl<R: Real> MwuConfig<R> {
    pub fn for_lp(lp: &MatchingLp) -> Self {
        let eps = lp.epsilon;
        let n = lp.n.max(2) as f64;
        // the ln(n) floor keeps tiny instances from starving the weight drift
        let t_max = (4.0 * n.ln().max(2.0) / (eps * eps)).ceil() as u32;
        let eta = eps / 2.0;
        MwuConfig {
            epsilon: eps,
            eta,
            rho: 1.0,
            t_max,
            stop: StopRule::CertificateGap,
            lambda: lift::<R>(1.0 + eps),
            max_odd_experts: 2 * lp.k_max.max(8),
            odd_period: 3,
            feasibility_rescale: R::one(),
            stall_window: ((4.0 * n.ln().max(2.0) / eta).ceil() as u32).max(128),
        }
    }

    pub fn with_t_max_scale(mut self, scale: f64) -> Self {
        if scale > 0.0 {
            self.t_max = ((self.t_max as f64) * scale).ceil().max(1.0) as u32;
        }
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1/2], got {}",
                self.epsilon
            )));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eta must lie in (0, 1), got {}",
                self.eta
            )));
        }
        if self.lambda < R::one() {
            return Err(Error::InvalidParameter("lambda must be at least 1".into()));
        }
        if self.t_max == 0 {
            return Err(Error::InvalidParameter("t_max must be positive".into()));
        }
        Ok(())
    }
}

/// The exported dual certificate with its cached objective value, in the
/// instance's original weight units.
#[derive(Debug, Clone, PartialEq)]
pub struct DualExport<S> {
    pub dual: DualSolution<S>,
    pub value: S,
}

impl<S: Scalar> DualExport<S> {
    pub fn new(dual: DualSolution<S>) -> Self {
        let value = dual.objective();
        DualExport { dual, value }
    }
}

/// Everything a solve run produces.
#[derive(Debug, Clone)]
pub struct SolveOutcome<R> {
    /// Feasible fractional matching, original weight units.
    pub x: FractionalMatching<R>,
    /// Feasible dual certificate, original weight units.
    pub dual: DualExport<R>,
    pub stats: RunStats,
}

/// Relative duality gap (dual - primal) / dual, clamped at 0.
pub fn duality_gap(primal: f64, dual: f64) -> f64 {
    if dual <= 0.0 {
        if primal <= 0.0 {
            return 0.0;
        }
        return f64::INFINITY;
    }
    ((dual - primal) / dual).max(0.0)
}

/// Checks the exported dual against every edge in one dedicated pass.
/// Coverage must reach the edge's objective weight (1 in cardinality mode)
/// up to a relative float tolerance; the first failing edge is reported.
pub fn verify_dual_feasibility<R: Real>(
    stream: &EdgeStream<R>,
    dual: &DualExport<R>,
    mode: ObjectiveMode,
    rel_tol: f64,
) -> Result<()> {
    for e in stream.begin_pass() {
        let w = match mode {
            ObjectiveMode::Cardinality => R::one(),
            ObjectiveMode::Weighted => e.w,
        };
        let cov = dual.dual.coverage(e.u, e.v);
        let slack = lift::<R>(rel_tol) * w.max(R::one());
        if cov + slack < w {
            return Err(Error::CertificateInvalid {
                u: e.u,
                v: e.v,
                lhs: cov.to_f64().unwrap_or(f64::NAN),
                required: w.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Solve
// ---------------------------------------------------------------------------

/// Best materialized feasible dual so far, in normalized weight units.
struct BestDual<R> {
    value: R,
    y: Vec<R>,
    z: Vec<(OddSet, R)>,
}

/// Charges `bytes` and remembers the total for the final release.
struct Charged<'a> {
    meter: &'a mut SpaceMeter,
    total: usize,
}

impl<'a> Charged<'a> {
    fn new(meter: &'a mut SpaceMeter) -> Self {
        Charged { meter, total: 0 }
    }

    fn charge(&mut self, bytes: usize) -> Result<()> {
        self.meter.charge(MODULE, bytes)?;
        self.total += bytes;
        Ok(())
    }

    fn free(&mut self, bytes: usize) -> Result<()> {
        self.meter.free(MODULE, bytes)?;
        self.total -= bytes;
        Ok(())
    }

    fn release_all(&mut self) -> Result<()> {
        let t = self.total;
        self.total = 0;
        self.meter.free(MODULE, t)
    }
}

/// Runs the full solver loop on the stream and returns a feasible averaged
/// fractional matching together with a stream-verified dual certificate.
pub fn solve_fractional<R: Real>(
    lp: &MatchingLp,
    stream: &EdgeStream<R>,
    cfg: &MwuConfig<R>,
    meter: &mut SpaceMeter,
) -> Result<SolveOutcome<R>> {
    cfg.validate()?;
    if stream.n() != lp.n {
        return Err(Error::InvalidParameter(format!(
            "stream has {} vertices, lp expects {}",
            stream.n(),
            lp.n
        )));
    }
    let start = Instant::now();
    let passes_at_start = stream.passes();
    let n = lp.n as usize;
    let m = stream.m();

    if m == 0 {
        let mut stats = RunStats::default();
        stats.wall_time = start.elapsed();
        stats.converged = true;
        return Ok(SolveOutcome {
            x: FractionalMatching::new(lp.n),
            dual: DualExport::new(DualSolution::vertex_only(vec![R::zero(); n])),
            stats,
        });
    }

    let mut charged = Charged::new(meter);
    let mut stats = RunStats::default();

    // ---- preliminary pass (weighted): normalization + analytic first cover
    let mut w_max = R::one();
    let mut best: BestDual<R>;
    if lp.mode == ObjectiveMode::Weighted {
        charged.charge(n * DUAL_RECORD_BYTES)?; // incident-max array
        let mut incident_max = vec![R::zero(); n];
        let mut any_positive = false;
        for e in stream.begin_pass() {
            if e.w > R::zero() {
                any_positive = true;
            }
            incident_max[e.u as usize] = incident_max[e.u as usize].max(e.w);
            incident_max[e.v as usize] = incident_max[e.v as usize].max(e.w);
            w_max = w_max.max(e.w);
        }
        stats.preliminary_passes = 1;
        if !any_positive {
            // all weights zero: the empty solution is optimal and certified
            charged.release_all()?;
            stats.passes = stream.passes() - passes_at_start;
            stats.peak_bytes = meter.peak_bytes();
            stats.wall_time = start.elapsed();
            stats.converged = true;
            return Ok(SolveOutcome {
                x: FractionalMatching::new(lp.n),
                dual: DualExport::new(DualSolution::vertex_only(vec![R::zero(); n])),
                stats,
            });
        }
        // half the max incident weight covers every edge; normalized units
        let half = lift::<R>(0.5);
        let y: Vec<R> = incident_max.iter().map(|&w| w / w_max * half).collect();
        let value = y.iter().fold(R::zero(), |a, &b| a + b);
        best = BestDual { value, y, z: Vec::new() };
    } else {
        // trivial cover: 1/2 everywhere, value n/2
        let half = lift::<R>(0.5);
        best = BestDual { value: lift::<R>(n as f64 / 2.0), y: vec![half; n], z: Vec::new() };
    }
    charged.charge(n * DUAL_RECORD_BYTES)?; // best.y

    // ---- metered working state
    let mut duals = DualState::<R>::new(lp.n);
    charged.charge(n * DUAL_RECORD_BYTES)?;
    let mut sum_vertex = vec![R::zero(); n];
    charged.charge(n * DUAL_RECORD_BYTES)?;
    let mut sum_odd: Vec<R> = Vec::new();
    let mut matched = vec![false; n];
    charged.charge(n)?;
    // oracle result buffer and the best single matching are each at most
    // n/2 edges
    charged.charge(2 * (n / 2 + 1) * EDGE_RECORD_BYTES)?;
    let mut m1_flags: Option<Vec<bool>> = None;
    let mut m1_size = 0usize;

    // support accumulator, capped so dense instances stay under m/10
    // records at peak; prunes account their lost mass exactly
    let mut counts: BTreeMap<(u32, u32), (u32, R)> = BTreeMap::new();
    let fixed_bytes = charged.total + n; // headroom for m1 flags
    // the map's share of the m/10 regime covers the permanent record, the
    // averaging scratch alive during odd-set discovery, the experts
    // themselves, and one pass of growth before the prune runs
    let (per_entry, expert_headroom) = match lp.class {
        GraphClass::General => (
            COUNT_RECORD_BYTES + 24,
            cfg.max_odd_experts * (3 * DUAL_RECORD_BYTES + 4 * lp.k_max),
        ),
        _ => (COUNT_RECORD_BYTES, 0),
    };
    let share = (16 * m / 10).saturating_sub(fixed_bytes + expert_headroom);
    let map_cap = if m >= 50 * n {
        (share / per_entry).saturating_sub(n / 2 + 1).max(8)
    } else {
        // sparse regime: the m/10 claim is off, keep enough support to
        // average well (the global budget still binds)
        (share / per_entry).max(2 * n)
    };
    let mut lost_value = R::zero();

    let mut scale = lift::<R>(n as f64 / 2.0).min(best.value); // dual-value estimate
    let rule = match lp.mode {
        ObjectiveMode::Cardinality => AdmissibilityRule::cardinality(cfg.lambda),
        ObjectiveMode::Weighted => AdmissibilityRule::weighted(cfg.lambda, cfg.epsilon, lp.n),
    };

    let mut t_nonempty: u32 = 0;
    let mut sum_value = R::zero(); // sum of matched normalized values
    let mut best_single: Vec<Edge<R>> = Vec::new();
    let mut best_single_value = R::zero();
    let eta = lift::<R>(cfg.eta);
    // dropped weight classes have true weight under eps/n, so an absolute
    // per-vertex bump of eps/(2n) restores coverage at objective cost eps/2
    let bump_total = match lp.mode {
        ObjectiveMode::Weighted => cfg.epsilon / 2.0,
        ObjectiveMode::Cardinality => 0.0,
    };
    let mut converged = false;
    let unit_mode = lp.mode == ObjectiveMode::Cardinality;
    let mut best_gap = f64::INFINITY;
    let mut last_improvement: u32 = 0;

    for _ in 0..cfg.t_max {
        stats.iterations += 1;
        let t_prev = t_nonempty; // distributions summed over prior passes
        let pricing = Pricing { duals: &duals, scale };

        // per-candidate max of w_e / price_c(e); index 0 current, 1 average,
        // 2 first-matching cover
        let mut ratio = [R::zero(); 3];
        let inv_wmax = R::one() / w_max;
        let result = {
            let duals_ref = &duals;
            let sum_vertex_ref = &sum_vertex;
            let sum_odd_ref = &sum_odd;
            let m1_ref = &m1_flags;
            greedy_pass(stream.begin_pass(), &pricing, &rule, &mut matched, |e, rounded| {
                if rounded.is_none() {
                    // dropped weight class; covered by the export bump
                    return;
                }
                let wn = if unit_mode { R::one() } else { e.w * inv_wmax };
                let (u, v) = (e.u as usize, e.v as usize);
                // current distribution
                let mut price = duals_ref.p_vertex(e.u) + duals_ref.p_vertex(e.v);
                for (i, (set, _)) in duals_ref.odd_sets().iter().enumerate() {
                    if set.contains_edge(e.u, e.v) {
                        price = price
                            + duals_ref.p_odd(i) / lift::<R>(set.capacity() as f64);
                    }
                }
                ratio[0] = ratio[0].max(wn / price);
                // running average distribution
                if t_prev > 0 {
                    let tp = lift::<R>(t_prev as f64);
                    let mut price = (sum_vertex_ref[u] + sum_vertex_ref[v]) / tp;
                    for (i, (set, _)) in duals_ref.odd_sets().iter().enumerate() {
                        if set.contains_edge(e.u, e.v) {
                            price = price
                                + sum_odd_ref[i] / tp / lift::<R>(set.capacity() as f64);
                        }
                    }
                    ratio[1] = ratio[1].max(wn / price);
                }
                // first-matching cover
                if let Some(flags) = m1_ref {
                    let hits = flags[u] as u32 + flags[v] as u32;
                    if hits == 0 {
                        ratio[2] = lift::<R>(f64::INFINITY);
                    } else {
                        let price =
                            lift::<R>(hits as f64) / lift::<R>(2.0 * m1_size as f64);
                        ratio[2] = ratio[2].max(wn / price);
                    }
                }
            })
        };

        // candidate with the least certified dual value wins
        for (idx, &r) in ratio.iter().enumerate() {
            if !(r > R::zero()) || !r.is_finite() || r >= best.value {
                continue;
            }
            best.value = r;
            match idx {
                0 => {
                    for v in 0..n {
                        best.y[v] = r * duals.p_vertex(v as u32);
                    }
                    best.z.clear();
                    for i in 0..duals.odd_sets().len() {
                        let (set, _) = &duals.odd_sets()[i];
                        let cap = lift::<R>(set.capacity() as f64);
                        best.z.push((set.clone(), r * duals.p_odd(i) / cap));
                    }
                }
                1 => {
                    let tp = lift::<R>(t_prev as f64);
                    for v in 0..n {
                        best.y[v] = r * sum_vertex[v] / tp;
                    }
                    best.z.clear();
                    for (i, (set, _)) in duals.odd_sets().iter().enumerate() {
                        let cap = lift::<R>(set.capacity() as f64);
                        best.z.push((set.clone(), r * sum_odd[i] / tp / cap));
                    }
                }
                _ => {
                    let flags = m1_flags.as_ref().unwrap();
                    let unit = r / lift::<R>(2.0 * m1_size as f64);
                    for v in 0..n {
                        best.y[v] = if flags[v] { unit } else { R::zero() };
                    }
                    best.z.clear();
                }
            }
        }
        scale = scale.min(best.value);

        if !result.is_empty() {
            // accumulate the distribution that produced this matching
            for v in 0..n {
                sum_vertex[v] = sum_vertex[v] + duals.p_vertex(v as u32);
            }
            for i in 0..duals.odd_sets().len() {
                sum_odd[i] = sum_odd[i] + duals.p_odd(i);
            }
            t_nonempty += 1;

            // defensive width check: per-expert loads must stay within rho
            let mut odd_load = vec![0u32; duals.odd_sets().len()];
            for e in &result.edges {
                for (i, (set, _)) in duals.odd_sets().iter().enumerate() {
                    if set.contains_edge(e.u, e.v) {
                        odd_load[i] += 1;
                    }
                }
            }
            for (i, (set, _)) in duals.odd_sets().iter().enumerate() {
                let load = odd_load[i] as f64 / set.capacity() as f64;
                if load > cfg.rho + 1e-9 {
                    return Err(Error::WidthViolation {
                        oracle: "greedy",
                        load,
                        rho: cfg.rho,
                    });
                }
            }

            // support accumulation in normalized units
            let mut pass_value = R::zero();
            for e in &result.edges {
                let wn = if unit_mode { R::one() } else { e.w * inv_wmax };
                pass_value = pass_value + wn;
                let entry = counts.entry(e.key()).or_insert((0, wn));
                if entry.0 == 0 {
                    charged.charge(COUNT_RECORD_BYTES)?;
                }
                entry.0 += 1;
            }
            sum_value = sum_value + pass_value;
            if pass_value > best_single_value {
                best_single_value = pass_value;
                best_single = result.edges.clone();
            }
            if m1_flags.is_none() {
                charged.charge(n)?;
                m1_flags = Some(matched.clone());
                m1_size = result.len();
            }

            // multiplicative update on loaded experts
            let eta_one = R::one() + eta;
            let matched_ref = &matched;
            duals.rescale(
                |v| if matched_ref[v as usize] { eta_one } else { R::one() },
                |i, set| {
                    let load = lift::<R>(odd_load[i] as f64 / set.capacity() as f64);
                    R::one() + eta * load
                },
            );
            if duals.total() > lift::<R>(1e100) {
                duals.renormalize();
            }

            // prune the support map if it outgrew its share
            if counts.len() > map_cap {
                let target = map_cap * 7 / 8;
                let mut by_count: Vec<(u32, (u32, u32))> =
                    counts.iter().map(|(&k, &(c, _))| (c, k)).collect();
                by_count.sort_unstable();
                let drop = counts.len() - target;
                for &(_, key) in by_count.iter().take(drop) {
                    let (c, w) = counts.remove(&key).unwrap();
                    lost_value = lost_value + lift::<R>(c as f64) * w;
                    charged.free(COUNT_RECORD_BYTES)?;
                }
            }

            // odd-set discovery on the running average (general class only)
            if lp.class == GraphClass::General
                && stats.iterations % cfg.odd_period.max(1) == 0
                && duals.odd_sets().len() < cfg.max_odd_experts
            {
                let scratch = 24 * counts.len();
                charged.charge(scratch)?;
                let xbar = materialize_average(&counts, lp.n, t_nonempty);
                let slack = lift::<R>(cfg.epsilon);
                let room = cfg.max_odd_experts - duals.odd_sets().len();
                let found = find_odd_sets(&xbar, lp.k_max, slack, room);
                drop(xbar);
                charged.free(scratch)?;
                for (set, _) in found {
                    let members = set.len();
                    let before = duals.odd_sets().len();
                    duals.add_odd_set(set);
                    if duals.odd_sets().len() > before {
                        // expert weight, distribution sum, and member list
                        charged.charge(3 * DUAL_RECORD_BYTES + 4 * members)?;
                        sum_odd.push(R::zero());
                    }
                }
            }
        }

        // stop rule: primal candidate vs. the bumped certified dual
        let avg_value = if t_nonempty > 0 {
            ((sum_value - lost_value) / lift::<R>(t_nonempty as f64))
                .to_f64()
                .unwrap_or(0.0)
        } else {
            0.0
        };
        let primal = avg_value.max(best_single_value.to_f64().unwrap_or(0.0));
        let dual_val = best.value.to_f64().unwrap_or(f64::INFINITY) + bump_total;
        let gap = duality_gap(primal, dual_val);
        if cfg.stop == StopRule::CertificateGap && gap <= cfg.epsilon {
            converged = true;
            break;
        }
        // plateau detection: certified gap stopped moving, further passes
        // cannot change the exported pair materially
        if gap < best_gap - 1e-7 {
            best_gap = gap;
            last_improvement = stats.iterations;
        } else if cfg.stop == StopRule::CertificateGap
            && cfg.stall_window > 0
            && stats.iterations - last_improvement >= cfg.stall_window
        {
            break;
        }
    }
    if cfg.stop == StopRule::FixedIterations {
        converged = true;
    }

    // ---- export: pick the better primal, rescale to original units
    let avg_value = if t_nonempty > 0 {
        (sum_value - lost_value) / lift::<R>(t_nonempty as f64)
    } else {
        R::zero()
    };
    let mut x = FractionalMatching::new(lp.n);
    if t_nonempty > 0 && avg_value >= best_single_value {
        let tn = lift::<R>(t_nonempty as f64);
        for (&(u, v), &(c, wn)) in &counts {
            let mass = lift::<R>(c as f64) / tn * cfg.feasibility_rescale;
            x.set(u, v, mass, wn * w_max);
        }
    } else {
        for e in &best_single {
            let w = if unit_mode { R::one() } else { e.w };
            x.set(e.u, e.v, cfg.feasibility_rescale, w);
        }
    }

    // dual export: bump covers dropped weight classes, then unnormalize
    let bump = lift::<R>(cfg.epsilon / (2.0 * n as f64));
    let y: Vec<R> = best
        .y
        .iter()
        .map(|&yv| {
            let b = if lp.mode == ObjectiveMode::Weighted { bump } else { R::zero() };
            (yv + b) * w_max
        })
        .collect();
    let z: Vec<(OddSet, R)> =
        best.z.iter().map(|(s, zv)| (s.clone(), *zv * w_max)).collect();
    let dual = DualExport::new(DualSolution { y, z });

    // ---- dedicated verification pass on the exported pair
    verify_dual_feasibility(stream, &dual, lp.mode, 1e-9)?;
    stats.certificate_passes = 1;
    stats.certificate_gap = duality_gap(
        x.value().to_f64().unwrap_or(0.0),
        dual.value.to_f64().unwrap_or(f64::INFINITY),
    );
    stats.converged = converged;
    stats.best_iterate_value = (best_single_value * w_max).to_f64().unwrap_or(0.0);

    charged.release_all()?;
    stats.passes = stream.passes() - passes_at_start;
    debug_assert_eq!(
        stats.passes,
        stats.iterations + stats.preliminary_passes + stats.certificate_passes
    );
    stats.peak_bytes = meter.peak_bytes();
    stats.wall_time = start.elapsed();
    Ok(SolveOutcome { x, dual, stats })
}

fn materialize_average<R: Real>(
    counts: &BTreeMap<(u32, u32), (u32, R)>,
    n: u32,
    t_nonempty: u32,
) -> FractionalMatching<R> {
    let mut x = FractionalMatching::new(n);
    let tn = lift::<R>(t_nonempty.max(1) as f64);
    for (&(u, v), &(c, wn)) in counts {
        x.set(u, v, lift::<R>(c as f64) / tn, wn);
    }
    x
}

// ---------------------------------------------------------------------------
// Dual serialization
// ---------------------------------------------------------------------------

/// Writes `dual <n> <ky> <kz>`, then `v <id> <y>` lines for nonzero vertex
/// potentials and `s <z> <id...>` lines for odd-set charges.
pub fn write_dual<S: Scalar>(path: &Path, n: u32, dual: &DualExport<S>) -> Result<()> {
    use std::fmt::Write as _;
    let mut body = String::new();
    let nonzero: Vec<(usize, f64)> = dual
        .dual
        .y
        .iter()
        .enumerate()
        .filter_map(|(i, &y)| {
            let f = y.to_f64().unwrap_or(f64::NAN);
            (f != 0.0).then_some((i, f))
        })
        .collect();
    let _ = writeln!(body, "dual {} {} {}", n, nonzero.len(), dual.dual.z.len());
    for (i, y) in nonzero {
        let _ = writeln!(body, "v {i} {y}");
    }
    for (set, z) in &dual.dual.z {
        let _ = write!(body, "s {}", z.to_f64().unwrap_or(f64::NAN));
        for &v in set.members() {
            let _ = write!(body, " {v}");
        }
        let _ = writeln!(body);
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

/// Reads the format written by [`write_dual`].
pub fn parse_dual<S: Scalar>(path: &Path) -> Result<(u32, DualExport<S>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut header: Option<(u32, usize, usize)> = None;
    let mut y: Vec<S> = Vec::new();
    let mut z: Vec<(OddSet, S)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if header.is_none() {
            if toks.len() != 4 || toks[0] != "dual" {
                return Err(Error::parse(path, lineno, "expected 'dual <n> <ky> <kz>'"));
            }
            let n: u32 = toks[1]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad vertex count"))?;
            let ky: usize = toks[2]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad count"))?;
            let kz: usize = toks[3]
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad count"))?;
            header = Some((n, ky, kz));
            y = vec![S::zero(); n as usize];
            continue;
        }
        let (n, _, _) = header.unwrap();
        match toks[0] {
            "v" => {
                if toks.len() != 3 {
                    return Err(Error::parse(path, lineno, "expected 'v <id> <y>'"));
                }
                let i: u32 = toks[1]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad vertex id"))?;
                if i >= n {
                    return Err(Error::parse(path, lineno, "vertex id out of range"));
                }
                let val: f64 = toks[2]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad potential"))?;
                y[i as usize] =
                    S::from_f64(val).ok_or_else(|| Error::parse(path, lineno, "bad potential"))?;
            }
            "s" => {
                if toks.len() < 5 {
                    return Err(Error::parse(path, lineno, "expected 's <z> <id...>'"));
                }
                let zv: f64 = toks[1]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad charge"))?;
                let mut members = Vec::new();
                for s in &toks[2..] {
                    let v: u32 = s
                        .parse()
                        .map_err(|_| Error::parse(path, lineno, "bad vertex id"))?;
                    if v >= n {
                        return Err(Error::parse(path, lineno, "vertex id out of range"));
                    }
                    members.push(v);
                }
                let set = OddSet::new(members)
                    .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
                let zs = S::from_f64(zv)
                    .ok_or_else(|| Error::parse(path, lineno, "bad charge"))?;
                z.push((set, zs));
            }
            other => {
                return Err(Error::parse(path, lineno, format!("unknown line tag '{other}'")));
            }
        }
    }
    let (n, ky, kz) = header.ok_or_else(|| Error::parse(path, 0, "missing header"))?;
    let have_y = y.iter().filter(|&&v| v != S::zero()).count();
    if have_y != ky || z.len() != kz {
        return Err(Error::parse(path, 0, "record counts do not match header"));
    }
    Ok((n, DualExport::new(DualSolution { y, z })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::check_feasible;
    use crate::stream::{EdgeOrder, GenSpec};

    fn unit_stream(n: u32, pairs: &[(u32, u32)], left: Option<u32>) -> EdgeStream<f64> {
        let edges = pairs.iter().map(|&(u, v)| Edge::unit(u, v)).collect();
        EdgeStream::from_edges(n, edges, left).unwrap()
    }

    fn solve_card(
        stream: &EdgeStream<f64>,
        class: GraphClass,
        eps: f64,
    ) -> SolveOutcome<f64> {
        let lp = MatchingLp::new(stream.n(), class, ObjectiveMode::Cardinality, eps).unwrap();
        let cfg = MwuConfig::for_lp(&lp);
        let mut meter = SpaceMeter::with_default_budget(stream.n(), eps);
        solve_fractional(&lp, stream, &cfg, &mut meter).unwrap()
    }

    #[test]
    fn single_edge_certifies_immediately() {
        let s = unit_stream(2, &[(0, 1)], Some(1));
        let out = solve_card(&s, GraphClass::Bipartite { left: Some(1) }, 0.1);
        assert!(out.stats.converged);
        assert!(out.stats.certificate_gap <= 0.1 + 1e-12);
        assert!(out.x.value() >= 0.9);
        assert!(out.dual.value >= 1.0 - 1e-9);
        assert_eq!(
            out.stats.passes,
            out.stats.iterations + out.stats.preliminary_passes + out.stats.certificate_passes
        );
    }

    #[test]
    fn path_of_three_vertices_has_value_one() {
        let s = unit_stream(3, &[(0, 1), (1, 2)], None);
        let out = solve_card(&s, GraphClass::General, 0.1);
        assert!(out.stats.converged);
        // LP optimum is 1: the middle vertex caps both edges
        assert!(out.x.value() >= 0.9 && out.x.value() <= 1.0 + 1e-9);
        assert!(out.dual.value <= 1.0 / 0.9 + 1e-9);
    }

    #[test]
    fn empty_graph_is_trivially_solved() {
        let s = unit_stream(4, &[], None);
        let out = solve_card(&s, GraphClass::General, 0.25);
        assert!(out.stats.converged);
        assert_eq!(out.stats.passes, 0);
        assert!(out.x.is_empty());
        assert_eq!(out.dual.value, 0.0);
    }

    #[test]
    fn zero_weights_short_circuit() {
        let edges = vec![Edge::new(0, 1, 0.0), Edge::new(2, 3, 0.0)];
        let s = EdgeStream::from_edges(4, edges, None).unwrap();
        let lp = MatchingLp::general(4, ObjectiveMode::Weighted, 0.2).unwrap();
        let cfg = MwuConfig::for_lp(&lp);
        let mut meter = SpaceMeter::with_default_budget(4, 0.2);
        let out = solve_fractional(&lp, &s, &cfg, &mut meter).unwrap();
        assert!(out.stats.converged);
        assert_eq!(out.stats.passes, 1); // just the normalization pass
        assert!(out.x.is_empty());
    }

    #[test]
    fn triangle_odd_set_pulls_dual_to_one() {
        let s = unit_stream(3, &[(0, 1), (1, 2), (0, 2)], None);
        let out = solve_card(&s, GraphClass::General, 0.2);
        // with the odd-set constraint the LP optimum is 1, not 3/2
        assert!(out.stats.converged, "stats: {:?}", out.stats);
        assert!(out.x.value() <= 1.0 + 1e-9);
        assert!(out.x.value() >= 0.8 - 1e-9);
        assert!(out.dual.value <= 1.0 / 0.8 + 1e-9, "dual {}", out.dual.value);
        assert!(!out.dual.dual.z.is_empty(), "expected an odd-set charge");
    }

    #[test]
    fn five_cycle_caps_at_two() {
        let s = unit_stream(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], None);
        let out = solve_card(&s, GraphClass::General, 0.2);
        assert!(out.stats.converged);
        assert!(out.x.value() >= 2.0 * 0.8 - 1e-9);
        assert!(out.x.value() <= 2.0 + 1e-9);
        assert!(out.dual.value <= 2.0 / 0.8 + 1e-9);
    }

    #[test]
    fn averaged_solution_is_lp_feasible() {
        let spec = GenSpec::parse("random-bipartite:n=40,l=20,p=0.3,seed=7").unwrap();
        let s: EdgeStream<f64> = EdgeStream::from_generator(spec, EdgeOrder::Identity).unwrap();
        let out = solve_card(&s, GraphClass::Bipartite { left: Some(20) }, 0.1);
        let lp = MatchingLp::bipartite(40, Some(20), ObjectiveMode::Cardinality, 0.1).unwrap();
        let viol = check_feasible(&lp, &out.x, 1e-9);
        assert!(viol.is_empty(), "violations: {viol:?}");
    }


    #[test]
    fn adversarial_block_order_recovers_optimum() {
        // dense block a-b first tricks greedy into half the optimum; the
        // solver must price it out and recover the a-c / d-b edges
        let spec = GenSpec::parse("hard-layered:k=8").unwrap();
        let s: EdgeStream<f64> = EdgeStream::from_generator(spec, EdgeOrder::Identity).unwrap();
        let out = solve_card(&s, GraphClass::Bipartite { left: None }, 0.1);
        assert!(out.stats.converged, "stats: {:?}", out.stats);
        assert!(out.x.value() >= 0.9 * 16.0 - 1e-9, "got {}", out.x.value());
    }



    #[test]
    fn pass_budget_never_exceeds_cap_plus_overhead() {
        let spec = GenSpec::parse("random-bipartite:n=50,l=25,p=0.2,seed=3").unwrap();
        let s: EdgeStream<f64> = EdgeStream::from_generator(spec, EdgeOrder::Identity).unwrap();
        let lp = MatchingLp::bipartite(50, Some(25), ObjectiveMode::Cardinality, 0.1).unwrap();
        let cfg = MwuConfig::for_lp(&lp);
        let mut meter = SpaceMeter::with_default_budget(50, 0.1);
        let out = solve_fractional(&lp, &s, &cfg, &mut meter).unwrap();
        assert!(out.stats.iterations <= cfg.t_max);
        assert_eq!(
            out.stats.passes,
            out.stats.iterations + out.stats.preliminary_passes + out.stats.certificate_passes
        );
        assert_eq!(s.passes(), out.stats.passes);
    }

    #[test]
    fn fixed_iteration_mode_runs_exactly_t_max() {
        let s = unit_stream(4, &[(0, 2), (1, 3), (0, 3)], Some(2));
        let lp = MatchingLp::bipartite(4, Some(2), ObjectiveMode::Cardinality, 0.2).unwrap();
        let mut cfg = MwuConfig::for_lp(&lp);
        cfg.stop = StopRule::FixedIterations;
        cfg.t_max = 7;
        let mut meter = SpaceMeter::with_default_budget(4, 0.2);
        let out = solve_fractional(&lp, &s, &cfg, &mut meter).unwrap();
        assert_eq!(out.stats.iterations, 7);
        assert!(out.stats.converged);
    }

    #[test]
    fn budget_too_small_reports_module() {
        let s = unit_stream(4, &[(0, 2), (1, 3)], Some(2));
        let lp = MatchingLp::bipartite(4, Some(2), ObjectiveMode::Cardinality, 0.2).unwrap();
        let cfg = MwuConfig::for_lp(&lp);
        let mut meter = SpaceMeter::new(16);
        let err = solve_fractional(&lp, &s, &cfg, &mut meter).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { module: "mwu", .. }), "{err}");
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let s = unit_stream(3, &[(0, 1), (1, 2)], None);
        let out = solve_card(&s, GraphClass::General, 0.2);
        let mut bad = out.dual.clone();
        bad.dual.y[1] = 0.0; // the middle vertex carries the cover
        let err = verify_dual_feasibility(&s, &bad, ObjectiveMode::Cardinality, 1e-9);
        assert!(matches!(err, Err(Error::CertificateInvalid { .. })));
        // the untampered export passes
        verify_dual_feasibility(&s, &out.dual, ObjectiveMode::Cardinality, 1e-9).unwrap();
    }

    #[test]
    fn dual_serialization_round_trips() {
        let s = unit_stream(3, &[(0, 1), (1, 2), (0, 2)], None);
        let out = solve_card(&s, GraphClass::General, 0.2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cert.dual");
        write_dual(&path, 3, &out.dual).unwrap();
        let (n, parsed) = parse_dual::<f64>(&path).unwrap();
        assert_eq!(n, 3);
        assert_eq!(parsed.dual.z.len(), out.dual.dual.z.len());
        for (a, b) in parsed.dual.y.iter().zip(out.dual.dual.y.iter()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        assert!((parsed.value - out.dual.value).abs() <= 1e-9);
    }

    #[test]
    fn duality_gap_edge_cases() {
        assert_eq!(duality_gap(0.0, 0.0), 0.0);
        assert_eq!(duality_gap(1.0, 0.0), f64::INFINITY);
        assert_eq!(duality_gap(2.0, 2.0), 0.0);
        assert!((duality_gap(1.8, 2.0) - 0.1).abs() < 1e-12);
        // primal above dual from float noise clamps to zero
        assert_eq!(duality_gap(2.0 + 1e-15, 2.0), 0.0);
    }

    #[test]
    fn stream_order_does_not_break_convergence() {
        for order in ["sorted", "seed:5", "interleaved"] {
            let spec = GenSpec::parse("random-bipartite:n=40,l=20,p=0.2,seed=9").unwrap();
            let s: EdgeStream<f64> =
                EdgeStream::from_generator(spec, EdgeOrder::parse(order).unwrap()).unwrap();
            let out = solve_card(&s, GraphClass::Bipartite { left: Some(20) }, 0.1);
            assert!(out.stats.converged, "order {order}");
            assert!(out.stats.certificate_gap <= 0.1 + 1e-9, "order {order}");
        }
    }
}
