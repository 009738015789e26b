//! Shared run plumbing: flag resolution, the end-to-end pipeline
//! (solve, round, verify), exact baselines, and the benchmark CSV schema.

use std::collections::HashSet;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;

use matchstream_baselines as baselines;
use matchstream_core::lp::{GraphClass, MatchingLp, ObjectiveMode};
use matchstream_core::mwu::{duality_gap, solve_fractional, verify_dual_feasibility, StopRule};
use matchstream_core::round::{default_support_threshold, round_bipartite, round_general};
use matchstream_core::stream::SpaceMeter;
use matchstream_core::{EdgeStream, Matching, MwuConfig, SolveOutcome};

/// Objective selector shared by the CLI flags and the bench config.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Card,
    Weighted,
}

/// Constraint family selector.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    Bipartite,
    General,
}

/// Oracle family; each choice implies the mode or class it serves.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Greedy,
    Weighted,
    General,
}

/// Stop rule selector.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StopArg {
    Fixed,
    Gap,
}

impl From<StopArg> for StopRule {
    fn from(s: StopArg) -> StopRule {
        match s {
            StopArg::Fixed => StopRule::FixedIterations,
            StopArg::Gap => StopRule::CertificateGap,
        }
    }
}

/// Raised by checks whose failure must exit with code 3.
#[derive(Debug)]
pub struct VerificationFailure(pub String);

impl std::fmt::Display for VerificationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailure {}

pub fn mode_str(mode: ObjectiveMode) -> &'static str {
    match mode {
        ObjectiveMode::Cardinality => "card",
        ObjectiveMode::Weighted => "weighted",
    }
}

pub fn class_str(class: GraphClass) -> &'static str {
    match class {
        GraphClass::Bipartite { .. } => "bipartite",
        GraphClass::General => "general",
    }
}

/// Resolves the LP mode and class from the flag set. Explicit flags win,
/// the oracle choice fills in what it implies, and the stream header breaks
/// the remaining class tie.
pub fn resolve_problem(
    mode: Option<ModeArg>,
    class: Option<ClassArg>,
    oracle: Option<OracleArg>,
    header_left: Option<u32>,
) -> Result<(ObjectiveMode, GraphClass)> {
    if oracle == Some(OracleArg::Greedy) && mode == Some(ModeArg::Weighted) {
        bail!("--oracle greedy runs the unit-weight oracle and conflicts with --mode weighted");
    }
    if oracle == Some(OracleArg::Weighted) && mode == Some(ModeArg::Card) {
        bail!("--oracle weighted conflicts with --mode card");
    }
    if oracle == Some(OracleArg::General) && class == Some(ClassArg::Bipartite) {
        bail!("--oracle general tracks odd sets and conflicts with --class bipartite");
    }
    let mode = match (mode, oracle) {
        (Some(ModeArg::Card), _) => ObjectiveMode::Cardinality,
        (Some(ModeArg::Weighted), _) => ObjectiveMode::Weighted,
        (None, Some(OracleArg::Weighted)) => ObjectiveMode::Weighted,
        (None, _) => ObjectiveMode::Cardinality,
    };
    let class = match (class, oracle) {
        (Some(ClassArg::Bipartite), _) => GraphClass::Bipartite { left: header_left },
        (Some(ClassArg::General), _) => GraphClass::General,
        (None, Some(OracleArg::General)) => GraphClass::General,
        (None, _) => {
            if header_left.is_some() {
                GraphClass::Bipartite { left: header_left }
            } else {
                GraphClass::General
            }
        }
    };
    Ok((mode, class))
}

/// Knobs shared by `solve` and every bench run.
#[derive(Clone, Debug)]
pub struct RunSettings {
    pub epsilon: f64,
    pub mode: Option<ModeArg>,
    pub class: Option<ClassArg>,
    pub oracle: Option<OracleArg>,
    pub stop: StopArg,
    pub tmax_scale: f64,
    pub budget_bytes: Option<usize>,
}

pub fn make_meter(n: u32, epsilon: f64, budget_bytes: Option<usize>) -> SpaceMeter {
    match budget_bytes {
        Some(b) => SpaceMeter::new(b),
        None => SpaceMeter::with_default_budget(n, epsilon),
    }
}

/// Solves one open stream and returns the outcome with the resolved problem.
pub fn solve_stream(
    stream: &EdgeStream,
    s: &RunSettings,
) -> Result<(SolveOutcome, ObjectiveMode, GraphClass)> {
    let (mode, class) = resolve_problem(s.mode, s.class, s.oracle, stream.bipartite_left())?;
    let lp = MatchingLp::new(stream.n(), class, mode, s.epsilon)?;
    let mut cfg = MwuConfig::for_lp(&lp).with_t_max_scale(s.tmax_scale);
    cfg.stop = s.stop.into();
    let mut meter = make_meter(stream.n(), s.epsilon, s.budget_bytes);
    let outcome = solve_fractional(&lp, stream, &cfg, &mut meter)?;
    Ok((outcome, mode, class))
}

/// Everything one end-to-end run produces.
pub struct RunOutput {
    pub outcome: SolveOutcome,
    pub matching: Matching,
    pub mode: ObjectiveMode,
    pub class: GraphClass,
    /// Rounded objective: size in cardinality mode, weight in weighted mode.
    pub objective: f64,
    /// Relative duality gap recomputed from the exported pair.
    pub gap: f64,
    /// Pipeline wall time, excluding any baseline computation.
    pub wall_ms: f64,
}

/// Full pipeline on an open stream: solve, round, then re-check the matching
/// membership, the dual certificate, and the gap against the stream.
pub fn run_pipeline(stream: &EdgeStream, s: &RunSettings) -> Result<RunOutput> {
    let t0 = Instant::now();
    let (outcome, mode, class) = solve_stream(stream, s)?;
    let tau = default_support_threshold(stream.n(), s.epsilon);
    let matching = match class {
        GraphClass::Bipartite { .. } => round_bipartite(&outcome.x, tau)?,
        GraphClass::General => round_general(&outcome.x, tau)?,
    };
    if !verify_matching_stream(stream, &matching)? {
        return Err(
            VerificationFailure("matching uses edges absent from the stream".into()).into(),
        );
    }
    verify_dual_feasibility(stream, &outcome.dual, mode, 1e-9)?;
    let objective = match mode {
        ObjectiveMode::Cardinality => matching.len() as f64,
        ObjectiveMode::Weighted => matching.weight(),
    };
    let gap = duality_gap(outcome.x.value(), outcome.dual.value);
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    Ok(RunOutput { outcome, matching, mode, class, objective, gap, wall_ms })
}

/// One extra pass checking that every matching edge is a genuine stream
/// edge; vertex-disjointness is validated in memory first.
pub fn verify_matching_stream(stream: &EdgeStream, m: &Matching) -> Result<bool> {
    m.validate()?;
    let mut missing: HashSet<(u32, u32)> =
        m.edges().iter().map(|&(u, v, _)| (u.min(v), u.max(v))).collect();
    for e in stream.begin_pass() {
        missing.remove(&e.key());
    }
    Ok(missing.is_empty())
}

/// Exact reference optimum when the instance is small enough, else None.
/// Bipartite cardinality uses augmenting paths, bipartite weights exact
/// potentials, general graphs exhaustive search (tiny caps enforced there).
pub fn baseline_opt(stream: &EdgeStream, mode: ObjectiveMode, class: GraphClass) -> Option<f64> {
    let n = stream.n() as usize;
    let m = stream.m();
    let g = baselines::Graph::from_stream(stream);
    match (class, mode) {
        (GraphClass::Bipartite { .. }, ObjectiveMode::Cardinality) => {
            if n > 20_000 || m > 2_000_000 {
                return None;
            }
            baselines::maximum_bipartite_matching(&g).ok().map(|m| m.len() as f64)
        }
        (GraphClass::Bipartite { .. }, ObjectiveMode::Weighted) => {
            if n > 2_000 || m > 400_000 {
                return None;
            }
            baselines::max_weight_bipartite_matching(&g).ok().map(|m| m.weight())
        }
        (GraphClass::General, ObjectiveMode::Cardinality) => {
            baselines::brute_force_max_matching(&g).ok().map(|m| m.len() as f64)
        }
        (GraphClass::General, ObjectiveMode::Weighted) => {
            baselines::brute_force_max_weight_matching(&g).ok().map(|m| m.weight())
        }
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "instance",
    "epsilon",
    "order_seed",
    "lp_value_fractional",
    "matching_size",
    "baseline_opt",
    "ratio",
    "passes",
    "iterations",
    "peak_bytes",
    "gap",
    "wall_ms",
    "error",
];

/// One benchmark CSV row; empty fields mean "not applicable".
#[derive(Clone, Debug, Default)]
pub struct BenchRow {
    pub instance: String,
    pub epsilon: f64,
    pub order_seed: String,
    pub lp_value_fractional: Option<f64>,
    pub matching_size: Option<f64>,
    pub baseline_opt: Option<f64>,
    pub ratio: Option<f64>,
    pub passes: Option<u32>,
    pub iterations: Option<u32>,
    pub peak_bytes: Option<usize>,
    pub gap: Option<f64>,
    pub wall_ms: Option<f64>,
    pub error: String,
}

impl BenchRow {
    pub fn record(&self) -> Vec<String> {
        fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map(|x| x.to_string()).unwrap_or_default()
        }
        vec![
            self.instance.clone(),
            self.epsilon.to_string(),
            self.order_seed.clone(),
            opt(&self.lp_value_fractional),
            opt(&self.matching_size),
            opt(&self.baseline_opt),
            opt(&self.ratio),
            opt(&self.passes),
            opt(&self.iterations),
            opt(&self.peak_bytes),
            opt(&self.gap),
            self.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default(),
            self.error.clone(),
        ]
    }
}

/// Appends a row to a benchmark-schema CSV, writing the header first when
/// the file is new or empty.
pub fn append_stats_row(path: &Path, row: &BenchRow) -> Result<()> {
    let need_header = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    if need_header {
        w.write_record(CSV_HEADER)?;
    }
    w.write_record(row.record())?;
    w.flush()?;
    Ok(())
}
