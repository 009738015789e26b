//! `matchstream`: generate, solve, round, verify, benchmark, and report on
//! semi-streaming maximum matching instances.
//!
//! Every verb reads and writes the plain-text formats the library defines
//! (edge lists, fractional solutions, matchings, dual certificates), so each
//! pipeline stage is independently scriptable. Exit codes: 0 success, 2 on
//! space-budget or oracle-width violations, 3 on verification failure.

mod bench;
mod run;

use std::collections::HashSet;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use matchstream_core::error::Error as CoreError;
use matchstream_core::lp::{
    check_feasible, parse_fractional, parse_matching, write_fractional, write_matching,
    GraphClass, MatchingLp,
};
use matchstream_core::mwu::{duality_gap, parse_dual, verify_dual_feasibility, write_dual};
use matchstream_core::round::{default_support_threshold, round_bipartite, round_general};
use matchstream_core::stream::{generate_to_file, open_edge_stream_ordered, EdgeOrder, GenSpec};
use matchstream_core::{EdgeStream, FractionalMatching, Matching};

use run::{ClassArg, ModeArg, OracleArg, RunSettings, StopArg, VerificationFailure};

#[derive(Parser)]
#[command(
    name = "matchstream",
    version,
    about = "Semi-streaming maximum matching: solve, round, verify, benchmark"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Write a generated instance to an edge-list file.
    Gen(GenArgs),
    /// Solve an instance; write the fractional solution and dual certificate.
    Solve(SolveArgs),
    /// Round a fractional solution to an integral matching.
    Round(RoundArgs),
    /// Check artifacts (matching, fractional, dual) against the instance.
    Verify(VerifyArgs),
    /// Run every (instance, epsilon, oracle, order) combination in a config.
    Bench(BenchArgs),
    /// Summarize a benchmark CSV per instance.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Model spec, e.g. random-bipartite:n=100,l=50,p=0.1,seed=1 or path:n=3.
    spec: String,
    /// Edge-list file to write.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Edge-list file or generator spec.
    #[arg(long)]
    input: String,
    /// Fractional solution output file.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Dual certificate output file.
    #[arg(long)]
    dual: Option<PathBuf>,
    /// Append one benchmark-schema CSV row here (header written when new).
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Objective: unit weights or stream weights (default card, or per --oracle).
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Constraint family (default: bipartite when the header declares a left
    /// side, general otherwise).
    #[arg(long, value_enum)]
    class: Option<ClassArg>,
    /// Shuffle the stream with this seed (shorthand for --order seed:<k>).
    #[arg(long, conflicts_with = "order")]
    order_seed: Option<u64>,
    /// Stream order: identity, sorted, blocks, interleaved, or seed:<k>.
    #[arg(long)]
    order: Option<String>,
    /// Space budget override in bytes.
    #[arg(long)]
    budget_bytes: Option<usize>,
    /// Oracle family: greedy (unit), weighted (class-rounded), general (odd sets).
    #[arg(long, value_enum)]
    oracle: Option<OracleArg>,
    /// Stop on the certified gap or after a fixed iteration count.
    #[arg(long, value_enum, default_value_t = StopArg::Gap)]
    stop: StopArg,
    /// Multiply the default iteration cap.
    #[arg(long, default_value_t = 1.0)]
    tmax_scale: f64,
}

#[derive(Args)]
struct RoundArgs {
    /// Fractional solution file.
    #[arg(long)]
    input: PathBuf,
    /// Matching output file.
    #[arg(long)]
    output: PathBuf,
    /// Support threshold parameter.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Rounding family; general handles bipartite supports too.
    #[arg(long, value_enum, default_value_t = ClassArg::General)]
    class: ClassArg,
}

#[derive(Args)]
struct VerifyArgs {
    /// Edge-list file or generator spec.
    #[arg(long)]
    input: String,
    /// Matching to check for disjointness and stream membership.
    #[arg(long)]
    matching: Option<PathBuf>,
    /// Fractional solution to check for LP feasibility.
    #[arg(long)]
    fractional: Option<PathBuf>,
    /// Dual certificate to check edge coverage for.
    #[arg(long)]
    dual: Option<PathBuf>,
    /// Fail when the recomputed duality gap exceeds this.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Objective the artifacts were produced under.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum)]
    class: Option<ClassArg>,
    #[arg(long, conflicts_with = "order")]
    order_seed: Option<u64>,
    #[arg(long)]
    order: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    /// Config file: flat key=value stanzas separated by blank lines.
    #[arg(long)]
    input: PathBuf,
    /// CSV report to write, one row per run.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Benchmark CSV produced by `bench`.
    #[arg(long)]
    input: PathBuf,
    /// Summary destination (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(exit_code(&e));
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if cause.downcast_ref::<VerificationFailure>().is_some() {
            return 3;
        }
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::BudgetExceeded { .. } | CoreError::WidthViolation { .. } => 2,
                CoreError::CertificateInvalid { .. } => 3,
                _ => 1,
            };
        }
    }
    1
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.verb {
        Verb::Gen(a) => cmd_gen(a),
        Verb::Solve(a) => cmd_solve(a),
        Verb::Round(a) => cmd_round(a),
        Verb::Verify(a) => cmd_verify(a),
        Verb::Bench(a) => bench::cmd_bench(&a.input, &a.output),
        Verb::Report(a) => bench::cmd_report(&a.input, a.output.as_deref()),
    }
}

fn parse_order(order: &Option<String>, order_seed: Option<u64>) -> Result<EdgeOrder> {
    match (order, order_seed) {
        (Some(s), _) => Ok(EdgeOrder::parse(s)?),
        (None, Some(k)) => Ok(EdgeOrder::Seeded(k)),
        (None, None) => Ok(EdgeOrder::Identity),
    }
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let spec = GenSpec::parse(&a.spec)?;
    generate_to_file(&spec, &a.output)?;
    let m = spec.edges::<f64>().count();
    println!("wrote {} n={} m={}", a.output.display(), spec.vertex_count(), m);
    Ok(())
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let order = parse_order(&a.order, a.order_seed)?;
    let stream: EdgeStream = open_edge_stream_ordered(&a.input, order)?;
    let settings = RunSettings {
        epsilon: a.epsilon,
        mode: a.mode,
        class: a.class,
        oracle: a.oracle,
        stop: a.stop,
        tmax_scale: a.tmax_scale,
        budget_bytes: a.budget_bytes,
    };
    let (outcome, mode, class) = run::solve_stream(&stream, &settings)?;
    if let Some(p) = &a.output {
        write_fractional(p, &outcome.x)?;
    }
    if let Some(p) = &a.dual {
        write_dual(p, stream.n(), &outcome.dual)?;
    }
    let st = &outcome.stats;
    let wall_ms = st.wall_time.as_secs_f64() * 1e3;
    println!(
        "instance={} n={} m={} mode={} class={} epsilon={}",
        stream.source_label(),
        stream.n(),
        stream.m(),
        run::mode_str(mode),
        run::class_str(class),
        a.epsilon
    );
    println!(
        "primal={} dual={} gap={} converged={}",
        outcome.x.value(),
        outcome.dual.value,
        st.certificate_gap,
        st.converged
    );
    println!(
        "passes={} iterations={} peak_bytes={} wall_ms={wall_ms:.3}",
        st.passes, st.iterations, st.peak_bytes
    );
    if let Some(p) = &a.stats {
        let row = run::BenchRow {
            instance: stream.source_label().to_string(),
            epsilon: a.epsilon,
            order_seed: stream.order().to_string(),
            lp_value_fractional: Some(outcome.x.value()),
            passes: Some(st.passes),
            iterations: Some(st.iterations),
            peak_bytes: Some(st.peak_bytes),
            gap: Some(st.certificate_gap),
            wall_ms: Some(wall_ms),
            ..run::BenchRow::default()
        };
        run::append_stats_row(p, &row)?;
    }
    Ok(())
}

fn cmd_round(a: RoundArgs) -> Result<()> {
    let x: FractionalMatching = parse_fractional(&a.input)?;
    let tau = default_support_threshold(x.n(), a.epsilon);
    let m = match a.class {
        ClassArg::Bipartite => round_bipartite(&x, tau)?,
        ClassArg::General => round_general(&x, tau)?,
    };
    write_matching(&a.output, &m)?;
    println!("size={} weight={} input_value={}", m.len(), m.weight(), x.value());
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let order = parse_order(&a.order, a.order_seed)?;
    let stream: EdgeStream = open_edge_stream_ordered(&a.input, order)?;
    let (mode, class) = run::resolve_problem(a.mode, a.class, None, stream.bipartite_left())?;
    let mut failures: Vec<String> = Vec::new();

    if let Some(p) = &a.matching {
        let m: Matching = parse_matching(p)?;
        if m.n() != stream.n() {
            failures.push(format!(
                "matching declares n={}, instance has n={}",
                m.n(),
                stream.n()
            ));
        } else if run::verify_matching_stream(&stream, &m)? {
            println!("matching: ok size={} weight={}", m.len(), m.weight());
        } else {
            failures.push("matching uses edges absent from the stream".to_string());
        }
    }

    let mut primal: Option<f64> = None;
    if let Some(p) = &a.fractional {
        let x: FractionalMatching = parse_fractional(p)?;
        if x.n() != stream.n() {
            failures.push(format!(
                "fractional declares n={}, instance has n={}",
                x.n(),
                stream.n()
            ));
        } else {
            // odd-set feasibility is enumerated, so gate it on support size
            let mut verts: HashSet<u32> = HashSet::new();
            for ((u, v), _, _) in x.iter() {
                verts.insert(u);
                verts.insert(v);
            }
            let eps = a.epsilon.unwrap_or(0.1);
            let check_class = if class == GraphClass::General && verts.len() <= 24 {
                GraphClass::General
            } else {
                GraphClass::Bipartite { left: stream.bipartite_left() }
            };
            let lp = MatchingLp::new(stream.n(), check_class, mode, eps)?;
            let viol = check_feasible(&lp, &x, 1e-9);
            if viol.is_empty() {
                println!("fractional: feasible value={}", x.value());
            } else {
                failures.push(format!("fractional infeasible: {:?}", viol[0]));
            }
            primal = Some(x.value());
        }
    }

    if let Some(p) = &a.dual {
        let (dn, dual) = parse_dual::<f64>(p)?;
        if dn != stream.n() {
            failures.push(format!("dual declares n={dn}, instance has n={}", stream.n()));
        } else {
            match verify_dual_feasibility(&stream, &dual, mode, 1e-9) {
                Ok(()) => println!("dual: feasible value={}", dual.value),
                Err(e) => failures.push(e.to_string()),
            }
            if let Some(pv) = primal {
                let gap = duality_gap(pv, dual.value);
                println!("gap={gap}");
                if let Some(eps) = a.epsilon {
                    if gap > eps + 1e-9 {
                        failures.push(format!("gap {gap} exceeds epsilon {eps}"));
                    }
                }
            }
        }
    }

    if failures.is_empty() {
        println!("verify: ok");
        Ok(())
    } else {
        for f in &failures {
            eprintln!("verify: FAIL {f}");
        }
        Err(VerificationFailure(failures.swap_remove(0)).into())
    }
}
