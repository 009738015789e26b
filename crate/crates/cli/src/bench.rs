//! Benchmark config parsing, the cross-product runner, and report summaries.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;

use matchstream_core::stream::{open_edge_stream_ordered, EdgeOrder};
use matchstream_core::EdgeStream;

use crate::run::{
    self, baseline_opt, BenchRow, ClassArg, ModeArg, OracleArg, RunSettings, StopArg, CSV_HEADER,
};

/// One config stanza; the runner executes the cross product of its
/// instances, epsilons, oracles, and orders.
#[derive(Clone, Debug)]
struct Stanza {
    instances: Vec<String>,
    epsilons: Vec<f64>,
    orders: Vec<(EdgeOrder, String)>,
    oracles: Vec<Option<OracleArg>>,
    mode: Option<ModeArg>,
    class: Option<ClassArg>,
    stop: StopArg,
    tmax_scale: f64,
    budget_bytes: Option<usize>,
    baseline: bool,
}

impl Default for Stanza {
    fn default() -> Self {
        Stanza {
            instances: Vec::new(),
            epsilons: Vec::new(),
            orders: Vec::new(),
            oracles: Vec::new(),
            mode: None,
            class: None,
            stop: StopArg::Gap,
            tmax_scale: 1.0,
            budget_bytes: None,
            baseline: true,
        }
    }
}

fn parse_enum<T: ValueEnum + Copy>(s: &str) -> Result<T> {
    T::from_str(s, true).map_err(|e| anyhow!("bad value '{s}': {e}"))
}

/// Flat key-value stanzas separated by blank lines. List keys (`epsilon`,
/// `order`, `oracle`) take comma lists and may repeat; `instance` repeats
/// one per line because specs contain commas.
fn parse_config(path: &Path) -> Result<Vec<Stanza>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut stanzas: Vec<Stanza> = Vec::new();
    let mut cur = Stanza::default();
    let mut dirty = false;

    let mut flush = |cur: &mut Stanza, dirty: &mut bool, lineno: usize| -> Result<()> {
        if !*dirty {
            return Ok(());
        }
        if cur.instances.is_empty() {
            bail!("{}:{}: run stanza without an instance", path.display(), lineno);
        }
        if cur.epsilons.is_empty() {
            cur.epsilons.push(0.1);
        }
        if cur.orders.is_empty() {
            cur.orders.push((EdgeOrder::Identity, "identity".to_string()));
        }
        if cur.oracles.is_empty() {
            cur.oracles.push(None);
        }
        stanzas.push(std::mem::take(cur));
        *dirty = false;
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            flush(&mut cur, &mut dirty, lineno)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), lineno))?;
        let (k, v) = (k.trim(), v.trim());
        let ctx = |e: anyhow::Error| anyhow!("{}:{}: {e}", path.display(), lineno);
        dirty = true;
        match k {
            "instance" => cur.instances.push(v.to_string()),
            "epsilon" => {
                for tok in v.split(',') {
                    let eps: f64 = tok
                        .trim()
                        .parse()
                        .map_err(|_| anyhow!("{}:{}: bad epsilon '{tok}'", path.display(), lineno))?;
                    cur.epsilons.push(eps);
                }
            }
            "order" => {
                for tok in v.split(',') {
                    let tok = tok.trim();
                    let order = EdgeOrder::parse(tok).map_err(|e| ctx(e.into()))?;
                    cur.orders.push((order, tok.to_string()));
                }
            }
            "oracle" => {
                for tok in v.split(',') {
                    cur.oracles.push(Some(parse_enum::<OracleArg>(tok.trim()).map_err(ctx)?));
                }
            }
            "mode" => cur.mode = Some(parse_enum::<ModeArg>(v).map_err(ctx)?),
            "class" => cur.class = Some(parse_enum::<ClassArg>(v).map_err(ctx)?),
            "stop" => cur.stop = parse_enum::<StopArg>(v).map_err(ctx)?,
            "tmax-scale" => {
                cur.tmax_scale = v
                    .parse()
                    .map_err(|_| anyhow!("{}:{}: bad tmax-scale '{v}'", path.display(), lineno))?
            }
            "budget-bytes" => {
                cur.budget_bytes = Some(v.parse().map_err(|_| {
                    anyhow!("{}:{}: bad budget-bytes '{v}'", path.display(), lineno)
                })?)
            }
            "baseline" => {
                cur.baseline = match v {
                    "auto" => true,
                    "none" => false,
                    other => {
                        bail!("{}:{}: baseline must be auto or none, got '{other}'",
                            path.display(), lineno)
                    }
                }
            }
            other => bail!("{}:{}: unknown key '{other}'", path.display(), lineno),
        }
    }
    let last = text.lines().count();
    flush(&mut cur, &mut dirty, last)?;
    if stanzas.is_empty() {
        bail!("{}: no run stanzas", path.display());
    }
    Ok(stanzas)
}

/// Runs every configured combination; per-run failures become rows with the
/// error column set and the harness continues.
pub fn cmd_bench(input: &Path, output: &Path) -> Result<()> {
    let stanzas = parse_config(input)?;
    let mut w = csv::Writer::from_path(output)
        .with_context(|| format!("creating {}", output.display()))?;
    w.write_record(CSV_HEADER)?;
    let mut rows = 0usize;
    let mut failed = 0usize;
    for st in &stanzas {
        for inst in &st.instances {
            for &eps in &st.epsilons {
                for &oracle in &st.oracles {
                    for (order, label) in &st.orders {
                        let row = run_row(st, inst, eps, oracle, *order, label);
                        if !row.error.is_empty() {
                            failed += 1;
                        }
                        w.write_record(row.record())?;
                        rows += 1;
                    }
                }
            }
        }
    }
    w.flush()?;
    println!("wrote {rows} rows to {} ({failed} failed)", output.display());
    Ok(())
}

fn ratio_of(objective: f64, baseline: Option<f64>) -> Option<f64> {
    baseline.map(|b| {
        if b > 0.0 {
            objective / b
        } else if objective <= 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    })
}

fn run_row(
    st: &Stanza,
    inst: &str,
    eps: f64,
    oracle: Option<OracleArg>,
    order: EdgeOrder,
    label: &str,
) -> BenchRow {
    let mut row = BenchRow {
        instance: inst.to_string(),
        epsilon: eps,
        order_seed: label.to_string(),
        ..BenchRow::default()
    };
    match run_row_inner(st, inst, eps, oracle, order) {
        Ok((run, baseline)) => {
            row.lp_value_fractional = Some(run.outcome.x.value());
            row.matching_size = Some(run.objective);
            row.baseline_opt = baseline;
            row.ratio = ratio_of(run.objective, baseline);
            row.passes = Some(run.outcome.stats.passes);
            row.iterations = Some(run.outcome.stats.iterations);
            row.peak_bytes = Some(run.outcome.stats.peak_bytes);
            row.gap = Some(run.gap);
            row.wall_ms = Some(run.wall_ms);
            if let Some(r) = row.ratio {
                if r > 1.0 + 1e-9 {
                    row.error = format!(
                        "objective {} ({} edges) exceeds exact baseline {}",
                        run.objective,
                        run.matching.len(),
                        baseline.unwrap_or(f64::NAN)
                    );
                }
            }
        }
        Err(e) => row.error = format!("{e:#}"),
    }
    row
}

fn run_row_inner(
    st: &Stanza,
    inst: &str,
    eps: f64,
    oracle: Option<OracleArg>,
    order: EdgeOrder,
) -> Result<(run::RunOutput, Option<f64>)> {
    let stream: EdgeStream = open_edge_stream_ordered(inst, order)?;
    let settings = RunSettings {
        epsilon: eps,
        mode: st.mode,
        class: st.class,
        oracle,
        stop: st.stop,
        tmax_scale: st.tmax_scale,
        budget_bytes: st.budget_bytes,
    };
    let out = run::run_pipeline(&stream, &settings)?;
    let baseline = if st.baseline { baseline_opt(&stream, out.mode, out.class) } else { None };
    Ok((out, baseline))
}

#[derive(Default)]
struct Agg {
    runs: usize,
    errors: usize,
    min_ratio: Option<f64>,
    max_ratio: Option<f64>,
    max_gap: Option<f64>,
    max_passes: Option<u64>,
    max_peak: Option<u64>,
    wall_ms: f64,
}

fn fmin(cur: &mut Option<f64>, v: f64) {
    *cur = Some(cur.map_or(v, |c| c.min(v)));
}

fn fmax(cur: &mut Option<f64>, v: f64) {
    *cur = Some(cur.map_or(v, |c| c.max(v)));
}

fn umax(cur: &mut Option<u64>, v: u64) {
    *cur = Some(cur.map_or(v, |c| c.max(v)));
}

/// Per-instance summary of a benchmark CSV, to stdout or a file.
pub fn cmd_report(input: &Path, output: Option<&Path>) -> Result<()> {
    let mut rdr = csv::Reader::from_path(input)
        .with_context(|| format!("reading {}", input.display()))?;
    let headers = rdr.headers()?.clone();
    if !headers.iter().eq(CSV_HEADER.iter().copied()) {
        bail!("{}: unexpected header; not a benchmark CSV", input.display());
    }
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Agg> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or("");
        let inst = get(0).to_string();
        if !groups.contains_key(&inst) {
            order.push(inst.clone());
        }
        let agg = groups.entry(inst).or_default();
        agg.runs += 1;
        if !get(12).is_empty() {
            agg.errors += 1;
        }
        if let Ok(r) = get(6).parse::<f64>() {
            fmin(&mut agg.min_ratio, r);
            fmax(&mut agg.max_ratio, r);
        }
        if let Ok(g) = get(10).parse::<f64>() {
            fmax(&mut agg.max_gap, g);
        }
        if let Ok(p) = get(7).parse::<u64>() {
            umax(&mut agg.max_passes, p);
        }
        if let Ok(b) = get(9).parse::<u64>() {
            umax(&mut agg.max_peak, b);
        }
        if let Ok(ms) = get(11).parse::<f64>() {
            agg.wall_ms += ms;
        }
    }

    fn f6(v: Option<f64>) -> String {
        v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".to_string())
    }
    fn u(v: Option<u64>) -> String {
        v.map(|x| x.to_string()).unwrap_or_else(|| "-".to_string())
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<52} {:>5} {:>4} {:>9} {:>9} {:>9} {:>7} {:>11} {:>10}",
        "instance", "runs", "err", "min_ratio", "max_ratio", "max_gap", "passes", "peak_bytes",
        "wall_ms"
    );
    let mut total_runs = 0usize;
    let mut total_errors = 0usize;
    let mut total_wall = 0.0f64;
    for inst in &order {
        let a = &groups[inst];
        total_runs += a.runs;
        total_errors += a.errors;
        total_wall += a.wall_ms;
        let _ = writeln!(
            out,
            "{:<52} {:>5} {:>4} {:>9} {:>9} {:>9} {:>7} {:>11} {:>10.1}",
            inst,
            a.runs,
            a.errors,
            f6(a.min_ratio),
            f6(a.max_ratio),
            f6(a.max_gap),
            u(a.max_passes),
            u(a.max_peak),
            a.wall_ms
        );
    }
    let _ = writeln!(
        out,
        "{:<52} {:>5} {:>4} {:>9} {:>9} {:>9} {:>7} {:>11} {:>10.1}",
        "total", total_runs, total_errors, "", "", "", "", "", total_wall
    );
    match output {
        Some(p) => {
            std::fs::write(p, &out).with_context(|| format!("writing {}", p.display()))?;
            println!("wrote {}", p.display());
        }
        None => print!("{out}"),
    }
    Ok(())
}
