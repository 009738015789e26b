//! The semi-streaming access model: replayable sequential edge streams, pass
//! cursors, and the logical space meter every algorithm module charges.
//!
//! A stream is the only way to read a graph. Each pass yields the same edge
//! multiset in the same order; restarting a pass is free; random access does
//! not exist. The stream source itself (file contents or generator state) is
//! adversary-side and unmetered — the meter accounts for the *algorithm's*
//! working memory, in logical bytes (records times record size), so space
//! assertions are deterministic across platforms.

use std::cell::Cell;
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

/// Logical size of one edge record: two 32-bit endpoints plus a 64-bit weight.
pub const EDGE_RECORD_BYTES: usize = 16;
/// Logical size of one per-vertex dual record.
pub const DUAL_RECORD_BYTES: usize = 8;

/// A single stream item. Endpoints are 0-based and distinct; weight is
/// nonnegative (1 for unweighted streams).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<S> {
    pub u: u32,
    pub v: u32,
    pub w: S,
}

impl<S: Scalar> Edge<S> {
    pub fn new(u: u32, v: u32, w: S) -> Self {
        Edge { u, v, w }
    }

    pub fn unit(u: u32, v: u32) -> Self {
        Edge { u, v, w: S::one() }
    }

    /// Endpoint pair normalized to (min, max); the undirected identity of the edge.
    pub fn key(&self) -> (u32, u32) {
        if self.u <= self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

// ---------------------------------------------------------------------------
// Space meter
// ---------------------------------------------------------------------------

/// Hard logical space accounting. Exceeding the budget is an error, never a
/// silent clamp; `peak` tracks the high-water mark for reporting.
#[derive(Debug, Clone)]
pub struct SpaceMeter {
    budget_bytes: usize,
    current_bytes: usize,
    peak_bytes: usize,
}

impl SpaceMeter {
    pub fn new(budget_bytes: usize) -> Self {
        SpaceMeter { budget_bytes, current_bytes: 0, peak_bytes: 0 }
    }

    /// Default budget: 64 * n * ceil(eps^-3) edge records.
    pub fn default_budget(n: u32, eps: f64) -> usize {
        let inv3 = (1.0 / (eps * eps * eps)).ceil() as usize;
        64 * n as usize * inv3 * EDGE_RECORD_BYTES
    }

    pub fn with_default_budget(n: u32, eps: f64) -> Self {
        SpaceMeter::new(Self::default_budget(n, eps))
    }

    /// Charge `bytes` against the budget on behalf of `module`.
    pub fn charge(&mut self, module: &'static str, bytes: usize) -> Result<()> {
        let next = self.current_bytes + bytes;
        if next > self.budget_bytes {
            return Err(Error::BudgetExceeded {
                module,
                current: self.current_bytes,
                delta: bytes,
                budget: self.budget_bytes,
            });
        }
        self.current_bytes = next;
        if next > self.peak_bytes {
            self.peak_bytes = next;
        }
        Ok(())
    }

    /// Release previously charged bytes.
    pub fn free(&mut self, module: &'static str, bytes: usize) -> Result<()> {
        if bytes > self.current_bytes {
            return Err(Error::MeterUnderflow {
                module,
                current: self.current_bytes,
                delta: bytes,
            });
        }
        self.current_bytes -= bytes;
        Ok(())
    }

    /// Signed convenience wrapper over `charge`/`free`.
    pub fn charge_signed(&mut self, module: &'static str, delta: i64) -> Result<()> {
        if delta >= 0 {
            self.charge(module, delta as usize)
        } else {
            self.free(module, (-delta) as usize)
        }
    }

    pub fn current_bytes(&self) -> usize {
        self.current_bytes
    }

    pub fn peak_bytes(&self) -> usize {
        self.peak_bytes
    }

    pub fn budget_bytes(&self) -> usize {
        self.budget_bytes
    }
}

/// Measurement record for one run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    /// Completed stream passes, counted by the stream cursor itself.
    pub passes: u32,
    /// MWU iterations (one oracle pass each).
    pub iterations: u32,
    /// Passes spent before the loop (weight normalization).
    pub preliminary_passes: u32,
    /// Passes spent verifying the exported certificate.
    pub certificate_passes: u32,
    pub peak_bytes: usize,
    pub wall_time: std::time::Duration,
    /// Relative duality gap of the exported primal/dual pair.
    pub certificate_gap: f64,
    /// False when the iteration cap was hit before the stop rule was met.
    pub converged: bool,
    /// Value of the best single oracle candidate seen.
    pub best_iterate_value: f64,
}

// ---------------------------------------------------------------------------
// Edge orders
// ---------------------------------------------------------------------------

/// Stream order adversary: a seeded permutation plus a small library of named
/// pathological orders. Fixed (source, order) always yields the same sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOrder {
    /// Source order (file order or generation order).
    Identity,
    /// Pseudo-random permutation, identical on every pass.
    Seeded(u64),
    /// Sorted by (min endpoint, max endpoint).
    SortedByEndpoint,
    /// Stable-grouped by the lower endpoint (left side for bipartite files).
    BipartiteBlock,
    /// First and second halves of the source order interleaved.
    Interleaved,
}

impl EdgeOrder {
    pub fn parse(s: &str) -> Result<EdgeOrder> {
        let t = s.trim();
        if let Some(rest) = t.strip_prefix("seed:") {
            let seed: u64 = rest
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad order seed '{rest}'")))?;
            return Ok(EdgeOrder::Seeded(seed));
        }
        match t {
            "identity" => Ok(EdgeOrder::Identity),
            "sorted" => Ok(EdgeOrder::SortedByEndpoint),
            "blocks" => Ok(EdgeOrder::BipartiteBlock),
            "interleaved" => Ok(EdgeOrder::Interleaved),
            other => Err(Error::InvalidParameter(format!("unknown edge order '{other}'"))),
        }
    }
}

impl fmt::Display for EdgeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeOrder::Identity => write!(f, "identity"),
            EdgeOrder::Seeded(s) => write!(f, "seed:{s}"),
            EdgeOrder::SortedByEndpoint => write!(f, "sorted"),
            EdgeOrder::BipartiteBlock => write!(f, "blocks"),
            EdgeOrder::Interleaved => write!(f, "interleaved"),
        }
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Edge weight law for generated streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightLaw {
    Unit,
    /// Uniform on (0, 1].
    Uniform,
}

/// Named graph families for generated streams and the CLI `gen` verb.
#[derive(Debug, Clone, PartialEq)]
pub enum GenModel {
    Path { n: u32 },
    Cycle { n: u32 },
    CompleteBipartite { a: u32, b: u32 },
    RandomBipartite { n: u32, l: u32, p: f64 },
    RandomGeneral { n: u32, p: f64 },
    /// Adversarial layered family: a dense distractor block streamed before
    /// the edges of the (unique) perfect completion, so one greedy pass
    /// achieves only half the optimum.
    HardLayered { k: u32 },
}

/// A generator instance: model plus the seed that fixes coins and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub model: GenModel,
    pub seed: u64,
    pub weights: WeightLaw,
}

impl GenSpec {
    /// Parses `model:key=value,...` spec strings, e.g.
    /// `random-bipartite:n=200,l=100,p=0.05,seed=3`.
    pub fn parse(spec: &str) -> Result<GenSpec> {
        let bad = |msg: String| Error::InvalidParameter(msg);
        let (name, rest) = match spec.split_once(':') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (spec.trim(), ""),
        };
        let mut kv = std::collections::BTreeMap::new();
        if !rest.is_empty() {
            for part in rest.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| bad(format!("expected key=value, got '{part}'")))?;
                kv.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get_u32 = |kv: &std::collections::BTreeMap<String, String>, k: &str| -> Result<u32> {
            kv.get(k)
                .ok_or_else(|| bad(format!("{name}: missing parameter '{k}'")))?
                .parse::<u32>()
                .map_err(|_| bad(format!("{name}: parameter '{k}' must be an integer")))
        };
        let get_f64 = |kv: &std::collections::BTreeMap<String, String>, k: &str| -> Result<f64> {
            kv.get(k)
                .ok_or_else(|| bad(format!("{name}: missing parameter '{k}'")))?
                .parse::<f64>()
                .map_err(|_| bad(format!("{name}: parameter '{k}' must be a number")))
        };
        let model = match name {
            "path" => GenModel::Path { n: get_u32(&kv, "n")? },
            "cycle" => GenModel::Cycle { n: get_u32(&kv, "n")? },
            "complete-bipartite" => {
                GenModel::CompleteBipartite { a: get_u32(&kv, "a")?, b: get_u32(&kv, "b")? }
            }
            "random-bipartite" => GenModel::RandomBipartite {
                n: get_u32(&kv, "n")?,
                l: get_u32(&kv, "l")?,
                p: get_f64(&kv, "p")?,
            },
            "random-general" => {
                GenModel::RandomGeneral { n: get_u32(&kv, "n")?, p: get_f64(&kv, "p")? }
            }
            "hard-layered" => GenModel::HardLayered { k: get_u32(&kv, "k")? },
            other => return Err(bad(format!("unknown generator model '{other}'"))),
        };
        let seed = match kv.get("seed") {
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| bad("parameter 'seed' must be an integer".into()))?,
            None => 0,
        };
        let weights = match kv.get("w").map(String::as_str) {
            None | Some("unit") => WeightLaw::Unit,
            Some("uniform") => WeightLaw::Uniform,
            Some(other) => return Err(bad(format!("unknown weight law '{other}'"))),
        };
        let spec = GenSpec { model, seed, weights };
        spec.validate()?;
        Ok(spec)
    }

    /// True when the string names a known generator model (vs. a file path).
    pub fn looks_like_spec(s: &str) -> bool {
        let name = s.split(':').next().unwrap_or("");
        matches!(
            name,
            "path" | "cycle" | "complete-bipartite" | "random-bipartite" | "random-general"
                | "hard-layered"
        )
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        match self.model {
            GenModel::Path { n } if n < 2 => bad("path: n must be >= 2"),
            GenModel::Cycle { n } if n < 3 => bad("cycle: n must be >= 3"),
            GenModel::CompleteBipartite { a, b } if a == 0 || b == 0 => {
                bad("complete-bipartite: sides must be nonempty")
            }
            GenModel::RandomBipartite { n, l, p } => {
                if l == 0 || l >= n {
                    return bad("random-bipartite: need 0 < l < n");
                }
                if !(0.0..=1.0).contains(&p) {
                    return bad("random-bipartite: need p in [0, 1]");
                }
                Ok(())
            }
            GenModel::RandomGeneral { n, p } => {
                if n < 2 {
                    return bad("random-general: n must be >= 2");
                }
                if !(0.0..=1.0).contains(&p) {
                    return bad("random-general: need p in [0, 1]");
                }
                Ok(())
            }
            GenModel::HardLayered { k } if k == 0 => bad("hard-layered: k must be >= 1"),
            _ => Ok(()),
        }
    }

    pub fn vertex_count(&self) -> u32 {
        match self.model {
            GenModel::Path { n } | GenModel::Cycle { n } => n,
            GenModel::CompleteBipartite { a, b } => a + b,
            GenModel::RandomBipartite { n, .. } | GenModel::RandomGeneral { n, .. } => n,
            GenModel::HardLayered { k } => 4 * k,
        }
    }

    /// Left-side size when the model is bipartite by construction.
    pub fn bipartite_left(&self) -> Option<u32> {
        match self.model {
            GenModel::CompleteBipartite { a, .. } => Some(a),
            GenModel::RandomBipartite { l, .. } => Some(l),
            GenModel::HardLayered { k } => Some(2 * k),
            _ => None,
        }
    }

    /// Streams the model's edges in generation order. Deterministic for a
    /// fixed spec; calling twice yields identical sequences.
    pub fn edges<S: Scalar>(&self) -> GenIter<S> {
        GenIter {
            spec: self.clone(),
            rng: ChaCha8Rng::seed_from_u64(self.seed),
            i: 0,
            j: 0,
            emitted: 0,
            _marker: std::marker::PhantomData,
        }
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.model {
            GenModel::Path { n } => write!(f, "path:n={n}")?,
            GenModel::Cycle { n } => write!(f, "cycle:n={n}")?,
            GenModel::CompleteBipartite { a, b } => write!(f, "complete-bipartite:a={a},b={b}")?,
            GenModel::RandomBipartite { n, l, p } => {
                write!(f, "random-bipartite:n={n},l={l},p={p}")?
            }
            GenModel::RandomGeneral { n, p } => write!(f, "random-general:n={n},p={p}")?,
            GenModel::HardLayered { k } => write!(f, "hard-layered:k={k}")?,
        }
        if self.seed != 0 {
            write!(f, ",seed={}", self.seed)?;
        }
        if self.weights == WeightLaw::Uniform {
            write!(f, ",w=uniform")?;
        }
        Ok(())
    }
}

/// Iterator over a generator's edge sequence.
pub struct GenIter<S> {
    spec: GenSpec,
    rng: ChaCha8Rng,
    i: u32,
    j: u32,
    emitted: u64,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar> GenIter<S> {
    fn weight(&mut self) -> S {
        match self.spec.weights {
            WeightLaw::Unit => S::one(),
            // 1 - U(0,1) lands in (0, 1]
            WeightLaw::Uniform => crate::scalar::lift(1.0 - self.rng.random::<f64>()),
        }
    }
}

impl<S: Scalar> Iterator for GenIter<S> {
    type Item = Edge<S>;

    fn next(&mut self) -> Option<Edge<S>> {
        match self.spec.model {
            GenModel::Path { n } => {
                if self.i + 1 >= n {
                    return None;
                }
                let u = self.i;
                self.i += 1;
                let w = self.weight();
                Some(Edge::new(u, u + 1, w))
            }
            GenModel::Cycle { n } => {
                if self.i >= n {
                    return None;
                }
                let u = self.i;
                self.i += 1;
                let w = self.weight();
                Some(Edge::new(u, (u + 1) % n, w))
            }
            GenModel::CompleteBipartite { a, b } => {
                if self.i >= a {
                    return None;
                }
                let e = Edge::new(self.i, a + self.j, self.weight());
                self.j += 1;
                if self.j == b {
                    self.j = 0;
                    self.i += 1;
                }
                Some(e)
            }
            GenModel::RandomBipartite { n, l, p } => {
                while self.i < l {
                    let keep = self.rng.random::<f64>() < p;
                    let (u, v) = (self.i, self.j + l);
                    self.j += 1;
                    if self.j == n - l {
                        self.j = 0;
                        self.i += 1;
                    }
                    if keep {
                        let w = self.weight();
                        return Some(Edge::new(u, v, w));
                    }
                }
                None
            }
            GenModel::RandomGeneral { n, p } => {
                while self.i + 1 < n {
                    let keep = self.rng.random::<f64>() < p;
                    let (u, v) = (self.i, self.i + 1 + self.j);
                    self.j += 1;
                    if self.i + 1 + self.j == n {
                        self.j = 0;
                        self.i += 1;
                    }
                    if keep {
                        let w = self.weight();
                        return Some(Edge::new(u, v, w));
                    }
                }
                None
            }
            GenModel::HardLayered { k } => {
                // ids: a = 0..k, d = k..2k, b = 2k..3k, c = 3k..4k
                let block = (k as u64) * (k as u64);
                let idx = self.emitted;
                self.emitted += 1;
                if idx < block {
                    let (i, j) = ((idx / k as u64) as u32, (idx % k as u64) as u32);
                    Some(Edge::new(i, 2 * k + j, self.weight()))
                } else if idx < block + k as u64 {
                    let i = (idx - block) as u32;
                    Some(Edge::new(i, 3 * k + i, self.weight()))
                } else if idx < block + 2 * k as u64 {
                    let i = (idx - block - k as u64) as u32;
                    Some(Edge::new(k + i, 2 * k + i, self.weight()))
                } else {
                    None
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Edge stream
// ---------------------------------------------------------------------------

enum Backing<S> {
    /// File-backed or in-memory streams hold the validated edge list on the
    /// source side (the stand-in for a disk the algorithm cannot index into).
    Materialized(Vec<Edge<S>>),
    /// Generator-backed streams regenerate the sequence on every pass.
    Generated(GenSpec),
}

/// A replayable edge stream. All graph access goes through `begin_pass`;
/// `n`, `m`, and the bipartite declaration are known at open time.
pub struct EdgeStream<S> {
    n: u32,
    m: usize,
    bipartite_left: Option<u32>,
    backing: Backing<S>,
    order: EdgeOrder,
    /// Index permutation realizing `order` over the source sequence.
    perm: Option<Vec<u32>>,
    passes: Cell<u32>,
    source_label: String,
}

/// Opens a stream from either a generator spec string or an edge-list file
/// path, with an optional permutation seed for the edge-order adversary.
pub fn open_edge_stream<S: Scalar>(
    source: &str,
    order_seed: Option<u64>,
) -> Result<EdgeStream<S>> {
    let order = match order_seed {
        Some(s) => EdgeOrder::Seeded(s),
        None => EdgeOrder::Identity,
    };
    open_edge_stream_ordered(source, order)
}

/// As `open_edge_stream`, with the full order library.
pub fn open_edge_stream_ordered<S: Scalar>(
    source: &str,
    order: EdgeOrder,
) -> Result<EdgeStream<S>> {
    if GenSpec::looks_like_spec(source) {
        let spec = GenSpec::parse(source)?;
        EdgeStream::from_generator(spec, order)
    } else {
        EdgeStream::from_file(Path::new(source), order)
    }
}

impl<S: Scalar> EdgeStream<S> {
    /// Builds an in-memory stream, validating edges as a parser would.
    pub fn from_edges(
        n: u32,
        edges: Vec<Edge<S>>,
        bipartite_left: Option<u32>,
    ) -> Result<EdgeStream<S>> {
        for (idx, e) in edges.iter().enumerate() {
            validate_edge(e, n, bipartite_left)
                .map_err(|msg| Error::parse("<memory>", idx + 1, msg))?;
        }
        if let Some(l) = bipartite_left {
            if l == 0 || l >= n {
                return Err(Error::InvalidParameter(format!(
                    "bipartite left size {l} out of range for n={n}"
                )));
            }
        }
        let mut s = EdgeStream {
            n,
            m: edges.len(),
            bipartite_left,
            backing: Backing::Materialized(edges),
            order: EdgeOrder::Identity,
            perm: None,
            passes: Cell::new(0),
            source_label: "<memory>".to_string(),
        };
        s.build_order()?;
        Ok(s)
    }

    pub fn from_generator(spec: GenSpec, order: EdgeOrder) -> Result<EdgeStream<S>> {
        let n = spec.vertex_count();
        let bipartite_left = spec.bipartite_left();
        let label = spec.to_string();
        // Identity order replays the generator directly; any other order
        // needs the sequence materialized once to permute it.
        let (backing, m) = if order == EdgeOrder::Identity {
            let m = spec.edges::<S>().count();
            (Backing::Generated(spec), m)
        } else {
            let edges: Vec<Edge<S>> = spec.edges().collect();
            let m = edges.len();
            (Backing::Materialized(edges), m)
        };
        let mut s = EdgeStream {
            n,
            m,
            bipartite_left,
            backing,
            order,
            perm: None,
            passes: Cell::new(0),
            source_label: label,
        };
        s.build_order()?;
        Ok(s)
    }

    pub fn from_file(path: &Path, order: EdgeOrder) -> Result<EdgeStream<S>> {
        let (n, bipartite_left, edges) = parse_edge_list(path)?;
        let mut s = EdgeStream {
            n,
            m: edges.len(),
            bipartite_left,
            backing: Backing::Materialized(edges),
            order,
            perm: None,
            passes: Cell::new(0),
            source_label: path.display().to_string(),
        };
        s.build_order()?;
        Ok(s)
    }

    fn build_order(&mut self) -> Result<()> {
        let edges = match &self.backing {
            Backing::Generated(_) => {
                if self.order != EdgeOrder::Identity {
                    return Err(Error::Internal(
                        "generator backing requires identity order".to_string(),
                    ));
                }
                return Ok(());
            }
            Backing::Materialized(e) => e,
        };
        let m = edges.len();
        let mut idx: Vec<u32> = (0..m as u32).collect();
        match self.order {
            EdgeOrder::Identity => return Ok(()),
            EdgeOrder::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                idx.shuffle(&mut rng);
            }
            EdgeOrder::SortedByEndpoint => {
                idx.sort_by_key(|&i| edges[i as usize].key());
            }
            EdgeOrder::BipartiteBlock => {
                let left = self.bipartite_left;
                idx.sort_by_key(|&i| {
                    let e = &edges[i as usize];
                    match left {
                        Some(l) => {
                            if e.u < l {
                                e.u
                            } else {
                                e.v
                            }
                        }
                        None => e.key().0,
                    }
                });
            }
            EdgeOrder::Interleaved => {
                let half = m.div_ceil(2);
                let mut out = Vec::with_capacity(m);
                for i in 0..half {
                    out.push(i as u32);
                    if half + i < m {
                        out.push((half + i) as u32);
                    }
                }
                idx = out;
            }
        }
        self.perm = Some(idx);
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bipartite_left(&self) -> Option<u32> {
        self.bipartite_left
    }

    pub fn order(&self) -> EdgeOrder {
        self.order
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    /// Completed full passes so far, counted when a cursor exhausts.
    pub fn passes(&self) -> u32 {
        self.passes.get()
    }

    /// Starts a sequential pass. Dropping the cursor early does not count as
    /// a pass; exhausting it increments the pass counter exactly once.
    pub fn begin_pass(&self) -> PassCursor<'_, S> {
        let inner = match &self.backing {
            Backing::Materialized(_) => CursorInner::Indexed(0),
            Backing::Generated(spec) => CursorInner::Gen(spec.edges()),
        };
        PassCursor { stream: self, inner, counted: false }
    }

    /// Runs one full pass, applying `f` to every edge.
    pub fn for_each_edge(&self, mut f: impl FnMut(&Edge<S>)) {
        for e in self.begin_pass() {
            f(&e);
        }
    }
}

enum CursorInner<S> {
    Indexed(usize),
    Gen(GenIter<S>),
}

/// Sequential view of one pass; an `Iterator` over edges.
pub struct PassCursor<'a, S> {
    stream: &'a EdgeStream<S>,
    inner: CursorInner<S>,
    counted: bool,
}

impl<S: Scalar> Iterator for PassCursor<'_, S> {
    type Item = Edge<S>;

    fn next(&mut self) -> Option<Edge<S>> {
        let out = match &mut self.inner {
            CursorInner::Indexed(pos) => {
                let edges = match &self.stream.backing {
                    Backing::Materialized(e) => e,
                    Backing::Generated(_) => unreachable!("indexed cursor on generator backing"),
                };
                if *pos >= edges.len() {
                    None
                } else {
                    let i = match &self.stream.perm {
                        Some(p) => p[*pos] as usize,
                        None => *pos,
                    };
                    *pos += 1;
                    Some(edges[i])
                }
            }
            CursorInner::Gen(it) => it.next(),
        };
        if out.is_none() && !self.counted {
            self.counted = true;
            self.stream.passes.set(self.stream.passes.get() + 1);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Edge-list text format
// ---------------------------------------------------------------------------

fn validate_edge<S: Scalar>(
    e: &Edge<S>,
    n: u32,
    bipartite_left: Option<u32>,
) -> std::result::Result<(), String> {
    if e.u == e.v {
        return Err(format!("self-loop at vertex {}", e.u));
    }
    if e.u >= n || e.v >= n {
        return Err(format!("endpoint out of range: {} {} (n={})", e.u, e.v, n));
    }
    if e.w < S::zero() {
        return Err(format!("negative weight on edge {} {}", e.u, e.v));
    }
    if let Some(l) = bipartite_left {
        let (a, b) = e.key();
        if !(a < l && b >= l) {
            return Err(format!(
                "edge {} {} does not cross the declared bipartition (left size {l})",
                e.u, e.v
            ));
        }
    }
    Ok(())
}

/// Parses the edge-list format:
/// header `p <n> <m> [bipartite <L>]`, `#` comments, lines `u v [w]`.
pub fn parse_edge_list<S: Scalar>(path: &Path) -> Result<(u32, Option<u32>, Vec<Edge<S>>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut header: Option<(u32, usize, Option<u32>)> = None;
    let mut edges: Vec<Edge<S>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut tok = t.split_whitespace();
        if header.is_none() {
            if tok.next() != Some("p") {
                return Err(Error::parse(path, lineno, "expected header 'p <n> <m>'"));
            }
            let n: u32 = tok
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(path, lineno, "bad vertex count in header"))?;
            let m: usize = tok
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(path, lineno, "bad edge count in header"))?;
            let left = match tok.next() {
                None => None,
                Some("bipartite") => {
                    let l: u32 = tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| {
                        Error::parse(path, lineno, "bad left size after 'bipartite'")
                    })?;
                    if l == 0 || l >= n {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("bipartite left size {l} out of range for n={n}"),
                        ));
                    }
                    Some(l)
                }
                Some(other) => {
                    return Err(Error::parse(
                        path,
                        lineno,
                        format!("unexpected header token '{other}'"),
                    ))
                }
            };
            if tok.next().is_some() {
                return Err(Error::parse(path, lineno, "trailing tokens in header"));
            }
            header = Some((n, m, left));
            continue;
        }
        let (n, m, left) = header.unwrap();
        let u: u32 = tok
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(path, lineno, "bad endpoint"))?;
        let v: u32 = tok
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(path, lineno, "bad endpoint"))?;
        let w: S = match tok.next() {
            None => S::one(),
            Some(ws) => {
                let wf: f64 = ws
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, format!("bad weight '{ws}'")))?;
                if !wf.is_finite() {
                    return Err(Error::parse(path, lineno, format!("bad weight '{ws}'")));
                }
                S::from_f64(wf)
                    .ok_or_else(|| Error::parse(path, lineno, format!("bad weight '{ws}'")))?
            }
        };
        if tok.next().is_some() {
            return Err(Error::parse(path, lineno, "trailing tokens on edge line"));
        }
        let e = Edge::new(u, v, w);
        validate_edge(&e, n, left).map_err(|msg| Error::parse(path, lineno, msg))?;
        if edges.len() == m {
            return Err(Error::parse(
                path,
                lineno,
                format!("more edges than the declared count {m}"),
            ));
        }
        edges.push(e);
    }
    let (n, m, left) = header.ok_or_else(|| Error::parse(path, 0, "missing header"))?;
    if edges.len() != m {
        return Err(Error::parse(
            path,
            0,
            format!("header declares {m} edges, file has {}", edges.len()),
        ));
    }
    Ok((n, left, edges))
}

/// Writes the edge-list format read by `parse_edge_list`.
pub fn write_edge_list<S: Scalar>(
    path: &Path,
    n: u32,
    bipartite_left: Option<u32>,
    edges: impl Iterator<Item = Edge<S>>,
    m: usize,
) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e: std::io::Error| Error::io(path, e);
    match bipartite_left {
        Some(l) => writeln!(out, "p {n} {m} bipartite {l}").map_err(io)?,
        None => writeln!(out, "p {n} {m}").map_err(io)?,
    }
    let mut written = 0usize;
    for e in edges {
        if e.w == S::one() {
            writeln!(out, "{} {}", e.u, e.v).map_err(io)?;
        } else {
            let wf = e.w.to_f64().unwrap_or(f64::NAN);
            writeln!(out, "{} {} {}", e.u, e.v, wf).map_err(io)?;
        }
        written += 1;
    }
    if written != m {
        return Err(Error::Internal(format!(
            "writer promised {m} edges, produced {written}"
        )));
    }
    out.flush().map_err(io)
}

/// Convenience: materialize a generator model into an edge-list file.
pub fn generate_to_file(spec: &GenSpec, path: &Path) -> Result<()> {
    let m = spec.edges::<f64>().count();
    write_edge_list(path, spec.vertex_count(), spec.bipartite_left(), spec.edges::<f64>(), m)
}
