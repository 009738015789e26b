//! Semi-streaming maximum matching via multiplicative weights.
//!
//! The crate is organized around the streaming access model: graphs are only
//! reachable through replayable edge passes ([`stream`]), every algorithm
//! charges a logical space meter, and the solver ([`mwu`]) drives one-pass
//! oracles ([`oracle`]) against the matching LP ([`lp`]), then hands the
//! fractional solution to [`round`] for integral extraction.
//!
//! All numeric kernels are generic over [`scalar::Real`] (any `num-traits`
//! float); the LP value arithmetic only needs [`scalar::Scalar`], so tests can
//! run it over exact rationals. The aliases below pin the default `f64`
//! instantiation used by the CLI.

pub mod error;
pub mod lp;
pub mod mwu;
pub mod oracle;
pub mod round;
pub mod scalar;
pub mod stream;

pub use error::Error;

/// Default scalar for the shipped pipeline.
pub type Value = f64;

pub type Edge = stream::Edge<Value>;
pub type EdgeStream = stream::EdgeStream<Value>;
pub type FractionalMatching = lp::FractionalMatching<Value>;
pub type Matching = lp::Matching<Value>;
pub type DualState = lp::DualState<Value>;
pub type DualSolution = lp::DualSolution<Value>;
pub type MatchingLp = lp::MatchingLp;
pub type AdmissibilityRule = oracle::AdmissibilityRule<Value>;
pub type OracleResult = oracle::OracleResult<Value>;
pub type MwuConfig = mwu::MwuConfig<Value>;
pub type DualExport = mwu::DualExport<Value>;
pub type SolveOutcome = mwu::SolveOutcome<Value>;
pub type SupportGraph = round::SupportGraph<Value>;






pub type Result<T> = std::result::Result<T, Error>;
