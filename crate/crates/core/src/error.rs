use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polynomial is not divisible: remainder norm {remainder:.3e}")]
    NonDivisible { remainder: f64 },
    #[error("mixed scalar realizations (exact and float) in one input")]
    MixedScalars,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("reduced denominator vanishes at q = 1")]
    PoleAtOne,
    #[error("shape violations: {}", .0.join("; "))]
    Shape(Vec<String>),
    #[error("x2-degree {degree} lies outside the D(x) expansion for {slot}")]
    PatternOverflow { slot: String, degree: usize },
    #[error("frame assertion failed for {slot}: {detail}")]
    FrameAssertion { slot: String, detail: String },
    #[error("blow-up at t = {t}")]
    BlowUp { t: f64, last_state: Vec<f64> },
    #[error("non-finite value at t = {t}")]
    NotFinite { t: f64, last_state: Vec<f64> },
    #[error("even period: the cyclic system is under-determined")]
    EvenPeriod,
    #[error("lift q -> qcheck is unsolvable: {0}")]
    Unsolvable(String),
    #[error("b0 vanishes")]
    ZeroB0,
    #[error("b0* is inconsistent with the fiber: b0*^2 != f1^(1) - f2^(1)")]
    InconsistentB0,
    #[error("degenerate fiber: f1^(1) = f2^(1)")]
    DegenerateFiber,
    #[error("theta series does not converge: {0}")]
    NonConvergent(String),
    #[error("argument lies on the (shifted) theta divisor: |theta| = {0:.3e}")]
    DivisorHit(f64),
    #[error("cubic has a multiple root")]
    MultipleRoot,
    #[error("argument is a lattice pole")]
    LatticePole,
    #[error("closed form hits a pole at t = {0}")]
    PoleHit(f64),
    #[error("displayed closed form disagrees with the flow: max deviation {max_deviation:.3e}")]
    NormalizationMismatch { max_deviation: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
