use thiserror::Error;

/// Errors raised by the model library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape {m1}x{m2}: both periods must be at least 1")]
    InvalidShape { m1: usize, m2: usize },
    #[error("enumeration of {sites} sites exceeds the cap of {cap}")]
    EnumerationTooLarge { sites: usize, cap: usize },
    #[error("step assignment is not a bijection of the torus")]
    NotBijective,
    #[error("down steps are not allowed when the vertical period is 2")]
    DownOnPeriodTwo,
    #[error("wrong number of steps: expected {expected}, got {got}")]
    StepCount { expected: usize, got: usize },
    #[error("configuration contains two-cycles but a pure configuration is required")]
    NotPure,
    #[error("unsupported parameters: {0}")]
    UnsupportedParameters(String),
    #[error("parameters outside the probabilistic regime (alpha^2 < 4 gamma delta)")]
    OutsideRegime,
    #[error("kernel sector ({theta1},{theta2}) is singular")]
    SingularSector { theta1: u8, theta2: u8 },
    #[error("partition function vanishes")]
    ZeroPartition,
    #[error("event sites must be pairwise distinct")]
    DuplicateSites,
    #[error("site ({x1},{x2}) lies outside the domain")]
    SiteOutOfRange { x1: i64, x2: i64 },
    #[error("non-real value: imaginary part {im:e} against real part {re:e}")]
    NonReal { re: f64, im: f64 },
    #[error("denominator 1 + gamma w + delta/w vanishes at w = {re} + {im}i")]
    VanishingDenominator { re: f64, im: f64 },
    #[error("quadrature did not reach tolerance {tol:e} (estimate {err:e})")]
    QuadratureFailed { tol: f64, err: f64 },
    #[error("beta = {0} is within 1e-9 of a phase transition")]
    NonGeneric(f64),
    #[error("invalid walker configuration: {0}")]
    InvalidWalkers(String),
    #[error("probability {0:e} is negative beyond rounding")]
    NegativeProbability(f64),
    #[error("instance too large: {0}")]
    Intractable(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
