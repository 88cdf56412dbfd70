use thiserror::Error;

/// Every failure mode surfaced by the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("root polish did not converge on [{lo:e}, {hi:e}] after {iterations} iterations")]
    NoConvergence { lo: f64, hi: f64, iterations: usize },
    #[error("s_z elimination is singular near the equator (|s_z| = {0:e})")]
    SingularElimination(f64),
    #[error("critical coupling diverges at mu = 1")]
    DivergentCritical,
    #[error("mu = {mu} is not in the inverted regime (mu_c = {mu_c})")]
    OutsideInvertedRegime { mu: f64, mu_c: f64 },
    #[error("degenerate denominator 2 mu - g_c^2 = {0:e}")]
    DegenerateDenominator(f64),
    #[error("no window with coexisting minima in g ∈ [{lo}, {hi}]")]
    NoCoexistence { lo: f64, hi: f64 },
    #[error("Fock cutoff would exceed the hard maximum {0}")]
    CutoffLimit(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("steady-state system is singular")]
    SingularSystem,
    #[error("steady-state residual {0:e} exceeds the acceptance threshold")]
    ResidualTooLarge(f64),
    #[error("Wigner grid too narrow: boundary |W| / max|W| = {0:e}")]
    GridTooNarrow(f64),
    #[error("branch weight {0:e} is degenerate")]
    DegenerateWeight(f64),
    #[error("spin-weight ratio has a zero denominator")]
    ZeroDenominator,
    #[error("Langevin description is degenerate at mu = 1")]
    DegenerateMu,
    #[error("effective potential is unbounded below; normalization overflows")]
    NormalizationOverflow,
    #[error("moment <p^{0} x^m> is not supported")]
    UnsupportedMoment(u32),
    #[error("regime violation: {0}")]
    RegimeViolation(String),
    #[error("trajectory left the stable region (|x| = {0:e})")]
    Unstable(f64),
    #[error("no bracket for the target value on the search interval")]
    NoBracket,
    #[error("non-positive data in log-log fit")]
    NonPositiveData,
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("eigendecomposition failed")]
    Eigen,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
