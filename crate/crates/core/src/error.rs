use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// Variants are grouped by the exit code the command-line front end maps
/// them to: configuration and input problems exit with 2, infeasible
/// geometry and enumeration caps exit with 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid torus parameters: {0}")]
    InvalidParams(String),

    #[error("vertex {vertex} out of range (torus has {sites} sites)")]
    VertexOutOfRange { vertex: usize, sites: usize },

    #[error("coordinates {coords:?} out of range for side length {n}")]
    CoordinatesOutOfRange { coords: Vec<usize>, n: usize },

    #[error("ball of radius {radius} overlaps itself on the torus: need n > 2*rho*r (n={n}, rho={rho})")]
    SelfOverlappingBall { radius: usize, n: usize, rho: usize },

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("atom offset {offset:?} outside B(0,{radius})")]
    OffsetOutsideBall { offset: Vec<i64>, radius: usize },

    #[error("atom offset {offset:?} has arity {found}, expected dimension {expected}")]
    OffsetArity {
        offset: Vec<i64>,
        found: usize,
        expected: usize,
    },

    #[error("mixed radii in one basic local sentence")]
    MixedRadii,

    #[error("basic local sentence declares {declared} witnesses but has {found} bodies")]
    BodyCount { declared: usize, found: usize },

    #[error("enumeration cap exceeded: ball has {bits} cells, cap is {cap}")]
    CapExceeded { bits: usize, cap: usize },

    #[error("exact enumeration bound exceeded: {sites} sites, at most {max} supported")]
    EnumerationBound { sites: usize, max: usize },

    #[error("model has no tractable per-configuration mass: {0}")]
    IntractableModel(String),

    #[error("invalid probability {0}")]
    InvalidProbability(f64),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("potential schedule gives a(n) = {a} >= 0 at n = {n}")]
    NonNegativePotential { n: usize, a: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("configuration dump: {0}")]
    Dump(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SelfOverlappingBall { .. }
            | Error::CapExceeded { .. }
            | Error::EnumerationBound { .. }
            | Error::IntractableModel(_)
            | Error::Infeasible(_) => 3,
            Error::Io(_) | Error::Csv(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
