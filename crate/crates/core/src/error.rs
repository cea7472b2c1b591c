use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Violations of an audited inequality are never reported through this type;
/// audits return them as data.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("index {index} out of range (available: {available})")]
    Range { index: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is outside the domain")]
    Domain(String),

    #[error("input is rational ({0}); an irrational rotation number is required")]
    RationalInput(String),

    #[error("{p}/{q} is not in lowest terms")]
    NotCoprime { p: i64, q: i64 },

    #[error("precision failure: {0}")]
    Precision(String),

    #[error("small divisor |lambda^{n} - lambda| underflows the working precision")]
    DivisorUnderflow { n: usize },

    #[error("Newton continuation diverged at path node {node} (delta = {delta})")]
    NewtonDivergence { node: usize, delta: String },

    #[error("branch collided with z = 0 at path node {node}; the collision radius was exceeded")]
    CollisionWithZero { node: usize },

    #[error("|delta|^q = {modulus} is not below the collision radius {radius}")]
    CollisionRadiusExceeded { modulus: f64, radius: f64 },

    #[error("root finder failed: {0}")]
    RootFinder(String),

    #[error("resultant degeneracy: {0}")]
    ResultantDegenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
