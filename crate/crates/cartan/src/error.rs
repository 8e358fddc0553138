use thiserror::Error;

/// Errors surfaced by the engine.  Violations found by verification suites
/// are not errors; they are reported as failing entries with witnesses.
#[derive(Error, Debug)]
pub enum CartanError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("missing numeric substitution for {0}")]
    MissingSubstitution(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("generator set mismatch: {0}")]
    GeneratorMismatch(String),
    #[error("degree {0} is outside the computable window")]
    DegreeOutsideWindow(i64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("connection is not commutative: {0}")]
    NoncommutativeConnection(String),
    #[error("connection is not invariant: {0}")]
    NonInvariantConnection(String),
    #[error("map/form space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("operation leaves the exact coefficient class: {0}")]
    OutsideExactClass(String),
    #[error("atom is not integrable: {0}")]
    NonIntegrable(String),
    #[error("quadrature tolerance not achieved: requested {requested}, achieved {achieved}")]
    QuadratureFailure { requested: f64, achieved: f64 },
    #[error("construction contract failed: {0}")]
    ContractFailure(String),
    #[error("parse error: {0}")]
    Parse(String),
}
