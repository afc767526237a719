use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HmsError {
    /// Input data violates a defining constraint.
    #[error("constraint violated: {0}")]
    Constraint(String),
    /// Caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),
    /// span(B) ⊄ span(Z): the chain complex is broken.
    #[error("containment failure: {0}")]
    Containment(String),
    /// Truncation window too small to answer exactly.
    #[error("truncation insufficient: {0}")]
    Truncation(String),
    /// A block of d m_k = Φ_k has no solution.
    #[error("obstruction at arity {arity}, internal degree {degree}, multidefect {defect}")]
    Obstruction { arity: usize, degree: String, defect: String },
    /// Two independently computed sides disagree.
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, HmsError>;
