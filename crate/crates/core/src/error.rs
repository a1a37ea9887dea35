use thiserror::Error;

use crate::code::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: out-of-range element, bad degree, reducible modulus, ...
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// An operation was asked to leave its mathematical domain (e.g. inverting zero).
    #[error("domain violation: {0}")]
    Domain(String),

    #[error("enumeration would visit {required} subspaces, budget is {budget}")]
    BudgetExceeded { required: String, budget: u64 },

    #[error("infeasible parameters: {}", render_diagnostics(.0))]
    Infeasible(Vec<Diagnostic>),

    /// A construction produced an object violating its own defining property.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

fn render_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
