use alloc::string::String;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong in the model, solver, oracle and simulator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// Input data violates a documented invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A BLD has no positive secrecy rate at the given jamming level.
    #[error("BLD {index} has zero secrecy rate at Q = {q_agg:e} W")]
    ZeroSecrecy { index: u32, q_agg: f64 },

    /// The problem admits no feasible point.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A numerical routine failed to bracket or converge.
    #[error("solver error: {0}")]
    Solver(String),

    /// The dual loop hit its iteration cap without a certified primal.
    #[error(
        "dual iteration did not converge after {iterations} iterations \
         (residual {residual:e}, relative duality gap {gap:e})"
    )]
    DualNotConverged { iterations: usize, residual: f64, gap: f64 },
}

impl Error {
    /// True for the variants that mean "no feasible point" rather than a bug
    /// or bad input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_) | Error::ZeroSecrecy { .. })
    }
}
