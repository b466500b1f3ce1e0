//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero in Q(zeta_{order})")]
    DivisionByZero { order: u64 },

    #[error("series has no invertible leading coefficient")]
    NonUnitLeading,

    #[error("sector extraction requires integer exponents >= 0 (expDenom = 1)")]
    SectorPrecondition,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("enumeration budget exceeded: block needs {needed} vectors, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("residue j = {j} is not invertible mod r = {r}")]
    NonInvertibleResidue { r: u64, j: u64 },

    #[error("rank r = {0} must be prime")]
    NonPrimeRank(u64),

    #[error("truncation order {0} must be at least 1")]
    InvalidOrder(String),

    #[error("closed forms are only valid for the K3 surface invariants")]
    NonK3Surface,

    #[error("non-integral input: {0}")]
    NonIntegralInput(String),

    #[error("Brauer-trivial sector w = 0 has no Hilbert-scheme assembly")]
    TrivialSector,

    #[error("unsupported atom {0} for the S-transformation at rank {1}")]
    UnsupportedAtom(String, u64),

    #[error("evaluation point must satisfy Im(tau) > 0, got Im = {0}")]
    NotInUpperHalfPlane(f64),

    #[error("convergence budget exceeded: tail estimate {tail:e} above tolerance {tol:e}")]
    ConvergenceBudget { tail: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
