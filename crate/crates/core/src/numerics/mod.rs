//! Scalar numerics shared by the other modules: dual numbers, bracketed root
//! finding with grazing-aware scanning, and golden-section minimisation.
//!
//! Everything here is a pure function of its inputs.

mod dual;
mod minimize;
mod roots;

pub use dual::{Dual, Real};
pub use minimize::minimize_1d;
pub use roots::{refine_root, scan_first_bracket, Bracket, RootOptions, GRAZING_REFINEMENTS};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("interval [{}, {}] does not enclose a sign change", .0.lo, .0.hi)]
    InvalidBracket(Bracket),
    #[error("root not converged after {iterations} iterations; last bracket [{}, {}]", .last.lo, .last.hi)]
    NoConvergence { iterations: usize, last: Bracket },
    #[error("function is not finite at {at}")]
    NonFinite { at: f64, last: Bracket },
}
