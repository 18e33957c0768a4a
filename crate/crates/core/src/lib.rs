//! Homogenization of periodic operators `b(D)* g(x/eps) b(D)` of order `2p`.
//!
//! The crate computes the effective matrix from the cell problem, the germ and the
//! first-order correction, and compares the exact and effective Bloch-fiber
//! exponentials in operator norm on truncated plane-wave bases.

pub mod cauchy;
pub mod cell;
pub mod coefficient;
pub mod error;
pub mod fiber;
pub mod fit;
pub mod lattice;
pub mod linalg;
pub mod operator;
pub mod symbol;
pub mod sweep;
pub mod threshold;

pub use cauchy::{solve_cauchy, CauchyProblem, EvolutionResult, TimeProfile};
pub use cell::{
    detect_special_cases, direction_data, effective_matrix, first_order_matrix, germ, homogenize, solve_cell_problem,
    CellSolution, DirectionData, EffectiveData, SpecialCases,
};
pub use coefficient::{PeriodicCoefficient, PositivityCertificate};
pub use error::{Error, Result};
pub use fiber::{EffectiveFiber, FiberModel, FiberOperator, SmoothingOperator, Spectrum};
pub use fit::{loglog_slope, SlopeFit};
pub use lattice::{unit_directions, BrillouinGrid, FrequencySet, Lattice, SampleMode};
pub use linalg::CMat;
pub use operator::PeriodicOperator;
pub use sweep::{sup_errors, ErrorQuery, SupError};
pub use symbol::{MultiIndex, SymbolB};
pub use threshold::{threshold_projection, threshold_residual, ThresholdReport, ThresholdWindow};
