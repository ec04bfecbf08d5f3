//! Nyström solvers for the nonlocal dispersal problem
//!
//! ```text
//! ∫_Ω K(x, y) u(y) dy = f(x, u(x)) + t φ₁(x) + g₁(x),   x ∈ Ω,
//! ```
//!
//! on boxes Ω ⊂ ℝᴺ (N ∈ {1, 2}). The crate discretizes the dispersal
//! operator by the tensor midpoint rule, computes its Perron eigenpair,
//! brackets solutions between sub- and supersolutions, enumerates further
//! roots by deflated Newton, and maps out the solution count against t.
//!
//! Modules follow the pipeline:
//! - [`domain`] and [`kernel`]: quadrature grid, kernels, row sums, kernel audit.
//! - [`operator`]: the discrete operator, shifted solves, eigenpair, forcing split.
//! - [`nonlinearity`]: reaction terms and their hypothesis audit.
//! - [`solver`]: sub/supersolutions, monotone iteration, Picard, deflated Newton.
//! - [`analysis`]: nonexistence bound, threshold bisection, solution-count diagram.
//! - [`io`] and [`cli`]: file formats and the batch front-end.

pub mod analysis;
pub mod cli;
pub mod domain;
pub mod error;
pub mod io;
pub mod kernel;
pub mod nonlinearity;
pub mod operator;
pub mod par;
pub mod solver;

pub use domain::{build_grid, Domain, Grid, Interval, Point};
pub use error::{Error, Result};
pub use kernel::{audit_kernel, row_sums, KernelAudit, KernelFamily, KernelSpec, RowSum, TableKernel};
pub use nonlinearity::{audit_hypotheses, c1_offset, HypothesisReport, Nonlinearity, NonlinearityFamily};
pub use operator::{
    assemble, assemble_with, decompose_forcing, principal_eigenpair, AssembleOptions, DiscreteOperator,
    EigenPair, ForcingDecomposition, ForcingMode,
};
pub use par::Execution;
pub use analysis::{
    bracket_threshold, diagram, nonexistence_bound, probe_existence, APDiagram, DiagramRow, NonexistenceBound,
    ProbeOptions, ProblemFamily, SolveMethod, ThresholdBracket, ThresholdOptions,
};
