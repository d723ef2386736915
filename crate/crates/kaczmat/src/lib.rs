//! Randomized Kaczmarz-type iterative solvers for the matrix equations
//! `AX = B` and `XA = C`.
//!
//! Eight methods are provided, all advancing by one cheap row or column
//! projection per iteration — no matrix-matrix products inside the
//! loop:
//!
//! | method  | equation | handles                                  |
//! |---------|----------|------------------------------------------|
//! | RKCAX   | `AX=B`   | consistent, any rank                     |
//! | RKCXA   | `XA=C`   | consistent, any rank                     |
//! | RGSIAX  | `AX=B`   | least squares, full column rank          |
//! | RGSIXA  | `XA=C`   | least squares, full row rank             |
//! | REKIAX  | `AX=B`   | least squares, arbitrary rank            |
//! | REKIXA  | `XA=C`   | least squares, arbitrary rank            |
//! | REGSIAX | `AX=B`   | least squares, arbitrary rank            |
//! | REGSIXA | `XA=C`   | least squares, arbitrary rank            |
//!
//! All converge (in mean square) to the minimal Frobenius-norm
//! solution `A⁺B` (resp. `CA⁺`), which makes them usable for computing
//! right, left and Moore-Penrose inverses by setting the right-hand
//! side to an identity; see [`solvers::compute_inverse`].
//!
//! Supporting machinery: [`oracle`] holds a dependency-free one-sided
//! Jacobi SVD used as ground truth and for reference solutions,
//! [`recursive`] updates a solved system in closed form when rows or
//! columns are appended, and [`dataio`] reads Matrix Market files and
//! generates the synthetic Gaussian benchmark instances.
//!
//! Everything is deterministic under a fixed seed: the library embeds
//! its own small counter-based generator (see [`sampling`]) so traces
//! reproduce bit-for-bit across platforms.

pub mod dataio;
pub mod matrix;
pub mod oracle;
pub mod recursive;
pub mod sampling;
pub mod solvers;

pub use matrix::{
    Axis, DenseMatrix, KernelCounters, Matrix, MatrixError, RankOneTarget, SparseMatrix,
};
pub use oracle::{contraction_rate, min_norm_solution, pinv, svd, OracleError, SvdResult};
pub use recursive::{RecursiveError, RecursiveState};
pub use sampling::{CyclicState, RngState, SamplingError, WeightedSampler};
pub use solvers::{
    compute_inverse, solve, solve_from, Consistency, InverseKind, Method, ProblemInstance,
    Selection, Side, SolveError, SolveReport, SolveStatus, SolverConfig, StopMetric, TraceRecord,
    DIVERGENCE_THRESHOLD,
};

pub use dataio::{
    generate_synthetic, read_matrix_market, read_matrix_market_path, write_matrix_market,
    write_trace, DataError, RankMode, SyntheticInstance, SyntheticSpec,
};
