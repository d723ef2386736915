//! Recursive solution updates under data appends.
//!
//! Given the minimal Frobenius-norm (least-squares) solution of `AX=B`
//! or `XA=C` together with `A^+`, appending one row (or column) to the
//! coefficient and right-hand side yields the new solution in closed
//! form via the Greville rank-one update, without re-solving. A cheap
//! orthogonal-projection warm start is also provided for callers that
//! prefer to re-run an iterative method on the augmented equation.

use crate::matrix::{DenseMatrix, MatrixError};
use crate::oracle::{self, OracleError};
use crate::solvers::Side;
use std::fmt;

/// Relative threshold for deciding whether an appended slice lies in
/// the existing row (column) space; an exact-zero dichotomy is not
/// realizable in floating point.
pub const SPAN_MEMBERSHIP_TOL: f64 = 1e-8;

const STATE_TOL: f64 = 1e-8;

#[derive(Debug)]
pub enum RecursiveError {
    /// Appended row is (exactly) zero.
    ZeroRow,
    /// Appended column is (exactly) zero.
    ZeroColumn,
    /// Row appends apply to `AX=B` states, column appends to `XA=C`.
    WrongSide { expected: Side, got: Side },
    /// Supplied solution or pseudoinverse fails its residual check.
    StaleState(String),
    Matrix(MatrixError),
    Oracle(OracleError),
}

impl fmt::Display for RecursiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecursiveError::ZeroRow => write!(f, "appended row is zero"),
            RecursiveError::ZeroColumn => write!(f, "appended column is zero"),
            RecursiveError::WrongSide { expected, got } => {
                write!(f, "append requires side {expected}, state is {got}")
            }
            RecursiveError::StaleState(msg) => write!(f, "state validation failed: {msg}"),
            RecursiveError::Matrix(e) => write!(f, "{e}"),
            RecursiveError::Oracle(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RecursiveError {}

impl From<MatrixError> for RecursiveError {
    fn from(e: MatrixError) -> Self {
        RecursiveError::Matrix(e)
    }
}

impl From<OracleError> for RecursiveError {
    fn from(e: OracleError) -> Self {
        RecursiveError::Oracle(e)
    }
}

/// Cached minimal-norm solution plus the pseudoinverse that the append
/// formulas consume. States are immutable; appends return a new state,
/// so histories can be branched and shared freely.
#[derive(Debug, Clone)]
pub struct RecursiveState {
    side: Side,
    a: DenseMatrix,
    rhs: DenseMatrix,
    solution: DenseMatrix,
    pinv: DenseMatrix,
}

impl RecursiveState {
    /// Builds a state from scratch with the direct oracle.
    pub fn new(a: DenseMatrix, rhs: DenseMatrix, side: Side) -> Result<Self, RecursiveError> {
        let pinv = oracle::pinv(&a)?;
        let solution = match side {
            Side::AxB => pinv.matmul(&rhs)?,
            Side::XaC => rhs.matmul(&pinv)?,
        };
        Ok(Self {
            side,
            a,
            rhs,
            solution,
            pinv,
        })
    }

    /// Builds a state from externally computed parts, verifying that
    /// the solution and pseudoinverse actually belong to `(a, rhs)`.
    pub fn from_parts(
        side: Side,
        a: DenseMatrix,
        rhs: DenseMatrix,
        solution: DenseMatrix,
        pinv: DenseMatrix,
    ) -> Result<Self, RecursiveError> {
        let state = Self {
            side,
            a,
            rhs,
            solution,
            pinv,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn coefficient(&self) -> &DenseMatrix {
        &self.a
    }

    pub fn rhs(&self) -> &DenseMatrix {
        &self.rhs
    }

    pub fn solution(&self) -> &DenseMatrix {
        &self.solution
    }

    pub fn pinv(&self) -> &DenseMatrix {
        &self.pinv
    }

    /// Relative residuals of the four Penrose equations for the cached
    /// pseudoinverse, in order: `AXA=A`, `XAX=X`, `(AX)^T=AX`,
    /// `(XA)^T=XA`.
    pub fn penrose_residuals(&self) -> [f64; 4] {
        let a = &self.a;
        let x = &self.pinv;
        let ax = a.matmul(x).expect("state shapes");
        let xa = x.matmul(a).expect("state shapes");
        let nrm = |m: &DenseMatrix| m.frobenius_sq().sqrt();
        [
            nrm(&ax.matmul(a).unwrap().sub(a).unwrap()) / nrm(a).max(1e-300),
            nrm(&xa.matmul(x).unwrap().sub(x).unwrap()) / nrm(x).max(1e-300),
            nrm(&ax.transpose().sub(&ax).unwrap()) / (1.0 + nrm(&ax)),
            nrm(&xa.transpose().sub(&xa).unwrap()) / (1.0 + nrm(&xa)),
        ]
    }

    /// Re-checks the state invariants: Penrose residuals below 1e-8 and
    /// the cached solution within 1e-8 (relative) of `A^+ rhs` /
    /// `rhs A^+`. Useful after long append chains.
    pub fn validate(&self) -> Result<(), RecursiveError> {
        let residuals = self.penrose_residuals();
        for (k, &r) in residuals.iter().enumerate() {
            if !(r <= STATE_TOL) {
                return Err(RecursiveError::StaleState(format!(
                    "Penrose equation {} residual {r:.3e} exceeds {STATE_TOL:.0e}",
                    k + 1
                )));
            }
        }
        let expected = match self.side {
            Side::AxB => self.pinv.matmul(&self.rhs)?,
            Side::XaC => self.rhs.matmul(&self.pinv)?,
        };
        let diff = expected.sub(&self.solution)?.frobenius_sq().sqrt();
        let scale = expected.frobenius_sq().sqrt().max(1e-300);
        if !(diff / scale <= STATE_TOL || diff <= STATE_TOL) {
            return Err(RecursiveError::StaleState(format!(
                "solution residual {:.3e} exceeds {STATE_TOL:.0e}",
                diff / scale
            )));
        }
        Ok(())
    }

    /// Appends row `a_row` to the coefficient and `b_row` to the
    /// right-hand side of an `AX=B` state, returning the state of the
    /// augmented equation with its minimal-norm solution
    /// `X~ = A^+B + d(b - a A^+B)` and the updated pseudoinverse
    /// `[A^+ - d(aA^+), d]`. The direction `d` depends on whether the
    /// new row already lies in the row space of `A`.
    pub fn append_row_update(
        &self,
        a_row: &[f64],
        b_row: &[f64],
    ) -> Result<RecursiveState, RecursiveError> {
        if self.side != Side::AxB {
            return Err(RecursiveError::WrongSide {
                expected: Side::AxB,
                got: self.side,
            });
        }
        let n = self.a.cols();
        let p = self.rhs.cols();
        check_len(a_row, n)?;
        check_len(b_row, p)?;
        let row_norm = norm(a_row);
        if row_norm == 0.0 {
            return Err(RecursiveError::ZeroRow);
        }

        // u1 = a A^+ (length m), projection of the new row: a A^+ A
        let u1 = self.pinv.vecmat(a_row)?;
        let proj = self.a.vecmat(&u1)?;
        let v: Vec<f64> = a_row.iter().zip(&proj).map(|(&x, &y)| x - y).collect();
        let d: Vec<f64> = if norm(&v) > SPAN_MEMBERSHIP_TOL * row_norm {
            // generic branch: d = (a - aA^+A)^+ = v^T / ||v||^2
            let inv = 1.0 / dot(&v, &v);
            v.iter().map(|&x| x * inv).collect()
        } else {
            // in-row-space branch: d = (A^T A)^+ a^T / (1 + a (A^T A)^+ a^T),
            // with (A^T A)^+ = A^+ (A^+)^T
            let g = self.pinv.matvec(&u1)?;
            let denom = 1.0 + dot(a_row, &g);
            g.iter().map(|&x| x / denom).collect()
        };

        // X~ = X + d (b - aX)
        let ax = self.solution.vecmat(a_row)?;
        let correction: Vec<f64> = b_row.iter().zip(&ax).map(|(&b, &y)| b - y).collect();
        let mut solution = self.solution.clone();
        add_outer(&mut solution, &d, &correction);

        // A~^+ = [A^+ - d (a A^+), d]
        let m = self.a.rows();
        let mut pinv = DenseMatrix::zeros(n, m + 1);
        for i in 0..n {
            for j in 0..m {
                pinv.set(i, j, self.pinv.get(i, j) - d[i] * u1[j]);
            }
            pinv.set(i, m, d[i]);
        }

        let a = append_rows(&self.a, a_row);
        let rhs = append_rows(&self.rhs, b_row);
        Ok(RecursiveState {
            side: self.side,
            a,
            rhs,
            solution,
            pinv,
        })
    }

    /// Appends column `a_col` to the coefficient and `c_col` to the
    /// right-hand side of an `XA=C` state; the transpose mirror of
    /// [`RecursiveState::append_row_update`] with
    /// `X~ = CA^+ + (c - CA^+ a) d`.
    pub fn append_col_update(
        &self,
        a_col: &[f64],
        c_col: &[f64],
    ) -> Result<RecursiveState, RecursiveError> {
        if self.side != Side::XaC {
            return Err(RecursiveError::WrongSide {
                expected: Side::XaC,
                got: self.side,
            });
        }
        let m = self.a.rows();
        let n = self.a.cols();
        let p = self.rhs.rows();
        check_len(a_col, m)?;
        check_len(c_col, p)?;
        let col_norm = norm(a_col);
        if col_norm == 0.0 {
            return Err(RecursiveError::ZeroColumn);
        }

        // u1 = A^+ a (length n), projection: A A^+ a
        let u1 = self.pinv.matvec(a_col)?;
        let proj = self.a.matvec(&u1)?;
        let v: Vec<f64> = a_col.iter().zip(&proj).map(|(&x, &y)| x - y).collect();
        let d: Vec<f64> = if norm(&v) > SPAN_MEMBERSHIP_TOL * col_norm {
            let inv = 1.0 / dot(&v, &v);
            v.iter().map(|&x| x * inv).collect()
        } else {
            // d = a^T (AA^T)^+ / (1 + a^T (AA^T)^+ a), (AA^T)^+ = (A^+)^T A^+
            let g = self.pinv.vecmat(&u1)?;
            let denom = 1.0 + dot(a_col, &g);
            g.iter().map(|&x| x / denom).collect()
        };

        // X~ = X + (c - X a) d
        let xa = self.solution.matvec(a_col)?;
        let correction: Vec<f64> = c_col.iter().zip(&xa).map(|(&c, &y)| c - y).collect();
        let mut solution = self.solution.clone();
        add_outer(&mut solution, &correction, &d);

        // A~^+ = [[A^+ - (A^+ a) d]; [d]]
        let mut pinv = DenseMatrix::zeros(n + 1, m);
        for i in 0..n {
            for j in 0..m {
                pinv.set(i, j, self.pinv.get(i, j) - u1[i] * d[j]);
            }
        }
        for j in 0..m {
            pinv.set(n, j, d[j]);
        }

        let a = append_cols(&self.a, a_col);
        let rhs = append_cols(&self.rhs, c_col);
        Ok(RecursiveState {
            side: self.side,
            a,
            rhs,
            solution,
            pinv,
        })
    }

    /// Orthogonal projection of the current solution onto the
    /// hyperplane defined by the appended data:
    /// `X_bar = X + a^T (b - aX) / ||a||^2` (row case) or
    /// `X_bar = X + (c - Xa) a^T / ||a||^2` (column case).
    ///
    /// Intended as an initial iterate for re-running a solver on the
    /// augmented equation; it equals the exact updated solution when
    /// the appended slice is orthogonal to all existing rows (columns).
    pub fn warm_start_projection(
        &self,
        slice: &[f64],
        rhs_slice: &[f64],
    ) -> Result<DenseMatrix, RecursiveError> {
        let nrm_sq = dot(slice, slice);
        match self.side {
            Side::AxB => {
                check_len(slice, self.a.cols())?;
                check_len(rhs_slice, self.rhs.cols())?;
                if nrm_sq == 0.0 {
                    return Err(RecursiveError::ZeroRow);
                }
                let ax = self.solution.vecmat(slice)?;
                let w: Vec<f64> = rhs_slice
                    .iter()
                    .zip(&ax)
                    .map(|(&b, &y)| (b - y) / nrm_sq)
                    .collect();
                let mut out = self.solution.clone();
                add_outer(&mut out, slice, &w);
                Ok(out)
            }
            Side::XaC => {
                check_len(slice, self.a.rows())?;
                check_len(rhs_slice, self.rhs.rows())?;
                if nrm_sq == 0.0 {
                    return Err(RecursiveError::ZeroColumn);
                }
                let xa = self.solution.matvec(slice)?;
                let w: Vec<f64> = rhs_slice
                    .iter()
                    .zip(&xa)
                    .map(|(&c, &y)| (c - y) / nrm_sq)
                    .collect();
                let mut out = self.solution.clone();
                add_outer(&mut out, &w, slice);
                Ok(out)
            }
        }
    }
}

fn check_len(v: &[f64], expected: usize) -> Result<(), RecursiveError> {
    if v.len() != expected {
        return Err(RecursiveError::Matrix(MatrixError::DataLength {
            expected,
            got: v.len(),
        }));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn add_outer(m: &mut DenseMatrix, u: &[f64], v: &[f64]) {
    for (i, &ui) in u.iter().enumerate() {
        if ui == 0.0 {
            continue;
        }
        for (x, &vj) in m.row_mut(i).iter_mut().zip(v) {
            *x += ui * vj;
        }
    }
}

fn append_rows(m: &DenseMatrix, row: &[f64]) -> DenseMatrix {
    let mut data = m.data().to_vec();
    data.extend_from_slice(row);
    DenseMatrix::new(m.rows() + 1, m.cols(), data).expect("validated append")
}

fn append_cols(m: &DenseMatrix, col: &[f64]) -> DenseMatrix {
    let mut data = Vec::with_capacity((m.cols() + 1) * m.rows());
    for i in 0..m.rows() {
        data.extend_from_slice(m.row(i));
        data.push(col[i]);
    }
    DenseMatrix::new(m.rows(), m.cols() + 1, data).expect("validated append")
}
